#pragma once

#include <array>
#include <cstddef>

#include "rcdepth/loss_result.hpp"
#include "rcdepth/tensor.hpp"

namespace rcdepth {

/// Five feature maps at spatial scales 1/2^i of a base resolution, i = 1..5.
struct FeaturePyramid {
    enum class Role { camera, radar, decoder };

    std::array<Tensor, 5> levels;
    Role role = Role::camera;

    /// Throws ShapeError unless every level is rank-3 and spatial extents
    /// halve per level (each >= 1).
    void validate() const;
};

/// Three full-resolution depth maps tagged with their head scales k = 8,4,2;
/// maps[0] is the k=8 head and carries the largest loss weight 1/2.
struct InterDepthSet {
    std::array<Tensor, 3> maps;
    std::array<std::size_t, 3> scales{8, 4, 2};
};

/// N x N cosine similarities between flattened pixels (Tensor rank 2).
using SimilarityMatrix = Tensor;

/// Levels with at most this many pixels materialize the full similarity
/// matrix; larger ones stream it in row blocks with identical results.
inline constexpr std::size_t kSimilarityMaterializeLimit = 4096;

/// Pixel-wise L1 feature mimicry over a 5-level pyramid:
///   loss = sum_i (1/2^i) * mean|S_i - T_i|.
/// The per-level mean keeps the magnitude independent of channel count and
/// resolution. grads[i] is d(loss)/d(student level i); the teacher is a
/// constant. Call once for camera and once for radar features; the
/// single-modal distillation loss is their sum.
LossResult feature_l1_pyramid(const FeaturePyramid& student,
                              const FeaturePyramid& teacher);

/// Cosine similarity between every pair of flattened pixels of a rank-3
/// feature map. A zero feature vector scores 0 against everything,
/// including itself.
SimilarityMatrix pairwise_similarity(const Tensor& f);

/// Structure-guided distillation over decoder pyramids:
///   loss = sum_i (1/2^i) * (1/N_i^2) * sum_{p,q} (alpha^S_pq - alpha^T_pq)^2
/// with N_i the pixel count of level i. grads[i] is the gradient w.r.t. the
/// student features, propagated through the cosine.
LossResult structure_distill_loss(const FeaturePyramid& student,
                                  const FeaturePyramid& teacher);

/// Uncertainty-weighted distillation of intermediate depth maps:
///   loss = sum_{i=1..3} (1/2^i) * mean(U_i * |student_i - teacher_i|)
/// where U_i is the uncertainty of the student map against the teacher map.
/// With detach_u the weight is treated as a constant in the gradient;
/// otherwise the gradient also flows through U.
LossResult inter_depth_distill_loss(const InterDepthSet& student,
                                    const InterDepthSet& teacher, double beta,
                                    bool detach_u);

namespace detail {
/// Row-blocked evaluation used above the materialization limit; exposed so
/// tests can force it on small inputs and assert bit-equality.
LossResult structure_distill_loss_blocked(const FeaturePyramid& student,
                                          const FeaturePyramid& teacher,
                                          std::size_t materialize_limit);
}  // namespace detail

}  // namespace rcdepth
