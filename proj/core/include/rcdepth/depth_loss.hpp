#pragma once

#include <array>

#include "rcdepth/gradcheck.hpp"
#include "rcdepth/loss_result.hpp"
#include "rcdepth/tensor.hpp"

namespace rcdepth {

/// Predictions on valid pixels are clamped to at least this value so the
/// uncertainty ratio stays defined; clamps are reported on stderr.
inline constexpr double kPredClampFloor = 1e-6;

/// Weight factors for the four distillation terms of the total objective,
/// in order: image features, radar features, decoder structure, depth maps.
/// A weight of 0 disables its term exactly.
struct LossWeights {
    std::array<double, 4> gamma{1.0, 1.0, 1.0, 1.0};

    /// Throws ArgumentError unless every weight is finite and >= 0.
    void validate() const;
};

/// Uncertainty-rectified depth loss over dual supervision:
///   loss = (1/|Od|) sum_{p in Od} w_d(p) |dense(p) - pred(p)|
///        + (1/|Os|) sum_{p in Os} w_s(p) |sparse(p) - pred(p)|
/// where Od/Os are the nonzero pixels of each map and (w_d, w_s) are the
/// softmax-rectified uncertainties of pred against each source. An empty Od
/// or Os drops its term; both empty is an error. grads = {d(loss)/d(pred)},
/// with the rectified weights treated as constants unless detach_u is false.
LossResult urdl(const Tensor& pred, const Tensor& dense, const Tensor& sparse,
                double beta, bool detach_u);

/// Total training objective:
///   total = depth + g1*kd_image + g2*kd_radar + g3*kd_decoder + g4*kd_depth.
/// grads concatenates the component gradients in argument order, each scaled
/// by its weight (depth by 1). Throws NonFiniteError naming the first
/// non-finite component.
LossResult total_loss(const LossResult& depth, const LossResult& kd_image,
                      const LossResult& kd_radar, const LossResult& kd_decoder,
                      const LossResult& kd_depth, const LossWeights& weights);

/// Compares the analytic urdl gradient against central finite differences on
/// random small maps; convenience wrapper over the gradcheck harness.
GradReport urdl_grad_check(std::uint64_t seed);

}  // namespace rcdepth
