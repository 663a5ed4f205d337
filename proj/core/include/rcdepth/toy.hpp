#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcdepth/depth_loss.hpp"
#include "rcdepth/distill.hpp"
#include "rcdepth/metrics.hpp"
#include "rcdepth/tensor.hpp"

namespace rcdepth {

inline constexpr std::size_t kImageChannels = 3;
inline constexpr std::size_t kRadarChannels = 2;
inline constexpr double kMinSceneDepth = 1.0;
inline constexpr double kMaxSceneDepth = 80.0;

/// A synthetic desk-scale frame. Image channel 0 correlates with depth the
/// way appearance does in real footage; radar hits are sparse range samples.
struct Scene {
    Tensor image_feat;  // H x W x 3
    Tensor radar_feat;  // H x W x 2, nonzero at <= 5% of pixels
    Tensor gt_dense;    // H x W x 1, piecewise-constant blocks in [1, 80] m
    Tensor gt_sparse;   // H x W x 1, <= 2% subsample of gt_dense
    std::uint64_t seed = 0;
};

/// Deterministic per seed. h and w must be positive multiples of 32 so the
/// five pyramid halvings stay exact.
Scene gen_scene(std::uint64_t seed, std::size_t h, std::size_t w);

/// Per-pixel linear channel projection followed by ReLU (the affinity
/// module analog). weights is C_in x C_out.
Tensor channel_project(const Tensor& f, const Tensor& weights);

struct ChannelProjectGrads {
    Tensor d_input;    // H x W x C_in
    Tensor d_weights;  // C_in x C_out
};

/// Backward pass of channel_project for an upstream gradient of the output.
ChannelProjectGrads channel_project_grad(const Tensor& f, const Tensor& weights,
                                         const Tensor& upstream);

/// Channel widths of the student pathway and of the teacher targets,
/// per pyramid level.
struct ToyProfile {
    std::array<std::size_t, 5> student_channels;
    std::array<std::size_t, 5> teacher_channels;

    /// Demo-sized profile used by the CLI.
    static ToyProfile standard();
    /// Small profile sized so exhaustive per-parameter gradient checks
    /// stay fast.
    static ToyProfile compact();
};

struct LinearLayer {
    Tensor weight;  // C_in x C_out
    Tensor bias;    // C_out
};

/// Trainable student. Encoders lift block-averaged inputs to the student
/// widths, affinity projections match them to the teacher widths for
/// distillation, decoder mixing fuses both modalities, and the depth heads
/// map decoder features through softplus so depths stay positive.
struct ToyModel {
    ToyProfile profile{};
    std::array<LinearLayer, 5> enc_cam;  // 3 -> S_i, ReLU
    std::array<LinearLayer, 5> enc_rad;  // 2 -> S_i, ReLU
    std::array<Tensor, 5> proj_cam;      // S_i -> T_i, channel_project
    std::array<Tensor, 5> proj_rad;
    std::array<LinearLayer, 5> dec_mix;  // 2*S_i -> S_i, ReLU
    std::array<Tensor, 5> proj_dec;      // S_i -> T_i, channel_project
    std::array<LinearLayer, 3> inter_head;  // S_{3,2,1} -> 1, softplus; k = 8,4,2
    LinearLayer final_head;                 // S_1 -> 1, softplus

    std::size_t param_count() const;
    /// Stable parameter order shared with gradient containers.
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
};

/// Frozen procedural teacher. Its fixed random weights stand in for a
/// trained network; the decoder also sees the normalized scene depth, so
/// its features genuinely encode scene structure.
struct ToyTeacher {
    ToyProfile profile{};
    std::array<LinearLayer, 5> enc_cam;  // 3 -> T_i, ReLU
    std::array<LinearLayer, 5> enc_rad;  // 2 -> T_i, ReLU
    std::array<LinearLayer, 5> dec;      // (2*T_i + 1) -> T_i, ReLU
    std::size_t param_count() const;
};

ToyModel make_student(const ToyProfile& profile, std::uint64_t seed);
ToyTeacher make_teacher(const ToyProfile& profile);

struct TeacherOutput {
    FeaturePyramid camera;
    FeaturePyramid radar;
    FeaturePyramid decoder;
    InterDepthSet lpg;  // noisy smoothed depth at receptive scales 8, 4, 2
    Tensor depth;       // H x W x 1
};

/// Deterministic per scene; lpg noise is seeded from the scene seed.
TeacherOutput teacher_forward(const ToyTeacher& teacher, const Scene& scene);

struct StudentOutput {
    FeaturePyramid camera;   // after affinity projection, teacher widths
    FeaturePyramid radar;
    FeaturePyramid decoder;
    InterDepthSet inter;
    Tensor depth;  // H x W x 1, strictly positive
};

StudentOutput student_forward(const ToyModel& model, const Scene& scene);

/// Gradient of a scalar loss w.r.t. every student output fed back through
/// the network. Empty tensors mean "no gradient from that head".
struct StudentOutputGrads {
    Tensor d_depth;
    std::array<Tensor, 3> d_inter;
    std::array<Tensor, 5> d_camera;
    std::array<Tensor, 5> d_radar;
    std::array<Tensor, 5> d_decoder;
};

struct TrainConfig {
    std::size_t height = 32;
    std::size_t width = 32;
    std::size_t steps = 240;
    double lr = 0.004;
    double beta = 1.0;
    bool detach_u = true;
    LossWeights gamma{};
    // Enables each distillation term (image, radar, decoder, depth maps);
    // a disabled term contributes exactly nothing, mirroring the ablation
    // grid rows.
    std::array<bool, 4> kd_enabled{true, true, true, true};
    std::uint64_t seed = 0;
    std::size_t train_scenes = 2;
    std::size_t eval_scenes = 2;
    std::size_t eval_every = 40;
    double eval_cap = 80.0;
    ToyProfile profile = ToyProfile::standard();
};

struct StepRecord {
    std::size_t step = 0;
    double total = 0.0;
    double depth = 0.0;
    double kd_image = 0.0;
    double kd_radar = 0.0;
    double kd_decoder = 0.0;
    double kd_depth = 0.0;
};

struct EvalRecord {
    std::size_t step = 0;
    EvalReport report;
};

struct TrainingHistory {
    TrainConfig config;
    std::size_t student_params = 0;
    std::size_t teacher_params = 0;
    std::vector<StepRecord> steps;
    std::vector<EvalRecord> evals;  // periodic plus one at the final step
};

/// Plain full-batch gradient descent on the total objective with analytic
/// gradients; bitwise deterministic per config. Throws DivergenceError with
/// the step index if the loss turns non-finite.
TrainingHistory train(const TrainConfig& config);

/// Line-delimited plain-text history; format documented in the README.
void write_history(std::ostream& out, const TrainingHistory& history);
std::string history_to_string(const TrainingHistory& history);

namespace detail {

/// Forward intermediates needed by the backward pass.
struct StudentTrace;

/// Applies the chain rule through the student network, returning parameter
/// gradients aligned with ToyModel::parameters() order.
struct ParamGrads {
    ToyModel shapes;  // same tensor shapes as the model, holding gradients

    std::vector<Tensor*> parameters() { return shapes.parameters(); }
};

StudentOutput student_forward_traced(const ToyModel& model, const Scene& scene,
                                     StudentTrace& trace);
ParamGrads student_backward(const ToyModel& model, const StudentTrace& trace,
                            const StudentOutputGrads& grads);

/// Smallest |pre-activation| across all ReLU units of the last traced
/// forward; the gradient checker resamples models whose trace sits too
/// close to a kink.
double min_preactivation_margin(const StudentTrace& trace);

struct StudentTrace {
    std::array<Tensor, 5> cam_ds, rad_ds;
    std::array<Tensor, 5> cam_pre, cam_act;
    std::array<Tensor, 5> rad_pre, rad_act;
    std::array<Tensor, 5> pcam_pre;
    std::array<Tensor, 5> prad_pre;
    std::array<Tensor, 5> mix_in, dec_pre, dec_act;
    std::array<Tensor, 5> pdec_pre;
    std::array<Tensor, 3> ih_pre, ih_sp;
    Tensor fh_pre, depth_half;
};

}  // namespace detail

}  // namespace rcdepth
