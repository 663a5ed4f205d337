#include "rcdepth/toy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rcdepth/format.hpp"
#include "rcdepth/rng.hpp"
#include "rcdepth/uncertainty.hpp"

namespace rcdepth {

namespace {

constexpr std::uint64_t kSceneSeedSalt = 0x5ce9e5eed0000000ull;
constexpr std::uint64_t kTeacherSeed = 0x7eac4e80ull;
constexpr std::uint64_t kStudentSeedSalt = 0x57de9100ull;
constexpr std::uint64_t kLpgNoiseSalt = 0x19f60000ull;
constexpr std::uint64_t kEvalSceneOffset = 10000;

constexpr double kSceneBlock = 8.0;        // depth block edge in pixels
constexpr double kRadarDensity = 0.03;     // fraction of radar hits
constexpr double kSparseDensity = 0.015;   // fraction of sparse gt samples
constexpr double kLpgNoiseSigma = 0.3;     // meters
constexpr double kTeacherDepthSigma = 0.1; // meters
constexpr double kDepthScale = 40.0;       // head output: kDepthScale*softplus(pre)
constexpr double kHeadBiasInit = 0.5;      // 40*softplus(0.5) ~ 39 m start

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// y(p, :) = x(p, :) * W + b over pixels; W is C_in x C_out.
Tensor linear_pre(const Tensor& x, const Tensor& w, const Tensor* bias) {
    const std::size_t h = x.extent(0), wd = x.extent(1);
    const std::size_t cin = x.extent(2), cout = w.extent(1);
    if (w.extent(0) != cin) {
        throw ShapeError("linear: weight rows do not match input channels");
    }
    Tensor y({h, wd, cout});
    const std::size_t pixels = h * wd;
    for (std::size_t p = 0; p < pixels; ++p) {
        for (std::size_t co = 0; co < cout; ++co) {
            double acc = bias ? (*bias)[co] : 0.0;
            for (std::size_t ci = 0; ci < cin; ++ci) {
                acc += x[p * cin + ci] * w.at(ci, co);
            }
            y[p * cout + co] = acc;
        }
    }
    return y;
}

Tensor relu(const Tensor& pre) {
    Tensor y(pre.shape());
    for (std::size_t i = 0; i < pre.size(); ++i) y[i] = std::max(pre[i], 0.0);
    return y;
}

// Depth heads emit kDepthScale * softplus(pre): strictly positive, and the
// pre-activation stays O(1) across the whole 1-80 m range instead of pushing
// softplus into its saturated tails.
Tensor depth_head_map(const Tensor& pre) {
    Tensor y(pre.shape());
    for (std::size_t i = 0; i < pre.size(); ++i) {
        y[i] = kDepthScale * softplus(pre[i]);
    }
    return y;
}

// d(upstream)/d(small map): sums the upstream gradient over each block.
Tensor upsample_backward(const Tensor& upstream, std::size_t factor) {
    const std::size_t h = upstream.extent(0) / factor;
    const std::size_t w = upstream.extent(1) / factor;
    const std::size_t c = upstream.extent(2);
    Tensor g({h, w, c});
    for (std::size_t y = 0; y < upstream.extent(0); ++y) {
        for (std::size_t x = 0; x < upstream.extent(1); ++x) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                g.at(y / factor, x / factor, ch) += upstream.at(y, x, ch);
            }
        }
    }
    return g;
}

// Accumulates weight/bias gradients and returns the input gradient.
Tensor linear_backward(const Tensor& x, const Tensor& w, const Tensor& d_pre,
                       Tensor& d_w, Tensor* d_bias) {
    const std::size_t pixels = x.extent(0) * x.extent(1);
    const std::size_t cin = x.extent(2), cout = w.extent(1);
    Tensor d_x(x.shape());
    for (std::size_t p = 0; p < pixels; ++p) {
        for (std::size_t co = 0; co < cout; ++co) {
            const double g = d_pre[p * cout + co];
            if (d_bias) (*d_bias)[co] += g;
            for (std::size_t ci = 0; ci < cin; ++ci) {
                d_w.at(ci, co) += x[p * cin + ci] * g;
                d_x[p * cin + ci] += g * w.at(ci, co);
            }
        }
    }
    return d_x;
}

Tensor relu_backward(const Tensor& pre, const Tensor& d_act) {
    Tensor d_pre(pre.shape());
    for (std::size_t i = 0; i < pre.size(); ++i) {
        d_pre[i] = pre[i] > 0.0 ? d_act[i] : 0.0;
    }
    return d_pre;
}

Tensor depth_head_backward(const Tensor& pre, const Tensor& d_act) {
    Tensor d_pre(pre.shape());
    for (std::size_t i = 0; i < pre.size(); ++i) {
        d_pre[i] = d_act[i] * kDepthScale * sigmoid(pre[i]);
    }
    return d_pre;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    const std::size_t h = a.extent(0), w = a.extent(1);
    const std::size_t ca = a.extent(2), cb = b.extent(2);
    Tensor out({h, w, ca + cb});
    for (std::size_t p = 0; p < h * w; ++p) {
        for (std::size_t c = 0; c < ca; ++c) out[p * (ca + cb) + c] = a[p * ca + c];
        for (std::size_t c = 0; c < cb; ++c) {
            out[p * (ca + cb) + ca + c] = b[p * cb + c];
        }
    }
    return out;
}

void split_channels(const Tensor& d_concat, Tensor& d_a, Tensor& d_b) {
    const std::size_t ca = d_a.extent(2), cb = d_b.extent(2);
    const std::size_t pixels = d_a.extent(0) * d_a.extent(1);
    for (std::size_t p = 0; p < pixels; ++p) {
        for (std::size_t c = 0; c < ca; ++c) {
            d_a[p * ca + c] += d_concat[p * (ca + cb) + c];
        }
        for (std::size_t c = 0; c < cb; ++c) {
            d_b[p * cb + c] += d_concat[p * (ca + cb) + ca + c];
        }
    }
}

Tensor random_weights(Rng& rng, std::size_t cin, std::size_t cout) {
    Tensor w({cin, cout});
    const double scale = 1.0 / std::sqrt(static_cast<double>(cin));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = scale * rng.normal();
    return w;
}

LinearLayer random_layer(Rng& rng, std::size_t cin, std::size_t cout,
                         double bias_value) {
    LinearLayer l{random_weights(rng, cin, cout), Tensor({cout})};
    for (std::size_t i = 0; i < cout; ++i) l.bias[i] = bias_value;
    return l;
}

// Scale factor of pyramid level i (0-based): 2, 4, 8, 16, 32.
std::size_t level_factor(std::size_t i) { return std::size_t{2} << i; }

std::vector<std::size_t> pick_distinct(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.index(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace

Scene gen_scene(std::uint64_t seed, std::size_t h, std::size_t w) {
    if (h == 0 || w == 0 || h % 32 != 0 || w % 32 != 0) {
        throw ArgumentError("scene dims must be positive multiples of 32");
    }
    Rng rng(seed ^ kSceneSeedSalt);
    Scene scene;
    scene.seed = seed;

    // Piecewise-constant depth blocks.
    const auto block = static_cast<std::size_t>(kSceneBlock);
    const std::size_t bh = h / block, bw = w / block;
    std::vector<double> block_depth(bh * bw);
    for (double& d : block_depth) {
        d = rng.uniform(kMinSceneDepth, kMaxSceneDepth);
    }
    scene.gt_dense = Tensor({h, w, 1});
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            scene.gt_dense.at(y, x, 0) = block_depth[(y / block) * bw + x / block];
        }
    }

    // Appearance: channels 0 and 2 are two views of depth with independent
    // noise (combining them is the denoising skill worth learning), channel
    // 1 is a block texture uncorrelated with depth values.
    std::vector<double> texture(bh * bw);
    for (double& t : texture) t = rng.uniform(0.0, 1.0);
    scene.image_feat = Tensor({h, w, kImageChannels});
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double depth = scene.gt_dense.at(y, x, 0);
            scene.image_feat.at(y, x, 0) =
                depth / kMaxSceneDepth + 0.05 * rng.normal();
            scene.image_feat.at(y, x, 1) =
                texture[(y / block) * bw + x / block] + 0.1 * rng.normal();
            scene.image_feat.at(y, x, 2) =
                depth / kMaxSceneDepth + 0.1 * rng.normal();
        }
    }

    // Sparse radar hits: noisy range plus a hit indicator.
    const std::size_t pixels = h * w;
    const auto n_radar =
        static_cast<std::size_t>(kRadarDensity * static_cast<double>(pixels));
    scene.radar_feat = Tensor({h, w, kRadarChannels});
    for (std::size_t p : pick_distinct(rng, pixels, n_radar)) {
        scene.radar_feat[p * kRadarChannels + 0] =
            scene.gt_dense[p] / kMaxSceneDepth + 0.02 * rng.normal();
        scene.radar_feat[p * kRadarChannels + 1] = 1.0;
    }

    // Sparse ground truth: an exact subsample of the dense map.
    const auto n_sparse =
        static_cast<std::size_t>(kSparseDensity * static_cast<double>(pixels));
    scene.gt_sparse = Tensor({h, w, 1});
    for (std::size_t p : pick_distinct(rng, pixels, n_sparse)) {
        scene.gt_sparse[p] = scene.gt_dense[p];
    }
    return scene;
}

Tensor channel_project(const Tensor& f, const Tensor& weights) {
    if (f.rank() != 3 || weights.rank() != 2) {
        throw ShapeError("channel_project expects H x W x C_in and C_in x C_out");
    }
    return relu(linear_pre(f, weights, nullptr));
}

ChannelProjectGrads channel_project_grad(const Tensor& f, const Tensor& weights,
                                         const Tensor& upstream) {
    const Tensor pre = linear_pre(f, weights, nullptr);
    require_same_shape(pre, upstream, "channel_project_grad upstream");
    const Tensor d_pre = relu_backward(pre, upstream);
    ChannelProjectGrads g{Tensor(f.shape()), Tensor(weights.shape())};
    g.d_input = linear_backward(f, weights, d_pre, g.d_weights, nullptr);
    return g;
}

ToyProfile ToyProfile::standard() {
    return ToyProfile{{3, 4, 6, 8, 12}, {32, 48, 64, 96, 128}};
}

ToyProfile ToyProfile::compact() {
    return ToyProfile{{2, 2, 2, 3, 3}, {8, 12, 16, 24, 32}};
}

std::size_t ToyModel::param_count() const {
    std::size_t n = 0;
    for (const Tensor* t : parameters()) n += t->size();
    return n;
}

std::vector<Tensor*> ToyModel::parameters() {
    std::vector<Tensor*> out;
    for (auto& l : enc_cam) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    for (auto& l : enc_rad) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    for (auto& t : proj_cam) out.push_back(&t);
    for (auto& t : proj_rad) out.push_back(&t);
    for (auto& l : dec_mix) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    for (auto& t : proj_dec) out.push_back(&t);
    for (auto& l : inter_head) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    out.push_back(&final_head.weight);
    out.push_back(&final_head.bias);
    return out;
}

std::vector<const Tensor*> ToyModel::parameters() const {
    auto mut = const_cast<ToyModel*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

std::size_t ToyTeacher::param_count() const {
    std::size_t n = 0;
    for (const auto& l : enc_cam) n += l.weight.size() + l.bias.size();
    for (const auto& l : enc_rad) n += l.weight.size() + l.bias.size();
    for (const auto& l : dec) n += l.weight.size() + l.bias.size();
    return n;
}

ToyModel make_student(const ToyProfile& profile, std::uint64_t seed) {
    Rng rng(seed ^ kStudentSeedSalt);
    ToyModel m;
    m.profile = profile;
    for (std::size_t i = 0; i < 5; ++i) {
        const std::size_t s = profile.student_channels[i];
        const std::size_t t = profile.teacher_channels[i];
        m.enc_cam[i] = random_layer(rng, kImageChannels, s, 0.1);
        m.enc_rad[i] = random_layer(rng, kRadarChannels, s, 0.1);
        m.proj_cam[i] = random_weights(rng, s, t);
        m.proj_rad[i] = random_weights(rng, s, t);
        m.dec_mix[i] = random_layer(rng, 2 * s, s, 0.1);
        m.proj_dec[i] = random_weights(rng, s, t);
    }
    // Heads read decoder levels 3, 2, 1 (scales 1/8, 1/4, 1/2).
    for (std::size_t j = 0; j < 3; ++j) {
        const std::size_t s = profile.student_channels[2 - j];
        m.inter_head[j] = random_layer(rng, s, 1, kHeadBiasInit);
    }
    m.final_head = random_layer(rng, profile.student_channels[0], 1, kHeadBiasInit);
    return m;
}

ToyTeacher make_teacher(const ToyProfile& profile) {
    Rng rng(kTeacherSeed);
    ToyTeacher t;
    t.profile = profile;
    for (std::size_t i = 0; i < 5; ++i) {
        const std::size_t c = profile.teacher_channels[i];
        t.enc_cam[i] = random_layer(rng, kImageChannels, c, 0.1);
        t.enc_rad[i] = random_layer(rng, kRadarChannels, c, 0.1);
        t.dec[i] = random_layer(rng, 2 * c + 1, c, 0.1);
    }
    return t;
}

TeacherOutput teacher_forward(const ToyTeacher& teacher, const Scene& scene) {
    TeacherOutput out;
    out.camera.role = FeaturePyramid::Role::camera;
    out.radar.role = FeaturePyramid::Role::radar;
    out.decoder.role = FeaturePyramid::Role::decoder;

    // The teacher stands in for a strong trained network: its encoders run
    // on refined inputs (the noise-free depth appearance, and radar densified
    // to full coverage with a hit-density channel), so its features carry
    // cleaner scene structure than the raw inputs the student sees.
    const std::size_t h = scene.image_feat.extent(0);
    const std::size_t w = scene.image_feat.extent(1);
    Tensor cam_clean({h, w, kImageChannels});
    Tensor rad_clean({h, w, kRadarChannels});
    for (std::size_t p = 0; p < h * w; ++p) {
        const double d = scene.gt_dense[p] / kMaxSceneDepth;
        cam_clean[p * kImageChannels + 0] = d;
        cam_clean[p * kImageChannels + 1] =
            scene.image_feat[p * kImageChannels + 1];
        cam_clean[p * kImageChannels + 2] = d;
        rad_clean[p * kRadarChannels + 0] = d;
        rad_clean[p * kRadarChannels + 1] =
            scene.radar_feat[p * kRadarChannels + 1];
    }

    for (std::size_t i = 0; i < 5; ++i) {
        const std::size_t f = level_factor(i);
        const Tensor cam_ds = block_average(cam_clean, f);
        const Tensor rad_ds = block_average(rad_clean, f);
        out.camera.levels[i] =
            relu(linear_pre(cam_ds, teacher.enc_cam[i].weight,
                            &teacher.enc_cam[i].bias));
        out.radar.levels[i] = relu(linear_pre(rad_ds, teacher.enc_rad[i].weight,
                                              &teacher.enc_rad[i].bias));
        const Tensor depth_ds =
            scale(block_average(scene.gt_dense, f), 1.0 / kMaxSceneDepth);
        const Tensor dec_in =
            concat_channels(concat_channels(out.camera.levels[i],
                                            out.radar.levels[i]),
                            depth_ds);
        out.decoder.levels[i] =
            relu(linear_pre(dec_in, teacher.dec[i].weight, &teacher.dec[i].bias));
    }

    // LPG-style targets: block-smoothed depth with mild noise, replicated
    // back to full resolution.
    Rng noise(scene.seed ^ kLpgNoiseSalt);
    for (std::size_t j = 0; j < 3; ++j) {
        const std::size_t k = out.lpg.scales[j];
        Tensor small = block_average(scene.gt_dense, k);
        for (std::size_t i = 0; i < small.size(); ++i) {
            small[i] = std::max(small[i] + kLpgNoiseSigma * noise.normal(), 0.05);
        }
        out.lpg.maps[j] = nearest_upsample(small, k);
    }

    Tensor depth_small = block_average(scene.gt_dense, 2);
    for (std::size_t i = 0; i < depth_small.size(); ++i) {
        depth_small[i] =
            std::max(depth_small[i] + kTeacherDepthSigma * noise.normal(), 0.05);
    }
    out.depth = nearest_upsample(depth_small, 2);
    return out;
}

namespace detail {

StudentOutput student_forward_traced(const ToyModel& model, const Scene& scene,
                                     StudentTrace& trace) {
    StudentOutput out;
    out.camera.role = FeaturePyramid::Role::camera;
    out.radar.role = FeaturePyramid::Role::radar;
    out.decoder.role = FeaturePyramid::Role::decoder;

    for (std::size_t i = 0; i < 5; ++i) {
        const std::size_t f = level_factor(i);
        trace.cam_ds[i] = block_average(scene.image_feat, f);
        trace.rad_ds[i] = block_average(scene.radar_feat, f);
        trace.cam_pre[i] =
            linear_pre(trace.cam_ds[i], model.enc_cam[i].weight,
                       &model.enc_cam[i].bias);
        trace.cam_act[i] = relu(trace.cam_pre[i]);
        trace.rad_pre[i] =
            linear_pre(trace.rad_ds[i], model.enc_rad[i].weight,
                       &model.enc_rad[i].bias);
        trace.rad_act[i] = relu(trace.rad_pre[i]);

        trace.pcam_pre[i] = linear_pre(trace.cam_act[i], model.proj_cam[i], nullptr);
        out.camera.levels[i] = relu(trace.pcam_pre[i]);
        trace.prad_pre[i] = linear_pre(trace.rad_act[i], model.proj_rad[i], nullptr);
        out.radar.levels[i] = relu(trace.prad_pre[i]);

        trace.mix_in[i] = concat_channels(trace.cam_act[i], trace.rad_act[i]);
        trace.dec_pre[i] = linear_pre(trace.mix_in[i], model.dec_mix[i].weight,
                                      &model.dec_mix[i].bias);
        trace.dec_act[i] = relu(trace.dec_pre[i]);
        trace.pdec_pre[i] = linear_pre(trace.dec_act[i], model.proj_dec[i], nullptr);
        out.decoder.levels[i] = relu(trace.pdec_pre[i]);
    }

    for (std::size_t j = 0; j < 3; ++j) {
        const std::size_t level = 2 - j;  // k = 8, 4, 2
        trace.ih_pre[j] = linear_pre(trace.dec_act[level],
                                     model.inter_head[j].weight,
                                     &model.inter_head[j].bias);
        trace.ih_sp[j] = depth_head_map(trace.ih_pre[j]);
        out.inter.maps[j] = nearest_upsample(trace.ih_sp[j], out.inter.scales[j]);
    }

    trace.fh_pre = linear_pre(trace.dec_act[0], model.final_head.weight,
                              &model.final_head.bias);
    trace.depth_half = depth_head_map(trace.fh_pre);
    out.depth = nearest_upsample(trace.depth_half, 2);
    return out;
}

ParamGrads student_backward(const ToyModel& model, const StudentTrace& trace,
                            const StudentOutputGrads& grads) {
    ParamGrads pg;
    pg.shapes.profile = model.profile;
    for (std::size_t i = 0; i < 5; ++i) {
        pg.shapes.enc_cam[i] = {Tensor(model.enc_cam[i].weight.shape()),
                                Tensor(model.enc_cam[i].bias.shape())};
        pg.shapes.enc_rad[i] = {Tensor(model.enc_rad[i].weight.shape()),
                                Tensor(model.enc_rad[i].bias.shape())};
        pg.shapes.proj_cam[i] = Tensor(model.proj_cam[i].shape());
        pg.shapes.proj_rad[i] = Tensor(model.proj_rad[i].shape());
        pg.shapes.dec_mix[i] = {Tensor(model.dec_mix[i].weight.shape()),
                                Tensor(model.dec_mix[i].bias.shape())};
        pg.shapes.proj_dec[i] = Tensor(model.proj_dec[i].shape());
    }
    for (std::size_t j = 0; j < 3; ++j) {
        pg.shapes.inter_head[j] = {Tensor(model.inter_head[j].weight.shape()),
                                   Tensor(model.inter_head[j].bias.shape())};
    }
    pg.shapes.final_head = {Tensor(model.final_head.weight.shape()),
                            Tensor(model.final_head.bias.shape())};

    std::array<Tensor, 5> d_dec_act, d_cam_act, d_rad_act;
    for (std::size_t i = 0; i < 5; ++i) {
        d_dec_act[i] = Tensor(trace.dec_act[i].shape());
        d_cam_act[i] = Tensor(trace.cam_act[i].shape());
        d_rad_act[i] = Tensor(trace.rad_act[i].shape());
    }

    // Final depth head.
    if (grads.d_depth.size() > 0) {
        const Tensor d_half = upsample_backward(grads.d_depth, 2);
        const Tensor d_pre = depth_head_backward(trace.fh_pre, d_half);
        const Tensor d_in =
            linear_backward(trace.dec_act[0], model.final_head.weight, d_pre,
                            pg.shapes.final_head.weight,
                            &pg.shapes.final_head.bias);
        for (std::size_t e = 0; e < d_in.size(); ++e) d_dec_act[0][e] += d_in[e];
    }

    // Inter-depth heads.
    for (std::size_t j = 0; j < 3; ++j) {
        if (grads.d_inter[j].size() == 0) continue;
        const std::size_t level = 2 - j;
        const std::size_t k = std::size_t{8} >> j;
        const Tensor d_sp = upsample_backward(grads.d_inter[j], k);
        const Tensor d_pre = depth_head_backward(trace.ih_pre[j], d_sp);
        const Tensor d_in =
            linear_backward(trace.dec_act[level], model.inter_head[j].weight,
                            d_pre, pg.shapes.inter_head[j].weight,
                            &pg.shapes.inter_head[j].bias);
        for (std::size_t e = 0; e < d_in.size(); ++e) {
            d_dec_act[level][e] += d_in[e];
        }
    }

    // Decoder affinity projections, then decoder mixing.
    for (std::size_t i = 0; i < 5; ++i) {
        if (grads.d_decoder[i].size() > 0) {
            const Tensor d_pre =
                relu_backward(trace.pdec_pre[i], grads.d_decoder[i]);
            const Tensor d_in =
                linear_backward(trace.dec_act[i], model.proj_dec[i], d_pre,
                                pg.shapes.proj_dec[i], nullptr);
            for (std::size_t e = 0; e < d_in.size(); ++e) {
                d_dec_act[i][e] += d_in[e];
            }
        }
        const Tensor d_pre = relu_backward(trace.dec_pre[i], d_dec_act[i]);
        const Tensor d_mix_in =
            linear_backward(trace.mix_in[i], model.dec_mix[i].weight, d_pre,
                            pg.shapes.dec_mix[i].weight,
                            &pg.shapes.dec_mix[i].bias);
        split_channels(d_mix_in, d_cam_act[i], d_rad_act[i]);
    }

    // Modality affinity projections, then encoders.
    for (std::size_t i = 0; i < 5; ++i) {
        if (grads.d_camera[i].size() > 0) {
            const Tensor d_pre =
                relu_backward(trace.pcam_pre[i], grads.d_camera[i]);
            const Tensor d_in =
                linear_backward(trace.cam_act[i], model.proj_cam[i], d_pre,
                                pg.shapes.proj_cam[i], nullptr);
            for (std::size_t e = 0; e < d_in.size(); ++e) {
                d_cam_act[i][e] += d_in[e];
            }
        }
        if (grads.d_radar[i].size() > 0) {
            const Tensor d_pre =
                relu_backward(trace.prad_pre[i], grads.d_radar[i]);
            const Tensor d_in =
                linear_backward(trace.rad_act[i], model.proj_rad[i], d_pre,
                                pg.shapes.proj_rad[i], nullptr);
            for (std::size_t e = 0; e < d_in.size(); ++e) {
                d_rad_act[i][e] += d_in[e];
            }
        }
        const Tensor d_cam_pre = relu_backward(trace.cam_pre[i], d_cam_act[i]);
        linear_backward(trace.cam_ds[i], model.enc_cam[i].weight, d_cam_pre,
                        pg.shapes.enc_cam[i].weight, &pg.shapes.enc_cam[i].bias);
        const Tensor d_rad_pre = relu_backward(trace.rad_pre[i], d_rad_act[i]);
        linear_backward(trace.rad_ds[i], model.enc_rad[i].weight, d_rad_pre,
                        pg.shapes.enc_rad[i].weight, &pg.shapes.enc_rad[i].bias);
    }
    return pg;
}

double min_preactivation_margin(const StudentTrace& trace) {
    double m = std::numeric_limits<double>::infinity();
    auto scan = [&m](const Tensor& pre) {
        for (std::size_t i = 0; i < pre.size(); ++i) {
            // Exactly-zero pre-activations are structural (a bias-free
            // projection of an all-dead pixel) and stay pinned at zero under
            // finite-difference steps; they are not kink risks.
            if (pre[i] == 0.0) continue;
            m = std::min(m, std::fabs(pre[i]));
        }
    };
    for (std::size_t i = 0; i < 5; ++i) {
        scan(trace.cam_pre[i]);
        scan(trace.rad_pre[i]);
        scan(trace.pcam_pre[i]);
        scan(trace.prad_pre[i]);
        scan(trace.dec_pre[i]);
        scan(trace.pdec_pre[i]);
    }
    return m;
}

}  // namespace detail

StudentOutput student_forward(const ToyModel& model, const Scene& scene) {
    detail::StudentTrace trace;
    return detail::student_forward_traced(model, scene, trace);
}

namespace {

struct SceneBundle {
    Scene scene;
    TeacherOutput teacher;
};

struct StepLosses {
    LossResult depth, kd_image, kd_radar, kd_decoder, kd_depth;
};

// Forward + all enabled losses for one scene. Disabled terms stay zero.
StepLosses compute_losses(const ToyModel& model, const SceneBundle& bundle,
                          const TrainConfig& cfg, detail::StudentTrace& trace,
                          StudentOutput& out) {
    out = detail::student_forward_traced(model, bundle.scene, trace);
    StepLosses losses;
    losses.depth = urdl(out.depth, bundle.scene.gt_dense, bundle.scene.gt_sparse,
                        cfg.beta, cfg.detach_u);
    if (cfg.kd_enabled[0]) {
        losses.kd_image = feature_l1_pyramid(out.camera, bundle.teacher.camera);
    }
    if (cfg.kd_enabled[1]) {
        losses.kd_radar = feature_l1_pyramid(out.radar, bundle.teacher.radar);
    }
    if (cfg.kd_enabled[2]) {
        losses.kd_decoder =
            structure_distill_loss(out.decoder, bundle.teacher.decoder);
    }
    if (cfg.kd_enabled[3]) {
        losses.kd_depth = inter_depth_distill_loss(out.inter, bundle.teacher.lpg,
                                                   cfg.beta, cfg.detach_u);
    }
    return losses;
}

LossWeights effective_gamma(const TrainConfig& cfg) {
    LossWeights w = cfg.gamma;
    for (std::size_t j = 0; j < 4; ++j) {
        if (!cfg.kd_enabled[j]) w.gamma[j] = 0.0;
    }
    return w;
}

EvalReport evaluate_student(const ToyModel& model,
                            const std::vector<Scene>& eval_scenes, double cap) {
    std::vector<EvalReport> reports;
    reports.reserve(eval_scenes.size());
    for (const Scene& s : eval_scenes) {
        const StudentOutput out = student_forward(model, s);
        reports.push_back(evaluate(out.depth, s.gt_dense, cap));
    }
    return aggregate(reports);
}

}  // namespace

TrainingHistory train(const TrainConfig& config) {
    if (config.steps < 1) throw ArgumentError("steps must be >= 1");
    if (!(config.lr > 0.0)) throw ArgumentError("lr must be > 0");
    if (config.train_scenes < 1 || config.eval_scenes < 1) {
        throw ArgumentError("train/eval scene counts must be >= 1");
    }
    config.gamma.validate();

    const ToyTeacher teacher = make_teacher(config.profile);
    ToyModel model = make_student(config.profile, config.seed);

    std::vector<SceneBundle> train_set;
    for (std::size_t j = 0; j < config.train_scenes; ++j) {
        SceneBundle b;
        b.scene = gen_scene(config.seed + j, config.height, config.width);
        b.teacher = teacher_forward(teacher, b.scene);
        train_set.push_back(std::move(b));
    }
    std::vector<Scene> eval_scenes;
    for (std::size_t j = 0; j < config.eval_scenes; ++j) {
        eval_scenes.push_back(gen_scene(config.seed + kEvalSceneOffset + j,
                                        config.height, config.width));
    }

    const LossWeights gamma = effective_gamma(config);
    const double inv_scenes = 1.0 / static_cast<double>(train_set.size());

    TrainingHistory history;
    history.config = config;
    history.student_params = model.param_count();
    history.teacher_params = teacher.param_count();

    std::vector<Tensor*> params = model.parameters();
    for (std::size_t step = 1; step <= config.steps; ++step) {
        StepRecord rec;
        rec.step = step;
        std::vector<Tensor> accum;  // parameter gradients, model order

        for (const SceneBundle& bundle : train_set) {
            detail::StudentTrace trace;
            StudentOutput out;
            const StepLosses losses =
                compute_losses(model, bundle, config, trace, out);
            const LossResult total =
                total_loss(losses.depth, losses.kd_image, losses.kd_radar,
                           losses.kd_decoder, losses.kd_depth, gamma);
            if (!std::isfinite(total.value)) {
                throw DivergenceError(step, "training diverged at step " +
                                                std::to_string(step));
            }
            rec.total += inv_scenes * total.value;
            rec.depth += inv_scenes * losses.depth.value;
            rec.kd_image += inv_scenes * gamma.gamma[0] * losses.kd_image.value;
            rec.kd_radar += inv_scenes * gamma.gamma[1] * losses.kd_radar.value;
            rec.kd_decoder +=
                inv_scenes * gamma.gamma[2] * losses.kd_decoder.value;
            rec.kd_depth += inv_scenes * gamma.gamma[3] * losses.kd_depth.value;

            StudentOutputGrads out_grads;
            out_grads.d_depth = losses.depth.grads[0];
            if (config.kd_enabled[0] && gamma.gamma[0] != 0.0) {
                for (std::size_t i = 0; i < 5; ++i) {
                    out_grads.d_camera[i] =
                        scale(losses.kd_image.grads[i], gamma.gamma[0]);
                }
            }
            if (config.kd_enabled[1] && gamma.gamma[1] != 0.0) {
                for (std::size_t i = 0; i < 5; ++i) {
                    out_grads.d_radar[i] =
                        scale(losses.kd_radar.grads[i], gamma.gamma[1]);
                }
            }
            if (config.kd_enabled[2] && gamma.gamma[2] != 0.0) {
                for (std::size_t i = 0; i < 5; ++i) {
                    out_grads.d_decoder[i] =
                        scale(losses.kd_decoder.grads[i], gamma.gamma[2]);
                }
            }
            if (config.kd_enabled[3] && gamma.gamma[3] != 0.0) {
                for (std::size_t i = 0; i < 3; ++i) {
                    out_grads.d_inter[i] =
                        scale(losses.kd_depth.grads[i], gamma.gamma[3]);
                }
            }

            detail::ParamGrads pg =
                detail::student_backward(model, trace, out_grads);
            std::vector<Tensor*> gs = pg.parameters();
            if (accum.empty()) {
                accum.reserve(gs.size());
                for (Tensor* g : gs) accum.push_back(scale(*g, inv_scenes));
            } else {
                for (std::size_t k = 0; k < gs.size(); ++k) {
                    for (std::size_t e = 0; e < gs[k]->size(); ++e) {
                        accum[k][e] += inv_scenes * (*gs[k])[e];
                    }
                }
            }
        }

        for (std::size_t k = 0; k < params.size(); ++k) {
            for (std::size_t e = 0; e < params[k]->size(); ++e) {
                (*params[k])[e] -= config.lr * accum[k][e];
            }
        }
        history.steps.push_back(rec);

        if (step % config.eval_every == 0 || step == config.steps) {
            history.evals.push_back(
                {step, evaluate_student(model, eval_scenes, config.eval_cap)});
        }
    }
    return history;
}

namespace {

void write_eval_line(std::ostream& out, const char* tag, std::size_t step,
                     const EvalReport& r) {
    out << tag << " step=" << step << " cap=" << format_double(r.cap)
        << " n_valid=" << r.n_valid << " mae=" << format_double(r.mae)
        << " rmse=" << format_double(r.rmse)
        << " absrel=" << format_double(r.absrel)
        << " log10=" << format_double(r.log10)
        << " rmselog=" << format_double(r.rmselog)
        << " delta1=" << format_double(r.delta1)
        << " delta2=" << format_double(r.delta2)
        << " delta3=" << format_double(r.delta3) << "\n";
}

}  // namespace

void write_history(std::ostream& out, const TrainingHistory& history) {
    const TrainConfig& c = history.config;
    out << "# rcdepth demo history v1\n";
    out << "config steps=" << c.steps << " lr=" << format_double(c.lr)
        << " beta=" << format_double(c.beta)
        << " detach_u=" << (c.detach_u ? 1 : 0) << " height=" << c.height
        << " width=" << c.width << " seed=" << c.seed
        << " train_scenes=" << c.train_scenes
        << " eval_scenes=" << c.eval_scenes << " eval_every=" << c.eval_every
        << " eval_cap=" << format_double(c.eval_cap) << " gamma="
        << format_double(c.gamma.gamma[0]) << ","
        << format_double(c.gamma.gamma[1]) << ","
        << format_double(c.gamma.gamma[2]) << ","
        << format_double(c.gamma.gamma[3]) << " kd=" << c.kd_enabled[0]
        << "," << c.kd_enabled[1] << "," << c.kd_enabled[2] << ","
        << c.kd_enabled[3] << "\n";
    out << "params student=" << history.student_params
        << " teacher=" << history.teacher_params << "\n";

    std::size_t next_eval = 0;
    for (const StepRecord& s : history.steps) {
        out << "step=" << s.step << " total=" << format_double(s.total)
            << " depth=" << format_double(s.depth)
            << " kd_image=" << format_double(s.kd_image)
            << " kd_radar=" << format_double(s.kd_radar)
            << " kd_decoder=" << format_double(s.kd_decoder)
            << " kd_depth=" << format_double(s.kd_depth) << "\n";
        while (next_eval < history.evals.size() &&
               history.evals[next_eval].step == s.step) {
            write_eval_line(out, "eval", history.evals[next_eval].step,
                            history.evals[next_eval].report);
            ++next_eval;
        }
    }
}

std::string history_to_string(const TrainingHistory& history) {
    std::ostringstream ss;
    write_history(ss, history);
    return ss.str();
}

}  // namespace rcdepth
