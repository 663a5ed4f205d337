#include "rcdepth/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rcdepth/depth_loss.hpp"
#include "rcdepth/distill.hpp"
#include "rcdepth/rng.hpp"
#include "rcdepth/toy.hpp"
#include "rcdepth/uncertainty.hpp"

namespace rcdepth {

namespace {

constexpr std::uint64_t kCheckSeedSalt = 0x6badc0dedull;

struct Outcome {
    double max_rel = 0.0;
    double max_abs = 0.0;
    std::size_t n_points = 0;

    void compare(double analytic, double numeric) {
        max_rel = std::max(max_rel, rel_error(analytic, numeric));
        max_abs = std::max(max_abs, std::fabs(analytic - numeric));
        ++n_points;
    }

    // Relative error is meaningless below the finite-difference noise floor
    // (sums over many terms leave ~1e-8 absolute noise in the quotient), so
    // coordinates with gradients under mag_floor are held to an absolute
    // bound instead; a violation is recorded as a hard failure.
    void compare_with_floor(double analytic, double numeric, double mag_floor,
                            double abs_bound) {
        const double abs_diff = std::fabs(analytic - numeric);
        max_abs = std::max(max_abs, abs_diff);
        ++n_points;
        if (std::max(std::fabs(analytic), std::fabs(numeric)) >= mag_floor) {
            max_rel = std::max(max_rel, rel_error(analytic, numeric));
        } else if (abs_diff > abs_bound) {
            max_rel = std::max(max_rel, 1.0);
        }
    }
};

double check_finite(double v) {
    if (!std::isfinite(v)) {
        throw NonFiniteError("finite_diff: function value is not finite");
    }
    return v;
}

// Central difference along a single coordinate.
double fd_at(const std::function<double(const Tensor&)>& fn, Tensor x,
             std::size_t i, double eps) {
    const double orig = x[i];
    x[i] = orig + eps;
    const double f_plus = check_finite(fn(x));
    x[i] = orig - eps;
    const double f_minus = check_finite(fn(x));
    return (f_plus - f_minus) / (2.0 * eps);
}

std::vector<std::size_t> sample_coords(Rng& rng, std::size_t size,
                                       std::size_t quota) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (quota >= size) return idx;
    for (std::size_t i = 0; i < quota; ++i) {
        std::swap(idx[i], idx[i + rng.index(size - i)]);
    }
    idx.resize(quota);
    return idx;
}

// ---- uncertainty (elementwise, Eq. 4 derivative) --------------------------

Outcome check_uncertainty(std::uint64_t seed) {
    Rng rng(seed ^ kCheckSeedSalt);
    Outcome out;
    const double betas[3] = {0.5, 1.0, 2.0};
    for (int trial = 0; trial < 3; ++trial) {
        const double beta = betas[trial];
        Tensor gt({6, 6, 1}), pred({6, 6, 1});
        for (std::size_t i = 0; i < gt.size(); ++i) {
            if (rng.uniform() < 0.1) {
                gt[i] = 0.0;  // invalid pixel, gradient must be 0
                pred[i] = rng.uniform(1.0, 10.0);
            } else {
                gt[i] = rng.uniform(1.0, 50.0);
                const double delta =
                    (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 5.0);
                pred[i] = gt[i] + delta;
                if (pred[i] < 0.1) pred[i] = gt[i] - delta;
            }
        }
        const Tensor analytic = uncertainty_map_grad(pred, gt, beta);
        const auto fn = [&](const Tensor& x) {
            return sum(uncertainty_map(x, gt, beta).values);
        };
        const Tensor numeric = finite_diff(fn, pred, kFiniteDiffEps);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            out.compare(analytic[i], numeric[i]);
        }
    }
    return out;
}

// ---- channel_project (affinity module) ------------------------------------

Outcome check_channel_project(std::uint64_t seed) {
    Rng rng(seed ^ kCheckSeedSalt);
    Outcome out;
    for (int trial = 0; trial < 2; ++trial) {
        Tensor f({4, 4, 3}), w({3, 4}), upstream({4, 4, 4});
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.normal();
        for (std::size_t i = 0; i < upstream.size(); ++i) {
            upstream[i] = rng.uniform(-1.0, 1.0);
        }
        // Keep every pre-activation away from the ReLU kink.
        for (int attempt = 0; attempt < 100; ++attempt) {
            for (std::size_t i = 0; i < f.size(); ++i) {
                f[i] = rng.uniform(-1.0, 1.0);
            }
            bool ok = true;
            for (std::size_t p = 0; p < 16 && ok; ++p) {
                for (std::size_t co = 0; co < 4 && ok; ++co) {
                    double acc = 0.0;
                    for (std::size_t ci = 0; ci < 3; ++ci) {
                        acc += f[p * 3 + ci] * w.at(ci, co);
                    }
                    ok = std::fabs(acc) >= kKinkMargin;
                }
            }
            if (ok) break;
        }
        const ChannelProjectGrads g = channel_project_grad(f, w, upstream);
        const auto fn_input = [&](const Tensor& x) {
            return sum(mul(channel_project(x, w), upstream));
        };
        const Tensor n_input = finite_diff(fn_input, f, kFiniteDiffEps);
        for (std::size_t i = 0; i < f.size(); ++i) {
            out.compare(g.d_input[i], n_input[i]);
        }
        const auto fn_w = [&](const Tensor& x) {
            return sum(mul(channel_project(f, x), upstream));
        };
        const Tensor n_w = finite_diff(fn_w, w, kFiniteDiffEps);
        for (std::size_t i = 0; i < w.size(); ++i) {
            out.compare(g.d_weights[i], n_w[i]);
        }
    }
    return out;
}

// ---- pyramid fixtures ------------------------------------------------------

FeaturePyramid random_pyramid(Rng& rng, const std::array<std::size_t, 5>& ch,
                              std::size_t base, double lo, double hi) {
    FeaturePyramid pyr;
    for (std::size_t i = 0; i < 5; ++i) {
        const std::size_t e = base >> (i + 1);
        pyr.levels[i] = Tensor({e, e, ch[i]});
        for (std::size_t k = 0; k < pyr.levels[i].size(); ++k) {
            pyr.levels[i][k] = rng.uniform(lo, hi);
        }
    }
    return pyr;
}

Outcome check_feature_l1(std::uint64_t seed) {
    Rng rng(seed ^ kCheckSeedSalt);
    const std::array<std::size_t, 5> ch{2, 2, 3, 3, 4};
    FeaturePyramid teacher = random_pyramid(rng, ch, 32, -1.0, 1.0);
    FeaturePyramid student = teacher;
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t k = 0; k < student.levels[i].size(); ++k) {
            const double offset =
                (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 1.0);
            student.levels[i][k] += offset;  // keeps |S - T| off the kink
        }
    }
    const LossResult res = feature_l1_pyramid(student, teacher);
    Outcome out;
    const std::size_t quota[5] = {32, 32, 24, 12, 4};
    for (std::size_t i = 0; i < 5; ++i) {
        const auto fn = [&](const Tensor& x) {
            FeaturePyramid probe = student;
            probe.levels[i] = x;
            return feature_l1_pyramid(probe, teacher).value;
        };
        for (std::size_t c :
             sample_coords(rng, student.levels[i].size(), quota[i])) {
            out.compare(res.grads[i][c],
                        fd_at(fn, student.levels[i], c, kFiniteDiffEps));
        }
    }
    return out;
}

Outcome check_structure(std::uint64_t seed) {
    Rng rng(seed ^ kCheckSeedSalt);
    const std::array<std::size_t, 5> ch{2, 2, 2, 3, 3};
    auto sample = [&rng, &ch]() {
        FeaturePyramid pyr;
        for (std::size_t i = 0; i < 5; ++i) {
            const std::size_t e = std::size_t{32} >> (i + 1);
            pyr.levels[i] = Tensor({e, e, ch[i]});
            Tensor& lvl = pyr.levels[i];
            const std::size_t rows = e * e, c = ch[i];
            for (std::size_t r = 0; r < rows; ++r) {
                double norm = 0.0;
                do {
                    norm = 0.0;
                    for (std::size_t j = 0; j < c; ++j) {
                        lvl[r * c + j] = rng.uniform(-1.0, 1.0);
                        norm += lvl[r * c + j] * lvl[r * c + j];
                    }
                } while (std::sqrt(norm) < 0.3);  // keep quotients well-posed
            }
        }
        return pyr;
    };
    const FeaturePyramid student = sample();
    const FeaturePyramid teacher = sample();
    const LossResult res = structure_distill_loss(student, teacher);
    Outcome out;
    const std::size_t quota[5] = {32, 32, 24, 12, 4};
    for (std::size_t i = 0; i < 5; ++i) {
        const auto fn = [&](const Tensor& x) {
            FeaturePyramid probe = student;
            probe.levels[i] = x;
            return structure_distill_loss(probe, teacher).value;
        };
        for (std::size_t c :
             sample_coords(rng, student.levels[i].size(), quota[i])) {
            out.compare_with_floor(res.grads[i][c],
                                   fd_at(fn, student.levels[i], c, kFiniteDiffEps),
                                   1e-4, 1e-7);
        }
    }
    return out;
}

// ---- inter-depth distillation ----------------------------------------------

InterDepthSet random_inter_targets(Rng& rng, std::size_t e) {
    InterDepthSet t;
    for (auto& m : t.maps) {
        m = Tensor({e, e, 1});
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i] = rng.uniform() < 0.1 ? 0.0 : rng.uniform(1.0, 60.0);
        }
    }
    return t;
}

InterDepthSet offset_student(Rng& rng, const InterDepthSet& teacher) {
    InterDepthSet s = teacher;
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t i = 0; i < s.maps[j].size(); ++i) {
            if (teacher.maps[j][i] <= 0.0) {
                s.maps[j][i] = rng.uniform(1.0, 10.0);
                continue;
            }
            const double delta =
                (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 5.0);
            s.maps[j][i] = teacher.maps[j][i] + delta;
            if (s.maps[j][i] < 0.1) s.maps[j][i] = teacher.maps[j][i] - delta;
        }
    }
    return s;
}

double frozen_inter_value(const InterDepthSet& student,
                          const InterDepthSet& teacher,
                          const std::array<Tensor, 3>& u0) {
    double loss = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const Tensor& s = student.maps[i];
        const Tensor& t = teacher.maps[i];
        double acc = 0.0;
        for (std::size_t e = 0; e < s.size(); ++e) {
            acc += u0[i][e] * std::fabs(s[e] - t[e]);
        }
        loss += (1.0 / static_cast<double>(std::size_t{2} << i)) *
                (acc / static_cast<double>(s.size()));
    }
    return loss;
}

Outcome check_inter_depth(std::uint64_t seed, bool attached) {
    Rng rng(seed ^ kCheckSeedSalt);
    const double beta = 1.0;
    InterDepthSet teacher = random_inter_targets(rng, 8);
    InterDepthSet student = offset_student(rng, teacher);
    const LossResult res =
        inter_depth_distill_loss(student, teacher, beta, !attached);

    std::array<Tensor, 3> u0;
    for (std::size_t j = 0; j < 3; ++j) {
        u0[j] = uncertainty_map(student.maps[j], teacher.maps[j], beta).values;
    }

    Outcome out;
    for (std::size_t j = 0; j < 3; ++j) {
        const auto fn = [&](const Tensor& x) {
            InterDepthSet probe = student;
            probe.maps[j] = x;
            if (attached) {
                return inter_depth_distill_loss(probe, teacher, beta, false)
                    .value;
            }
            return frozen_inter_value(probe, teacher, u0);
        };
        for (std::size_t c = 0; c < student.maps[j].size(); ++c) {
            out.compare(res.grads[j][c],
                        fd_at(fn, student.maps[j], c, kFiniteDiffEps));
        }
    }
    return out;
}

// ---- urdl -------------------------------------------------------------------

double frozen_urdl_value(const Tensor& pred, const Tensor& dense,
                         const Tensor& sparse, const RectifiedWeights& w0) {
    std::size_t nd = 0, ns = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (dense[i] > 0.0) ++nd;
        if (sparse[i] > 0.0) ++ns;
    }
    double dacc = 0.0, sacc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (dense[i] > 0.0) dacc += w0.w_dense[i] * std::fabs(dense[i] - pred[i]);
        if (sparse[i] > 0.0) {
            sacc += w0.w_sparse[i] * std::fabs(sparse[i] - pred[i]);
        }
    }
    double loss = 0.0;
    if (nd > 0) loss += dacc / static_cast<double>(nd);
    if (ns > 0) loss += sacc / static_cast<double>(ns);
    return loss;
}

Outcome check_urdl(std::uint64_t seed, bool attached) {
    Rng rng(seed ^ kCheckSeedSalt);
    const double beta = 1.0;
    Outcome out;
    for (int trial = 0; trial < 2; ++trial) {
        Tensor dense({8, 8, 1}), sparse({8, 8, 1}), pred({8, 8, 1});
        for (std::size_t i = 0; i < dense.size(); ++i) {
            dense[i] = rng.uniform(1.0, 60.0);
            // Second trial leaves the sparse map empty: dense term only.
            sparse[i] =
                (trial == 1 || rng.uniform() < 0.6) ? 0.0 : rng.uniform(1.0, 60.0);
            do {
                pred[i] = rng.uniform(0.5, 70.0);
            } while (std::fabs(pred[i] - dense[i]) < 1e-2 ||
                     (sparse[i] > 0.0 && std::fabs(pred[i] - sparse[i]) < 1e-2));
        }
        const LossResult res = urdl(pred, dense, sparse, beta, !attached);
        const RectifiedWeights w0 =
            rectify(uncertainty_map(pred, dense, beta),
                    uncertainty_map(pred, sparse, beta), valid_mask(dense),
                    valid_mask(sparse));
        const auto fn = [&](const Tensor& x) {
            if (attached) return urdl(x, dense, sparse, beta, false).value;
            return frozen_urdl_value(x, dense, sparse, w0);
        };
        for (std::size_t c = 0; c < pred.size(); ++c) {
            out.compare(res.grads[0][c], fd_at(fn, pred, c, kFiniteDiffEps));
        }
    }
    return out;
}

// ---- end-to-end toy model ----------------------------------------------------

struct ToyFixture {
    Scene scene;
    ToyTeacher teacher;
    TeacherOutput tout;
    ToyModel model;
};

// A finite-difference step of 1e-6 in one parameter moves any activation or
// head output by well under 1e-5, so these margins guarantee no kink of
// ReLU or |.| is crossed during the probe, while staying loose enough that
// random samples pass after a few tries.
constexpr double kToyPreMargin = 1e-4;
constexpr double kToyValueMargin = 1e-4;
constexpr double kToyFeatureMargin = 1e-5;

bool toy_margins_ok(const detail::StudentTrace& trace, const StudentOutput& out,
                    const TeacherOutput& tout, const Scene& scene) {
    if (detail::min_preactivation_margin(trace) < kToyPreMargin) return false;

    const Tensor& depth = out.depth;
    for (std::size_t i = 0; i < depth.size(); ++i) {
        if (scene.gt_dense[i] > 0.0 &&
            std::fabs(depth[i] - scene.gt_dense[i]) < kToyValueMargin) {
            return false;
        }
        if (scene.gt_sparse[i] > 0.0 &&
            std::fabs(depth[i] - scene.gt_sparse[i]) < kToyValueMargin) {
            return false;
        }
    }
    for (std::size_t j = 0; j < 3; ++j) {
        const Tensor& s = out.inter.maps[j];
        const Tensor& t = tout.lpg.maps[j];
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (t[i] > 0.0 && std::fabs(s[i] - t[i]) < kToyValueMargin) {
                return false;
            }
        }
    }
    // |S - T| kinks in the L1 feature losses matter only where the student
    // unit is alive; a dead unit keeps S pinned at 0 under the FD step.
    for (std::size_t lvl = 0; lvl < 5; ++lvl) {
        const Tensor& cam_pre = trace.pcam_pre[lvl];
        const Tensor& rad_pre = trace.prad_pre[lvl];
        for (std::size_t i = 0; i < cam_pre.size(); ++i) {
            if (cam_pre[i] > 0.0 &&
                std::fabs(out.camera.levels[lvl][i] -
                          tout.camera.levels[lvl][i]) < kToyFeatureMargin) {
                return false;
            }
        }
        for (std::size_t i = 0; i < rad_pre.size(); ++i) {
            if (rad_pre[i] > 0.0 &&
                std::fabs(out.radar.levels[lvl][i] -
                          tout.radar.levels[lvl][i]) < kToyFeatureMargin) {
                return false;
            }
        }
        // Cosine rows must stay clear of the zero-vector singularity.
        auto rows_ok = [](const Tensor& level) {
            const std::size_t rows = level.extent(0) * level.extent(1);
            const std::size_t c = level.extent(2);
            for (std::size_t r = 0; r < rows; ++r) {
                double norm = 0.0;
                for (std::size_t j = 0; j < c; ++j) {
                    norm += level[r * c + j] * level[r * c + j];
                }
                norm = std::sqrt(norm);
                if (norm != 0.0 && norm < 1e-2) return false;
            }
            return true;
        };
        if (!rows_ok(out.decoder.levels[lvl]) ||
            !rows_ok(tout.decoder.levels[lvl])) {
            return false;
        }
    }
    return true;
}

ToyFixture make_toy_fixture(std::uint64_t seed) {
    const ToyProfile profile = ToyProfile::compact();
    for (int attempt = 0; attempt < 200; ++attempt) {
        const std::uint64_t scene_seed = seed + 1000 * (attempt / 25);
        const std::uint64_t model_seed = seed + 7919 * (attempt % 25 + 1);
        ToyFixture fx;
        fx.scene = gen_scene(scene_seed, 32, 32);
        fx.teacher = make_teacher(profile);
        fx.tout = teacher_forward(fx.teacher, fx.scene);
        fx.model = make_student(profile, model_seed);
        detail::StudentTrace trace;
        const StudentOutput out =
            detail::student_forward_traced(fx.model, fx.scene, trace);
        if (toy_margins_ok(trace, out, fx.tout, fx.scene)) return fx;
    }
    throw Error("toy gradient check: no kink-free sample found");
}

Outcome check_toy_model(std::uint64_t seed, bool attached) {
    ToyFixture fx = make_toy_fixture(seed);
    const double beta = 1.0;  // all gamma weights are 1 in this check

    detail::StudentTrace trace;
    const StudentOutput out =
        detail::student_forward_traced(fx.model, fx.scene, trace);
    const LossResult depth_loss_res =
        urdl(out.depth, fx.scene.gt_dense, fx.scene.gt_sparse, beta, !attached);
    const LossResult kd_i = feature_l1_pyramid(out.camera, fx.tout.camera);
    const LossResult kd_r = feature_l1_pyramid(out.radar, fx.tout.radar);
    const LossResult kd_dec = structure_distill_loss(out.decoder, fx.tout.decoder);
    const LossResult kd_d =
        inter_depth_distill_loss(out.inter, fx.tout.lpg, beta, !attached);

    StudentOutputGrads out_grads;
    out_grads.d_depth = depth_loss_res.grads[0];
    for (std::size_t i = 0; i < 5; ++i) {
        out_grads.d_camera[i] = kd_i.grads[i];
        out_grads.d_radar[i] = kd_r.grads[i];
        out_grads.d_decoder[i] = kd_dec.grads[i];
    }
    for (std::size_t j = 0; j < 3; ++j) out_grads.d_inter[j] = kd_d.grads[j];
    detail::ParamGrads analytic =
        detail::student_backward(fx.model, trace, out_grads);

    // Frozen weights for the detached-mode surrogate.
    const RectifiedWeights w0 = rectify(
        uncertainty_map(out.depth, fx.scene.gt_dense, beta),
        uncertainty_map(out.depth, fx.scene.gt_sparse, beta),
        valid_mask(fx.scene.gt_dense), valid_mask(fx.scene.gt_sparse));
    std::array<Tensor, 3> u0;
    for (std::size_t j = 0; j < 3; ++j) {
        u0[j] =
            uncertainty_map(out.inter.maps[j], fx.tout.lpg.maps[j], beta).values;
    }

    const auto total_value = [&](const ToyModel& m) {
        const StudentOutput o = student_forward(m, fx.scene);
        double v = 0.0;
        if (attached) {
            v += urdl(o.depth, fx.scene.gt_dense, fx.scene.gt_sparse, beta, false)
                     .value;
            v += inter_depth_distill_loss(o.inter, fx.tout.lpg, beta, false).value;
        } else {
            v += frozen_urdl_value(o.depth, fx.scene.gt_dense,
                                   fx.scene.gt_sparse, w0);
            v += frozen_inter_value(o.inter, fx.tout.lpg, u0);
        }
        v += feature_l1_pyramid(o.camera, fx.tout.camera).value;
        v += feature_l1_pyramid(o.radar, fx.tout.radar).value;
        v += structure_distill_loss(o.decoder, fx.tout.decoder).value;
        return v;
    };

    Outcome outc;
    std::vector<Tensor*> params = fx.model.parameters();
    std::vector<Tensor*> grads = analytic.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        for (std::size_t e = 0; e < p.size(); ++e) {
            const double orig = p[e];
            p[e] = orig + kFiniteDiffEps;
            const double f_plus = check_finite(total_value(fx.model));
            p[e] = orig - kFiniteDiffEps;
            const double f_minus = check_finite(total_value(fx.model));
            p[e] = orig;
            const double numeric = (f_plus - f_minus) / (2.0 * kFiniteDiffEps);
            outc.compare_with_floor((*grads[k])[e], numeric, 1e-3, 1e-6);
        }
    }
    return outc;
}

}  // namespace

Tensor finite_diff(const std::function<double(const Tensor&)>& fn,
                   const Tensor& input, double eps) {
    if (!(eps > 0.0)) throw ArgumentError("eps must be > 0");
    Tensor grad(input.shape());
    Tensor x = input;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + eps;
        const double f_plus = check_finite(fn(x));
        x[i] = orig - eps;
        const double f_minus = check_finite(fn(x));
        x[i] = orig;
        grad[i] = (f_plus - f_minus) / (2.0 * eps);
    }
    return grad;
}

double rel_error(double analytic, double numeric) {
    const double denom =
        std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    return std::fabs(analytic - numeric) / denom;
}

std::vector<std::string> registered_checks() {
    return {"uncertainty",       "channel_project",
            "feature_l1",        "structure_distill",
            "inter_depth",       "inter_depth_attached",
            "urdl",              "urdl_attached",
            "toy_model",         "toy_model_attached"};
}

double default_tolerance(const std::string& op) {
    if (op == "uncertainty" || op == "channel_project") return 1e-6;
    if (op == "feature_l1" || op == "structure_distill" ||
        op == "inter_depth" || op == "inter_depth_attached" || op == "urdl" ||
        op == "urdl_attached") {
        return 1e-5;
    }
    if (op == "toy_model" || op == "toy_model_attached") return 1e-4;
    throw ArgumentError("unknown gradient check: " + op);
}

GradReport check(const std::string& op, std::uint64_t seed, double tolerance) {
    Outcome outcome;
    if (op == "uncertainty") {
        outcome = check_uncertainty(seed);
    } else if (op == "channel_project") {
        outcome = check_channel_project(seed);
    } else if (op == "feature_l1") {
        outcome = check_feature_l1(seed);
    } else if (op == "structure_distill") {
        outcome = check_structure(seed);
    } else if (op == "inter_depth") {
        outcome = check_inter_depth(seed, false);
    } else if (op == "inter_depth_attached") {
        outcome = check_inter_depth(seed, true);
    } else if (op == "urdl") {
        outcome = check_urdl(seed, false);
    } else if (op == "urdl_attached") {
        outcome = check_urdl(seed, true);
    } else if (op == "toy_model") {
        outcome = check_toy_model(seed, false);
    } else if (op == "toy_model_attached") {
        outcome = check_toy_model(seed, true);
    } else {
        throw ArgumentError("unknown gradient check: " + op);
    }
    GradReport report;
    report.op = op;
    report.max_rel_error = outcome.max_rel;
    report.max_abs_error = outcome.max_abs;
    report.n_points = outcome.n_points;
    report.eps = kFiniteDiffEps;
    report.tolerance = tolerance;
    report.pass = outcome.max_rel < tolerance;
    return report;
}

GradReport check(const std::string& op, std::uint64_t seed) {
    return check(op, seed, default_tolerance(op));
}

}  // namespace rcdepth
