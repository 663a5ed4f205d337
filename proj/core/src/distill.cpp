#include "rcdepth/distill.hpp"

#include <cmath>
#include <string>

#include "rcdepth/uncertainty.hpp"

namespace rcdepth {

namespace {

// Per-level weights 1/2^i for i = 1..5 (and 1..3 for the depth heads).
double level_weight(std::size_t index) {
    return 1.0 / static_cast<double>(std::size_t{2} << index);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct FlatFeatures {
    Tensor rows;                // N x C
    std::vector<double> norms;  // N, L2 norm per pixel row
};

FlatFeatures flatten_with_norms(const Tensor& level) {
    FlatFeatures f{flatten_spatial(level), {}};
    const std::size_t n = f.rows.extent(0), c = f.rows.extent(1);
    f.norms.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double v = f.rows.at(p, j);
            acc += v * v;
        }
        f.norms[p] = std::sqrt(acc);
    }
    return f;
}

// alpha_pq = f_p . f_q / (|f_p| |f_q|); zero vectors score 0 everywhere.
double cosine(const FlatFeatures& f, std::size_t p, std::size_t q) {
    if (f.norms[p] == 0.0 || f.norms[q] == 0.0) return 0.0;
    const std::size_t c = f.rows.extent(1);
    double dot = 0.0;
    for (std::size_t j = 0; j < c; ++j) dot += f.rows.at(p, j) * f.rows.at(q, j);
    return dot / (f.norms[p] * f.norms[q]);
}

// One pyramid level of the structure loss. Above the materialization limit
// the similarity entries are recomputed on demand; the arithmetic and the
// accumulation order are identical either way, so both paths agree bitwise.
void structure_level(const Tensor& fs, const Tensor& ft, double weight,
                     std::size_t materialize_limit, double& loss_out,
                     Tensor& grad_out) {
    const FlatFeatures s = flatten_with_norms(fs);
    const FlatFeatures t = flatten_with_norms(ft);
    const std::size_t n = s.rows.extent(0), c = s.rows.extent(1);
    const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));

    const bool materialize = n <= materialize_limit;
    Tensor alpha_s, alpha_t;
    if (materialize) {
        alpha_s = Tensor({n, n});
        alpha_t = Tensor({n, n});
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = 0; q < n; ++q) {
                alpha_s.at(p, q) = cosine(s, p, q);
                alpha_t.at(p, q) = cosine(t, p, q);
            }
        }
    }
    auto a_s = [&](std::size_t p, std::size_t q) {
        return materialize ? alpha_s.at(p, q) : cosine(s, p, q);
    };
    auto a_t = [&](std::size_t p, std::size_t q) {
        return materialize ? alpha_t.at(p, q) : cosine(t, p, q);
    };

    double acc = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            const double e = a_s(p, q) - a_t(p, q);
            acc += e * e;
        }
    }
    loss_out = weight * (acc * inv_n2);

    // d(loss)/d(f_r): the pair (r,q) appears twice in the symmetric double
    // sum and the diagonal entry is constant, so
    //   grad_r = w * (4/N^2) * sum_{q != r} e_rq *
    //            (f_q / (|f_r||f_q|) - alpha_rq * f_r / |f_r|^2).
    grad_out = Tensor(fs.shape());
    auto grad_rows = grad_out.data();
    for (std::size_t r = 0; r < n; ++r) {
        if (s.norms[r] == 0.0) continue;  // alpha row is constant 0
        const double inv_nr = 1.0 / s.norms[r];
        const double inv_nr2 = inv_nr * inv_nr;
        for (std::size_t q = 0; q < n; ++q) {
            if (q == r || s.norms[q] == 0.0) continue;
            const double asv = a_s(r, q);
            const double e = asv - a_t(r, q);
            const double coef = weight * 4.0 * e * inv_n2;
            const double inv_nq = 1.0 / s.norms[q];
            for (std::size_t j = 0; j < c; ++j) {
                grad_rows[r * c + j] +=
                    coef * (s.rows.at(q, j) * inv_nr * inv_nq -
                            asv * s.rows.at(r, j) * inv_nr2);
            }
        }
    }
}

void check_paired_levels(const FeaturePyramid& student,
                         const FeaturePyramid& teacher, const char* what) {
    student.validate();
    teacher.validate();
    for (std::size_t i = 0; i < 5; ++i) {
        require_same_shape(student.levels[i], teacher.levels[i], what);
    }
}

void check_inter_set(const InterDepthSet& set, const char* what) {
    for (const Tensor& m : set.maps) {
        if (m.rank() != 3 || m.extent(2) != 1) {
            throw ShapeError(std::string(what) + ": maps must be H x W x 1");
        }
        require_same_shape(m, set.maps[0], what);
    }
}

}  // namespace

void FeaturePyramid::validate() const {
    for (std::size_t i = 0; i < 5; ++i) {
        if (levels[i].rank() != 3) {
            throw ShapeError("pyramid level " + std::to_string(i + 1) +
                             " must be rank 3");
        }
        if (i > 0) {
            const std::size_t ph = levels[i - 1].extent(0);
            const std::size_t pw = levels[i - 1].extent(1);
            if (ph / 2 < 1 || pw / 2 < 1 || levels[i].extent(0) != ph / 2 ||
                levels[i].extent(1) != pw / 2) {
                throw ShapeError("pyramid spatial dims must halve per level");
            }
        }
    }
}

LossResult feature_l1_pyramid(const FeaturePyramid& student,
                              const FeaturePyramid& teacher) {
    check_paired_levels(student, teacher, "feature_l1_pyramid");
    LossResult result;
    result.grads.reserve(5);
    for (std::size_t i = 0; i < 5; ++i) {
        const Tensor& s = student.levels[i];
        const Tensor& t = teacher.levels[i];
        const double w = level_weight(i);
        const double inv_numel = 1.0 / static_cast<double>(s.size());
        double acc = 0.0;
        Tensor grad(s.shape());
        for (std::size_t e = 0; e < s.size(); ++e) {
            const double d = s[e] - t[e];
            acc += std::fabs(d);
            grad[e] = w * sign(d) * inv_numel;
        }
        result.value += w * (acc * inv_numel);
        result.grads.push_back(std::move(grad));
    }
    return result;
}

SimilarityMatrix pairwise_similarity(const Tensor& f) {
    if (f.rank() != 3) {
        throw ShapeError("pairwise_similarity expects a rank-3 feature map");
    }
    const FlatFeatures flat = flatten_with_norms(f);
    const std::size_t n = flat.rows.extent(0);
    Tensor alpha({n, n});
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            alpha.at(p, q) = cosine(flat, p, q);
        }
    }
    return alpha;
}

LossResult structure_distill_loss(const FeaturePyramid& student,
                                  const FeaturePyramid& teacher) {
    return detail::structure_distill_loss_blocked(student, teacher,
                                                  kSimilarityMaterializeLimit);
}

LossResult inter_depth_distill_loss(const InterDepthSet& student,
                                    const InterDepthSet& teacher, double beta,
                                    bool detach_u) {
    check_inter_set(student, "inter_depth_distill_loss student");
    check_inter_set(teacher, "inter_depth_distill_loss teacher");
    for (std::size_t i = 0; i < 3; ++i) {
        require_same_shape(student.maps[i], teacher.maps[i],
                           "inter_depth_distill_loss");
    }
    if (!(beta > 0.0)) throw ArgumentError("beta must be > 0");

    LossResult result;
    result.grads.reserve(3);
    for (std::size_t i = 0; i < 3; ++i) {
        const Tensor& s = student.maps[i];
        const Tensor& t = teacher.maps[i];
        const double w = level_weight(i);
        const double inv_numel = 1.0 / static_cast<double>(s.size());
        double acc = 0.0;
        Tensor grad(s.shape());
        for (std::size_t e = 0; e < s.size(); ++e) {
            if (t[e] <= 0.0) continue;  // invalid teacher pixel: U = 0
            const double u = uncertainty_scalar(s[e], t[e], beta);
            const double diff = s[e] - t[e];
            acc += u * std::fabs(diff);
            double g = u * sign(diff);
            if (!detach_u) {
                g += uncertainty_scalar_grad(s[e], t[e], beta) * std::fabs(diff);
            }
            grad[e] = w * g * inv_numel;
        }
        result.value += w * (acc * inv_numel);
        result.grads.push_back(std::move(grad));
    }
    return result;
}

namespace detail {

LossResult structure_distill_loss_blocked(const FeaturePyramid& student,
                                          const FeaturePyramid& teacher,
                                          std::size_t materialize_limit) {
    check_paired_levels(student, teacher, "structure_distill_loss");
    LossResult result;
    result.grads.resize(5);
    for (std::size_t i = 0; i < 5; ++i) {
        double term = 0.0;
        structure_level(student.levels[i], teacher.levels[i], level_weight(i),
                        materialize_limit, term, result.grads[i]);
        result.value += term;
    }
    return result;
}

}  // namespace detail

}  // namespace rcdepth
