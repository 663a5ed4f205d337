#include "rcdepth/depth_loss.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "rcdepth/uncertainty.hpp"

namespace rcdepth {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

void LossWeights::validate() const {
    for (double g : gamma) {
        if (!std::isfinite(g) || g < 0.0) {
            throw ArgumentError("loss weights must be finite and >= 0");
        }
    }
}

LossResult urdl(const Tensor& pred, const Tensor& dense, const Tensor& sparse,
                double beta, bool detach_u) {
    require_same_shape(pred, dense, "urdl dense");
    require_same_shape(pred, sparse, "urdl sparse");
    if (!(beta > 0.0)) throw ArgumentError("beta must be > 0");

    const std::size_t n = pred.size();
    std::size_t n_dense = 0, n_sparse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (dense[i] > 0.0) ++n_dense;
        if (sparse[i] > 0.0) ++n_sparse;
    }
    if (n_dense == 0 && n_sparse == 0) {
        throw EmptyValidSetError("urdl: both supervision maps are empty");
    }

    // Clamp nonpositive predictions on supervised pixels so the uncertainty
    // ratio stays defined. Clamped pixels carry zero gradient.
    Tensor pred_eff = pred;
    std::size_t n_clamped = 0;
    std::vector<bool> clamped(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if ((dense[i] > 0.0 || sparse[i] > 0.0) && pred[i] < kPredClampFloor) {
            pred_eff[i] = kPredClampFloor;
            clamped[i] = true;
            ++n_clamped;
        }
    }
    if (n_clamped > 0) {
        std::cerr << "warning: urdl clamped " << n_clamped
                  << " nonpositive prediction(s) to " << kPredClampFloor << "\n";
    }

    const UncertaintyMap u_d = uncertainty_map(pred_eff, dense, beta);
    const UncertaintyMap u_s = uncertainty_map(pred_eff, sparse, beta);
    const RectifiedWeights w =
        rectify(u_d, u_s, valid_mask(dense), valid_mask(sparse));

    const double inv_nd = n_dense > 0 ? 1.0 / static_cast<double>(n_dense) : 0.0;
    const double inv_ns = n_sparse > 0 ? 1.0 / static_cast<double>(n_sparse) : 0.0;

    double dense_acc = 0.0, sparse_acc = 0.0;
    Tensor grad(pred.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const bool vd = dense[i] > 0.0;
        const bool vs = sparse[i] > 0.0;
        if (!vd && !vs) continue;
        const double p = pred_eff[i];
        const double a_d = vd ? std::fabs(dense[i] - p) : 0.0;
        const double a_s = vs ? std::fabs(sparse[i] - p) : 0.0;
        if (vd) dense_acc += w.w_dense[i] * a_d;
        if (vs) sparse_acc += w.w_sparse[i] * a_s;
        if (clamped[i]) continue;

        double g = 0.0;
        if (vd) g += inv_nd * w.w_dense[i] * sign(p - dense[i]);
        if (vs) g += inv_ns * w.w_sparse[i] * sign(p - sparse[i]);
        if (!detach_u && vd && vs) {
            // Both weights come from the two-way softmax; its derivative
            // w.r.t. the prediction is w_d*w_s*(dU_d - dU_s), and
            // d(w_s) = -d(w_d).
            const double dwd = w.w_dense[i] * w.w_sparse[i] *
                               (uncertainty_scalar_grad(p, dense[i], beta) -
                                uncertainty_scalar_grad(p, sparse[i], beta));
            g += inv_nd * dwd * a_d - inv_ns * dwd * a_s;
        }
        grad[i] = g;
    }

    LossResult result;
    result.value = dense_acc * inv_nd + sparse_acc * inv_ns;
    result.grads.push_back(std::move(grad));
    return result;
}

LossResult total_loss(const LossResult& depth, const LossResult& kd_image,
                      const LossResult& kd_radar, const LossResult& kd_decoder,
                      const LossResult& kd_depth, const LossWeights& weights) {
    weights.validate();
    const LossResult* components[5] = {&depth, &kd_image, &kd_radar,
                                       &kd_decoder, &kd_depth};
    const char* names[5] = {"depth", "kd_image", "kd_radar", "kd_decoder",
                            "kd_depth"};
    for (int i = 0; i < 5; ++i) {
        if (!std::isfinite(components[i]->value)) {
            throw NonFiniteError(std::string("total_loss: component '") +
                                 names[i] + "' is not finite");
        }
    }

    LossResult result;
    result.value = depth.value;
    for (int i = 1; i < 5; ++i) {
        const double g = weights.gamma[i - 1];
        if (g != 0.0) result.value += g * components[i]->value;
    }
    for (int i = 0; i < 5; ++i) {
        const double g = i == 0 ? 1.0 : weights.gamma[i - 1];
        for (const Tensor& t : components[i]->grads) {
            result.grads.push_back(g == 1.0 ? t : scale(t, g));
        }
    }
    return result;
}

GradReport urdl_grad_check(std::uint64_t seed) {
    return check("urdl", seed);
}

}  // namespace rcdepth
