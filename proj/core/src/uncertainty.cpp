#include "rcdepth/uncertainty.hpp"

#include <cmath>

namespace rcdepth {

namespace {

void check_beta(double beta) {
    if (!(beta > 0.0)) throw ArgumentError("beta must be > 0");
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

double uncertainty_scalar(double pred, double gt, double beta) {
    const double a = std::fabs(pred - gt);
    const double d = beta * std::fabs(pred + gt) + kUncertaintyEps;
    return 1.0 - std::exp(-a / d);
}

double uncertainty_scalar_grad(double pred, double gt, double beta) {
    if (pred == gt) return 0.0;  // subgradient convention at the kink
    const double diff = pred - gt;
    const double s = pred + gt;
    const double a = std::fabs(diff);
    const double d = beta * std::fabs(s) + kUncertaintyEps;
    const double da = diff > 0.0 ? 1.0 : -1.0;
    const double dd = beta * (s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0));
    // U = 1 - exp(-a/d); dU/dpred = exp(-a/d) * (da*d - a*dd) / d^2.
    return std::exp(-a / d) * (da * d - a * dd) / (d * d);
}

UncertaintyMap uncertainty_map(const Tensor& pred, const Tensor& gt, double beta) {
    require_same_shape(pred, gt, "uncertainty_map");
    check_beta(beta);
    Tensor u(pred.shape());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        u[i] = gt[i] > 0.0 ? uncertainty_scalar(pred[i], gt[i], beta) : 0.0;
    }
    return UncertaintyMap{std::move(u), beta};
}

Tensor uncertainty_map_grad(const Tensor& pred, const Tensor& gt, double beta) {
    require_same_shape(pred, gt, "uncertainty_map_grad");
    check_beta(beta);
    Tensor g(pred.shape());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        g[i] = gt[i] > 0.0 ? uncertainty_scalar_grad(pred[i], gt[i], beta) : 0.0;
    }
    return g;
}

RectifiedWeights rectify(const UncertaintyMap& u_dense,
                         const UncertaintyMap& u_sparse,
                         const Tensor& valid_dense,
                         const Tensor& valid_sparse) {
    const Tensor& ud = u_dense.values;
    const Tensor& us = u_sparse.values;
    require_same_shape(ud, us, "rectify");
    require_same_shape(ud, valid_dense, "rectify valid_dense");
    require_same_shape(ud, valid_sparse, "rectify valid_sparse");

    RectifiedWeights w{Tensor(ud.shape()), Tensor(ud.shape()), valid_dense,
                       valid_sparse};
    for (std::size_t i = 0; i < ud.size(); ++i) {
        const bool vd = valid_dense[i] != 0.0;
        const bool vs = valid_sparse[i] != 0.0;
        if (vd && vs) {
            // Two-way softmax; w_dense + w_sparse == 1 holds exactly.
            const double wd = sigmoid(ud[i] - us[i]);
            w.w_dense[i] = wd;
            w.w_sparse[i] = 1.0 - wd;
        } else if (vd) {
            w.w_dense[i] = 1.0;
        } else if (vs) {
            w.w_sparse[i] = 1.0;
        }
    }
    return w;
}

Tensor valid_mask(const Tensor& depth) {
    Tensor m(depth.shape());
    for (std::size_t i = 0; i < depth.size(); ++i) {
        m[i] = depth[i] > 0.0 ? 1.0 : 0.0;
    }
    return m;
}

}  // namespace rcdepth
