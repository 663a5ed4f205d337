#pragma once

#include "rcdepth/tensor.hpp"

namespace rcdepth {

/// Denominator guard; makes the uncertainty total at pred + gt == 0.
inline constexpr double kUncertaintyEps = 1e-12;

/// Bounded, scale-free error measure between a prediction and a reference:
/// U = 1 - exp(-|pred - gt| / (beta * |pred + gt| + eps)), in [0, 1).
struct UncertaintyMap {
    Tensor values;  // H x W x 1
    double beta = 1.0;
};

/// Scalar form of the map. Valid-pixel masking is the caller's concern.
double uncertainty_scalar(double pred, double gt, double beta);

/// d(uncertainty_scalar)/d(pred); subgradient 0 at pred == gt.
double uncertainty_scalar_grad(double pred, double gt, double beta);

/// Elementwise uncertainty, evaluated where gt > 0 and 0 elsewhere.
/// Throws on shape mismatch or beta <= 0.
UncertaintyMap uncertainty_map(const Tensor& pred, const Tensor& gt, double beta);

/// Elementwise d(U)/d(pred) under the same masking convention.
Tensor uncertainty_map_grad(const Tensor& pred, const Tensor& gt, double beta);

/// Per-pixel supervision weights after softmax rectification. On both-valid
/// pixels the weights sum to exactly 1; a single-source pixel gets weight 1
/// for its valid side; doubly-invalid pixels get 0 on both.
struct RectifiedWeights {
    Tensor w_dense;       // H x W x 1
    Tensor w_sparse;      // H x W x 1
    Tensor valid_dense;   // H x W x 1, entries 0 or 1
    Tensor valid_sparse;  // H x W x 1, entries 0 or 1
};

/// w_dense = sigmoid(U_d - U_s) where both sources are valid; equivalent to
/// softmax over the two concatenated uncertainty channels.
RectifiedWeights rectify(const UncertaintyMap& u_dense,
                         const UncertaintyMap& u_sparse,
                         const Tensor& valid_dense,
                         const Tensor& valid_sparse);

/// 1 where depth > 0, else 0.
Tensor valid_mask(const Tensor& depth);

}  // namespace rcdepth
