#pragma once

#include <span>

#include "rcdepth/tensor.hpp"

namespace rcdepth {

/// Depth evaluation over the valid set {p : 0 < gt(p) <= cap}. Error metrics
/// are in meters where applicable; delta_k are fractions in [0, 1].
struct EvalReport {
    double mae = 0.0;
    double rmse = 0.0;
    double absrel = 0.0;
    double log10 = 0.0;
    double rmselog = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    std::size_t n_valid = 0;
    double cap = 0.0;
};

/// Standard depth metrics:
///   MAE     = mean |pred - gt|
///   RMSE    = sqrt(mean (pred - gt)^2)
///   AbsRel  = mean |pred - gt| / gt
///   log10   = mean |log10 pred - log10 gt|
///   RMSElog = sqrt(mean (ln pred - ln gt)^2)
///   delta_k = fraction with max(pred/gt, gt/pred) < 1.25^k
/// The distance cap applies to the ground truth only. Throws on shape
/// mismatch, nonpositive cap, an empty valid set, or a nonpositive
/// prediction inside the valid set.
EvalReport evaluate(const Tensor& pred, const Tensor& gt, double cap);

/// Pools frame reports weighted by n_valid; equivalent to evaluating the
/// concatenated maps. All reports must share the same cap. Reports with
/// n_valid == 0 contribute nothing.
EvalReport aggregate(std::span<const EvalReport> reports);

}  // namespace rcdepth
