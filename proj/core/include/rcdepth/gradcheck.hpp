#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rcdepth/tensor.hpp"

namespace rcdepth {

/// Central differences step used throughout the verification suite.
inline constexpr double kFiniteDiffEps = 1e-6;

/// Sampled points are resampled until |pred - gt| and pre-activations stay
/// at least this far from the kinks of |.| and ReLU.
inline constexpr double kKinkMargin = 1e-3;

struct GradReport {
    std::string op;
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t n_points = 0;
    double eps = kFiniteDiffEps;
    double tolerance = 0.0;
    bool pass = false;
};

/// Central finite differences of a scalar function, one element at a time:
/// (f(x + eps e) - f(x - eps e)) / (2 eps). Throws NonFiniteError if the
/// function returns a non-finite value.
Tensor finite_diff(const std::function<double(const Tensor&)>& fn,
                   const Tensor& input, double eps);

/// Relative error with denominator max(|a|, |b|, 1e-8).
double rel_error(double analytic, double numeric);

/// Names accepted by check(), in execution order of `--op all`.
std::vector<std::string> registered_checks();

/// Default tolerance tier for a registered op: 1e-6 for elementwise ops,
/// 1e-5 for composite losses, 1e-4 end-to-end. Throws on unknown names.
double default_tolerance(const std::string& op);

/// Runs the named gradient check at the given seed: samples random
/// differentiable points, compares analytic gradients against central finite
/// differences, and reports the worst errors. Throws ArgumentError for
/// unknown op names.
GradReport check(const std::string& op, std::uint64_t seed, double tolerance);
GradReport check(const std::string& op, std::uint64_t seed);

}  // namespace rcdepth
