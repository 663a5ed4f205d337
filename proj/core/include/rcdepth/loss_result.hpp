#pragma once

#include <vector>

#include "rcdepth/tensor.hpp"

namespace rcdepth {

/// A scalar loss with its gradient per differentiable input. The order of
/// `grads` is documented by each producing operation.
struct LossResult {
    double value = 0.0;
    std::vector<Tensor> grads;
};

}  // namespace rcdepth
