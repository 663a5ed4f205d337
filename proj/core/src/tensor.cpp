#include "rcdepth/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace rcdepth {

namespace {

std::size_t checked_element_count(const std::vector<std::size_t>& shape) {
    validate_shape(shape);
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

}  // namespace

void validate_shape(const std::vector<std::size_t>& shape) {
    if (shape.empty() || shape.size() > 4) {
        throw ShapeError("tensor rank must be 1-4, got " +
                         std::to_string(shape.size()));
    }
    for (std::size_t e : shape) {
        if (e == 0) throw ShapeError("tensor extents must be >= 1");
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) {
        auto fmt = [](const Tensor& t) {
            std::string s = "(";
            for (std::size_t i = 0; i < t.rank(); ++i) {
                if (i) s += "x";
                s += std::to_string(t.shape()[i]);
            }
            return s + ")";
        };
        throw ShapeError(std::string("shape mismatch in ") + what + ": " +
                         fmt(a) + " vs " + fmt(b));
    }
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_element_count(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_element_count(shape_) != data_.size()) {
        throw ShapeError("data length does not match shape");
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
}

Tensor Tensor::ones(std::vector<std::size_t> shape) {
    return full(std::move(shape), 1.0);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

Tensor ones(const std::vector<std::size_t>& shape) {
    return Tensor::ones(shape);
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
    return out;
}

double sum(const Tensor& t) {
    // Left-to-right accumulation; summation order is part of the
    // reproducibility contract.
    double acc = 0.0;
    for (double v : t.data()) acc += v;
    return acc;
}

double mean(const Tensor& t) {
    return sum(t) / static_cast<double>(t.size());
}

Tensor nearest_upsample(const Tensor& t, std::size_t factor) {
    if (t.rank() != 3) throw ShapeError("nearest_upsample expects a rank-3 map");
    if (factor == 0) throw ArgumentError("upsample factor must be >= 1");
    const std::size_t h = t.extent(0), w = t.extent(1), c = t.extent(2);
    Tensor out({h * factor, w * factor, c});
    for (std::size_t y = 0; y < h * factor; ++y) {
        for (std::size_t x = 0; x < w * factor; ++x) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                out.at(y, x, ch) = t.at(y / factor, x / factor, ch);
            }
        }
    }
    return out;
}

Tensor block_subsample(const Tensor& t, std::size_t factor) {
    if (t.rank() != 3) throw ShapeError("block_subsample expects a rank-3 map");
    if (factor == 0) throw ArgumentError("subsample factor must be >= 1");
    const std::size_t h = t.extent(0), w = t.extent(1), c = t.extent(2);
    if (h % factor != 0 || w % factor != 0) {
        throw ShapeError("block_subsample: extents not divisible by factor");
    }
    Tensor out({h / factor, w / factor, c});
    for (std::size_t y = 0; y < h / factor; ++y) {
        for (std::size_t x = 0; x < w / factor; ++x) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                out.at(y, x, ch) = t.at(y * factor, x * factor, ch);
            }
        }
    }
    return out;
}

Tensor block_average(const Tensor& t, std::size_t factor) {
    if (t.rank() != 3) throw ShapeError("block_average expects a rank-3 map");
    if (factor == 0) throw ArgumentError("average factor must be >= 1");
    const std::size_t h = t.extent(0), w = t.extent(1), c = t.extent(2);
    if (h % factor != 0 || w % factor != 0) {
        throw ShapeError("block_average: extents not divisible by factor");
    }
    Tensor out({h / factor, w / factor, c});
    const double inv = 1.0 / static_cast<double>(factor * factor);
    for (std::size_t y = 0; y < h / factor; ++y) {
        for (std::size_t x = 0; x < w / factor; ++x) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (std::size_t dy = 0; dy < factor; ++dy) {
                    for (std::size_t dx = 0; dx < factor; ++dx) {
                        acc += t.at(y * factor + dy, x * factor + dx, ch);
                    }
                }
                out.at(y, x, ch) = acc * inv;
            }
        }
    }
    return out;
}

Tensor flatten_spatial(const Tensor& t) {
    if (t.rank() != 3) throw ShapeError("flatten_spatial expects a rank-3 map");
    // Row-major data is already (H*W) x C contiguous; only the shape changes.
    std::vector<double> data(t.data().begin(), t.data().end());
    return Tensor({t.extent(0) * t.extent(1), t.extent(2)}, std::move(data));
}

Tensor unflatten_spatial(const Tensor& t, std::size_t h, std::size_t w) {
    if (t.rank() != 2) throw ShapeError("unflatten_spatial expects a rank-2 input");
    if (t.extent(0) != h * w) {
        throw ShapeError("unflatten_spatial: row count does not equal h*w");
    }
    std::vector<double> data(t.data().begin(), t.data().end());
    return Tensor({h, w, t.extent(1)}, std::move(data));
}

}  // namespace rcdepth
