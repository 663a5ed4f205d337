#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rcdepth/errors.hpp"

namespace rcdepth {

/// Dense row-major array of 64-bit floats, rank 1-4. Rank-3 maps are laid
/// out H x W x C (channel-last), so the flat pixel index p = y*W + x used by
/// the pairwise losses has one canonical meaning.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<std::size_t> shape);

    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor ones(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double value);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    /// Extent of dimension d.
    std::size_t extent(std::size_t d) const { return shape_[d]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    /// Rank-2 access (row, col).
    double at(std::size_t r, std::size_t c) const {
        return data_[r * shape_[1] + c];
    }
    double& at(std::size_t r, std::size_t c) {
        return data_[r * shape_[1] + c];
    }

    /// Rank-3 access (y, x, c).
    double at(std::size_t y, std::size_t x, std::size_t c) const {
        return data_[(y * shape_[1] + x) * shape_[2] + c];
    }
    double& at(std::size_t y, std::size_t x, std::size_t c) {
        return data_[(y * shape_[1] + x) * shape_[2] + c];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Throws ShapeError unless every extent is >= 1 and rank is 1-4.
void validate_shape(const std::vector<std::size_t>& shape);

/// Throws ShapeError with `what` in the message unless shapes match.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

Tensor ones(const std::vector<std::size_t>& shape);

// Elementwise arithmetic. Shapes must match.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

double sum(const Tensor& t);
double mean(const Tensor& t);

/// Replicates each pixel of a rank-3 map into an f x f block.
/// output(y, x, c) == t(y / f, x / f, c).
Tensor nearest_upsample(const Tensor& t, std::size_t factor);

/// Inverse of nearest_upsample for block-constant maps: keeps the top-left
/// sample of every f x f block. Requires extents divisible by f.
Tensor block_subsample(const Tensor& t, std::size_t factor);

/// Mean over each f x f block per channel. Requires extents divisible by f.
Tensor block_average(const Tensor& t, std::size_t factor);

/// Reshapes H x W x C into (H*W) x C; pixel p = y*W + x becomes row p.
Tensor flatten_spatial(const Tensor& t);

/// Inverse of flatten_spatial given the original H and W.
Tensor unflatten_spatial(const Tensor& t, std::size_t h, std::size_t w);

}  // namespace rcdepth
