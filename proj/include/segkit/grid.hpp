#pragma once

#include <cstddef>
#include <vector>

namespace segkit {

/// Dense row-major array of doubles with 1 to 4 axes. The universal numeric
/// carrier for images, activation maps, logits and network parameters.
/// Axis order follows the dense-prediction convention: [channel, height,
/// width] for maps and [out_channel, in_channel, kh, kw] for kernels.
class Grid {
public:
    Grid() = default;

    /// Zero-initialized grid of the given shape.
    explicit Grid(std::vector<int> shape);

    /// Grid wrapping existing values; product(shape) must equal data.size().
    Grid(std::vector<int> shape, std::vector<double> data);

    static Grid full(std::vector<int> shape, double value);

    int rank() const { return static_cast<int>(shape_.size()); }
    int extent(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
    const std::vector<int>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Rank-specific indexers; callers are responsible for matching the rank.
    double& at(int a) { return data_[static_cast<std::size_t>(a)]; }
    double at(int a) const { return data_[static_cast<std::size_t>(a)]; }
    double& at(int a, int b) { return data_[offset(a, b)]; }
    double at(int a, int b) const { return data_[offset(a, b)]; }
    double& at(int a, int b, int c) { return data_[offset(a, b, c)]; }
    double at(int a, int b, int c) const { return data_[offset(a, b, c)]; }
    double& at(int a, int b, int c, int d) { return data_[offset(a, b, c, d)]; }
    double at(int a, int b, int c, int d) const { return data_[offset(a, b, c, d)]; }

    bool same_shape(const Grid& other) const { return shape_ == other.shape_; }

private:
    std::size_t offset(int a, int b) const {
        return static_cast<std::size_t>(a) * shape_[1] + b;
    }
    std::size_t offset(int a, int b, int c) const {
        return (static_cast<std::size_t>(a) * shape_[1] + b) * shape_[2] + c;
    }
    std::size_t offset(int a, int b, int c, int d) const {
        return ((static_cast<std::size_t>(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d;
    }

    std::vector<int> shape_;
    std::vector<double> data_;
};

/// Sum of elementwise products; grids must have equal size.
double dot(const Grid& a, const Grid& b);

} // namespace segkit
