#include "segkit/grid.hpp"

#include <numeric>

#include "segkit/check.hpp"

namespace segkit {

namespace {

std::size_t checked_numel(const std::vector<int>& shape) {
    require(!shape.empty() && shape.size() <= 4, "Grid: shape must have 1 to 4 axes");
    std::size_t n = 1;
    for (int e : shape) {
        require(e > 0, "Grid: extents must be positive");
        n *= static_cast<std::size_t>(e);
    }
    return n;
}

} // namespace

Grid::Grid(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(checked_numel(shape_), 0.0);
}

Grid::Grid(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    require(checked_numel(shape_) == data_.size(), "Grid: product(shape) != data length");
}

Grid Grid::full(std::vector<int> shape, double value) {
    Grid g(std::move(shape));
    for (double& v : g.data_) {
        v = value;
    }
    return g;
}

double dot(const Grid& a, const Grid& b) {
    require(a.size() == b.size(), "dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

} // namespace segkit
