#include "segkit/tensor_ops.hpp"

#include <cmath>

#include "segkit/check.hpp"

namespace segkit {

Grid softmax_axis(const Grid& x, int axis, double temperature) {
    require(axis >= 0 && axis < x.rank(), "softmax_axis: axis out of range");
    require(temperature > 0.0, "softmax_axis: temperature must be > 0");

    const int n = x.extent(axis);
    std::size_t inner = 1;
    for (int a = axis + 1; a < x.rank(); ++a) {
        inner *= static_cast<std::size_t>(x.extent(a));
    }
    const std::size_t slices = x.size() / static_cast<std::size_t>(n);
    const std::size_t outer = slices / inner;

    Grid out(x.shape());
    const double* in = x.data();
    double* o = out.data();
    const long long total = static_cast<long long>(slices);
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < total; ++s) {
        const std::size_t ob = static_cast<std::size_t>(s) / inner;
        const std::size_t ib = static_cast<std::size_t>(s) % inner;
        const std::size_t base = ob * static_cast<std::size_t>(n) * inner + ib;
        (void)outer;

        double mx = in[base];
        for (int j = 1; j < n; ++j) {
            mx = std::max(mx, in[base + static_cast<std::size_t>(j) * inner]);
        }
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const std::size_t idx = base + static_cast<std::size_t>(j) * inner;
            const double e = std::exp((in[idx] - mx) / temperature);
            o[idx] = e;
            sum += e;
        }
        for (int j = 0; j < n; ++j) {
            o[base + static_cast<std::size_t>(j) * inner] /= sum;
        }
    }
    return out;
}

std::pair<Grid, Grid> dropout(const Grid& x, double rate, Rng& rng, bool training) {
    require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0, 1)");
    Grid out(x.shape());
    Grid mask = Grid::full(x.shape(), 1.0);
    if (!training || rate == 0.0) {
        out = x;
        return {std::move(out), std::move(mask)};
    }
    const double scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = rng.next_double() < rate ? 0.0 : scale;
        mask[i] = m;
        out[i] = x[i] * m;
    }
    return {std::move(out), std::move(mask)};
}

} // namespace segkit
