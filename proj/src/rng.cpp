#include "segkit/rng.hpp"

namespace segkit {

Grid random_uniform(std::vector<int> shape, Rng& rng, double lo, double hi) {
    Grid g(std::move(shape));
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = lo + (hi - lo) * rng.next_double();
    }
    return g;
}

Grid random_normal(std::vector<int> shape, Rng& rng, double mean, double stddev) {
    Grid g(std::move(shape));
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = mean + stddev * rng.next_normal();
    }
    return g;
}

} // namespace segkit
