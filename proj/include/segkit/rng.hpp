#pragma once

#include <cstdint>
#include <cmath>

#include "segkit/grid.hpp"

namespace segkit {

/// Deterministic splittable PRNG built on SplitMix64 (Steele et al. 2014).
/// The generator and the uniform/normal mappings below are fixed so that the
/// same seed yields the same sequence on every platform; std distributions
/// are implementation-defined and are deliberately not used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [lo, hi], inclusive.
    int next_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double next_normal() {
        const double u1 = 1.0 - next_double(); // (0, 1], keeps log finite
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    /// Independent child stream; the parent advances by one draw.
    Rng split() { return Rng(next_u64() ^ 0x5851F42D4C957F2DULL); }

private:
    std::uint64_t state_;
};

Grid random_uniform(std::vector<int> shape, Rng& rng, double lo = 0.0, double hi = 1.0);
Grid random_normal(std::vector<int> shape, Rng& rng, double mean = 0.0, double stddev = 1.0);

} // namespace segkit
