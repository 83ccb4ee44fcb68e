#pragma once

#include <utility>

#include "segkit/grid.hpp"
#include "segkit/rng.hpp"

namespace segkit {

/// Softened softmax along one axis: out_i = exp(x_i/T) / sum_j exp(x_j/T),
/// computed with max subtraction. Every slice along the axis sums to 1.
/// Large T flattens the distribution toward uniform.
Grid softmax_axis(const Grid& x, int axis, double temperature = 1.0);

/// Inverted dropout. In training mode each element is zeroed independently
/// with probability rate and survivors are scaled by 1/(1-rate); the returned
/// mask holds the multiplicative factor per element so the backward pass is
/// exact. In inference mode both output and mask are the identity.
std::pair<Grid, Grid> dropout(const Grid& x, double rate, Rng& rng, bool training);

} // namespace segkit
