#pragma once

#include <functional>

#include "segkit/grid.hpp"

namespace segkit {

/// Central-difference check of an analytic gradient: perturbs every
/// coordinate of x by +-h, forms (f(x+h*e_i) - f(x-h*e_i)) / (2h) and returns
/// the maximum over coordinates of
///   |fd - analytic| / max(1, |fd|, |analytic|).
double finite_diff_check(const std::function<double(const Grid&)>& f,
                         const Grid& analytic_grad, const Grid& x, double h);

} // namespace segkit
