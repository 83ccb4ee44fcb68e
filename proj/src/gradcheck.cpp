#include "segkit/gradcheck.hpp"

#include <cmath>

#include "segkit/check.hpp"

namespace segkit {

double finite_diff_check(const std::function<double(const Grid&)>& f,
                         const Grid& analytic_grad, const Grid& x, double h) {
    require(analytic_grad.size() == x.size(), "finite_diff_check: gradient/input size mismatch");
    require(h > 0.0, "finite_diff_check: h must be > 0");

    Grid probe = x;
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + h;
        const double fp = f(probe);
        probe[i] = saved - h;
        const double fm = f(probe);
        probe[i] = saved;

        const double fd = (fp - fm) / (2.0 * h);
        const double a = analytic_grad[i];
        const double denom = std::max({1.0, std::fabs(fd), std::fabs(a)});
        worst = std::max(worst, std::fabs(fd - a) / denom);
    }
    return worst;
}

} // namespace segkit
