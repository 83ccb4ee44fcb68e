#pragma once

#include <vector>

#include "segkit/grid.hpp"

namespace segkit {

enum class OptKind { sgd, adamw };

struct OptHyper {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01; // adamw only, decoupled
};

/// Per-parameter first/second moments for adamw; unused by sgd.
struct OptState {
    std::vector<Grid> m, v;
    long long step = 0;
};

OptState make_opt_state(const std::vector<const Grid*>& params);

/// sgd: w -= lr * g.  adamw: bias-corrected adaptive moments with decoupled
/// weight decay, w -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * w).
void optimizer_step(OptKind kind, const std::vector<Grid*>& params,
                    const std::vector<const Grid*>& grads, OptState& state,
                    const OptHyper& hyper);

} // namespace segkit
