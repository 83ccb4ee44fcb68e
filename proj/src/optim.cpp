#include "segkit/optim.hpp"

#include <cmath>

#include "segkit/check.hpp"

namespace segkit {

OptState make_opt_state(const std::vector<const Grid*>& params) {
    OptState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Grid* p : params) {
        s.m.emplace_back(p->shape());
        s.v.emplace_back(p->shape());
    }
    return s;
}

void optimizer_step(OptKind kind, const std::vector<Grid*>& params,
                    const std::vector<const Grid*>& grads, OptState& state,
                    const OptHyper& hyper) {
    require(params.size() == grads.size(), "optimizer_step: param/grad count mismatch");

    if (kind == OptKind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            Grid& w = *params[i];
            const Grid& g = *grads[i];
            require(w.size() == g.size(), "optimizer_step: shape mismatch");
            for (std::size_t j = 0; j < w.size(); ++j) {
                w[j] -= hyper.lr * g[j];
            }
        }
        return;
    }

    require(state.m.size() == params.size() && state.v.size() == params.size(),
            "optimizer_step: state not initialized for these params");
    ++state.step;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Grid& w = *params[i];
        const Grid& g = *grads[i];
        Grid& m = state.m[i];
        Grid& v = state.v[i];
        require(w.size() == g.size() && w.size() == m.size(), "optimizer_step: shape mismatch");
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = hyper.beta1 * m[j] + (1.0 - hyper.beta1) * g[j];
            v[j] = hyper.beta2 * v[j] + (1.0 - hyper.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            w[j] -= hyper.lr * (m_hat / (std::sqrt(v_hat) + hyper.eps) + hyper.weight_decay * w[j]);
        }
    }
}

} // namespace segkit
