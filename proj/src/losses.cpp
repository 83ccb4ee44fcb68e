#include "segkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segkit/check.hpp"
#include "segkit/tensor_ops.hpp"

namespace segkit {

namespace {

void check_logits_mask(const Grid& logits, const LabelMask& truth, const char* who) {
    require(logits.rank() == 3, std::string(who) + ": logits must be [C,H,W]");
    require(logits.extent(0) >= 2, std::string(who) + ": need at least 2 classes");
    require(logits.extent(1) == truth.height && logits.extent(2) == truth.width,
            std::string(who) + ": logits/mask shape mismatch");
    const int c = logits.extent(0);
    for (int label : truth.labels) {
        require(label >= 0 && label < c, std::string(who) + ": label out of range");
    }
}

/// Per-pixel log-softmax over the channel axis of a [C,H,W] grid.
Grid log_softmax_channels(const Grid& logits) {
    const int c = logits.extent(0);
    const std::size_t n = logits.size() / static_cast<std::size_t>(c);
    Grid out(logits.shape());
    for (std::size_t i = 0; i < n; ++i) {
        double mx = logits[i];
        for (int k = 1; k < c; ++k) {
            mx = std::max(mx, logits[static_cast<std::size_t>(k) * n + i]);
        }
        double sum = 0.0;
        for (int k = 0; k < c; ++k) {
            sum += std::exp(logits[static_cast<std::size_t>(k) * n + i] - mx);
        }
        const double lse = mx + std::log(sum);
        for (int k = 0; k < c; ++k) {
            const std::size_t idx = static_cast<std::size_t>(k) * n + i;
            out[idx] = logits[idx] - lse;
        }
    }
    return out;
}

/// Chain a gradient w.r.t. softmax probabilities back to the logits, pixel by
/// pixel: dz_k = p_k * (gp_k - sum_c gp_c * p_c).
Grid chain_softmax(const Grid& probs, const Grid& grad_probs) {
    const int c = probs.extent(0);
    const std::size_t n = probs.size() / static_cast<std::size_t>(c);
    Grid out(probs.shape());
    for (std::size_t i = 0; i < n; ++i) {
        double inner = 0.0;
        for (int k = 0; k < c; ++k) {
            const std::size_t idx = static_cast<std::size_t>(k) * n + i;
            inner += grad_probs[idx] * probs[idx];
        }
        for (int k = 0; k < c; ++k) {
            const std::size_t idx = static_cast<std::size_t>(k) * n + i;
            out[idx] = probs[idx] * (grad_probs[idx] - inner);
        }
    }
    return out;
}

LossResult cross_entropy_impl(const Grid& logits, const LabelMask& truth, double alpha) {
    const int c = logits.extent(0);
    const std::size_t n = truth.size();
    const Grid logp = log_softmax_channels(logits);

    double value = 0.0;
    Grid grad(logits.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const int t = truth.labels[i];
        value -= alpha * logp[static_cast<std::size_t>(t) * n + i];
        for (int k = 0; k < c; ++k) {
            const std::size_t idx = static_cast<std::size_t>(k) * n + i;
            const double p = std::exp(logp[idx]);
            grad[idx] = alpha * (p - (k == t ? 1.0 : 0.0)) / static_cast<double>(n);
        }
    }
    return {value / static_cast<double>(n), std::move(grad)};
}

} // namespace

double jaccard_index(const LabelMask& pred, const LabelMask& truth, int class_id) {
    require(pred.same_shape(truth), "jaccard_index: mask shapes differ");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred.labels[i] == class_id;
        const bool t = truth.labels[i] == class_id;
        inter += (p && t) ? 1 : 0;
        uni += (p || t) ? 1 : 0;
    }
    if (uni == 0) {
        return 1.0; // 0/0 = 1 convention
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double jaccard_loss(const LabelMask& pred, const LabelMask& truth, int class_id) {
    return 1.0 - jaccard_index(pred, truth, class_id);
}

LossResult cross_entropy_loss(const Grid& logits, const LabelMask& truth) {
    check_logits_mask(logits, truth, "cross_entropy_loss");
    return cross_entropy_impl(logits, truth, 1.0);
}

LossResult focal_loss(const Grid& logits, const LabelMask& truth, double gamma, double alpha) {
    check_logits_mask(logits, truth, "focal_loss");
    require(gamma >= 0.0, "focal_loss: gamma must be >= 0");
    require(alpha > 0.0 && alpha <= 1.0, "focal_loss: alpha must be in (0, 1]");
    if (gamma == 0.0) {
        return cross_entropy_impl(logits, truth, alpha);
    }

    const int c = logits.extent(0);
    const std::size_t n = truth.size();
    const Grid logp = log_softmax_channels(logits);

    double value = 0.0;
    Grid grad(logits.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const int t = truth.labels[i];
        const double lp = logp[static_cast<std::size_t>(t) * n + i];
        const double pt = std::exp(lp);
        const double u = 1.0 - pt;
        // At u == 0 both the loss term and the modulating bracket vanish.
        const double mod = u > 0.0 ? std::pow(u, gamma) : 0.0;
        const double bracket =
            u > 0.0 ? mod - gamma * pt * std::pow(u, gamma - 1.0) * lp : 0.0;
        value -= alpha * mod * lp;
        for (int k = 0; k < c; ++k) {
            const std::size_t idx = static_cast<std::size_t>(k) * n + i;
            const double p = std::exp(logp[idx]);
            const double delta = k == t ? 1.0 : 0.0;
            grad[idx] = -alpha * (delta - p) * bracket / static_cast<double>(n);
        }
    }
    return {value / static_cast<double>(n), std::move(grad)};
}

LossResult dice_loss(const Grid& logits, const LabelMask& truth, double epsilon) {
    check_logits_mask(logits, truth, "dice_loss");
    require(epsilon > 0.0, "dice_loss: epsilon must be > 0");

    const int c = logits.extent(0);
    const std::size_t n = truth.size();
    const Grid probs = softmax_axis(logits, 0);

    std::vector<double> inter(c, 0.0), psum(c, 0.0), tsum(c, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int t = truth.labels[i];
        tsum[t] += 1.0;
        for (int k = 0; k < c; ++k) {
            const double p = probs[static_cast<std::size_t>(k) * n + i];
            psum[k] += p;
            if (k == t) {
                inter[k] += p;
            }
        }
    }

    double mean_dice = 0.0;
    std::vector<double> denom(c), num(c);
    for (int k = 0; k < c; ++k) {
        num[k] = 2.0 * inter[k] + epsilon;
        denom[k] = psum[k] + tsum[k] + epsilon;
        mean_dice += num[k] / denom[k];
    }
    mean_dice /= static_cast<double>(c);

    Grid grad_probs(probs.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const int t = truth.labels[i];
        for (int k = 0; k < c; ++k) {
            const std::size_t idx = static_cast<std::size_t>(k) * n + i;
            const double tk = k == t ? 1.0 : 0.0;
            const double ddice = (2.0 * tk * denom[k] - num[k]) / (denom[k] * denom[k]);
            grad_probs[idx] = -ddice / static_cast<double>(c);
        }
    }
    return {1.0 - mean_dice, chain_softmax(probs, grad_probs)};
}

std::vector<double> lovasz_grad(const std::vector<double>& sorted_truth_indicators) {
    require(!sorted_truth_indicators.empty(), "lovasz_grad: empty vector");
    const std::size_t n = sorted_truth_indicators.size();
    double total = 0.0;
    for (double v : sorted_truth_indicators) {
        require(v == 0.0 || v == 1.0, "lovasz_grad: indicators must be 0/1");
        total += v;
    }
    std::vector<double> g(n);
    double cum_ind = 0.0, cum_comp = 0.0, prev_jac = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        cum_ind += sorted_truth_indicators[k];
        cum_comp += 1.0 - sorted_truth_indicators[k];
        const double inter = total - cum_ind;
        const double uni = total + cum_comp;
        const double jac = 1.0 - inter / uni;
        g[k] = k == 0 ? jac : jac - prev_jac;
        prev_jac = jac;
    }
    return g;
}

LossResult lovasz_softmax_loss(const Grid& logits, const LabelMask& truth) {
    check_logits_mask(logits, truth, "lovasz_softmax_loss");
    const int c = logits.extent(0);
    const std::size_t n = truth.size();
    require(n >= 1, "lovasz_softmax_loss: need at least one pixel");

    const Grid probs = softmax_axis(logits, 0);

    std::vector<bool> present(c, false);
    for (int label : truth.labels) {
        present[label] = true;
    }
    int n_present = 0;
    for (int k = 0; k < c; ++k) {
        n_present += present[k] ? 1 : 0;
    }

    double value = 0.0;
    Grid grad_probs(probs.shape());
    std::vector<double> errors(n);
    std::vector<std::size_t> order(n);
    std::vector<double> indicators(n);
    for (int k = 0; k < c; ++k) {
        if (!present[k]) {
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double p = probs[static_cast<std::size_t>(k) * n + i];
            errors[i] = truth.labels[i] == k ? 1.0 - p : p;
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Stable descending sort; ties stay in ascending pixel order.
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return errors[a] > errors[b]; });
        for (std::size_t r = 0; r < n; ++r) {
            indicators[r] = truth.labels[order[r]] == k ? 1.0 : 0.0;
        }
        const std::vector<double> g = lovasz_grad(indicators);
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t i = order[r];
            value += errors[i] * g[r];
            const double sign = truth.labels[i] == k ? -1.0 : 1.0;
            grad_probs[static_cast<std::size_t>(k) * n + i] =
                sign * g[r] / static_cast<double>(n_present);
        }
    }
    value /= static_cast<double>(n_present);
    return {value, chain_softmax(probs, grad_probs)};
}

} // namespace segkit
