#include "segkit/distill.hpp"

#include <cmath>

#include "segkit/check.hpp"
#include "segkit/conv.hpp"
#include "segkit/rng.hpp"

namespace segkit {

namespace {

/// Log of the per-channel spatial softmax, computed with max subtraction so
/// the result stays finite for any finite input.
Grid log_channel_softmax(const Grid& map, double temperature) {
    const int c = map.extent(0);
    const std::size_t n = map.size() / static_cast<std::size_t>(c);
    Grid out(map.shape());
    for (int k = 0; k < c; ++k) {
        const std::size_t base = static_cast<std::size_t>(k) * n;
        double mx = map[base];
        for (std::size_t i = 1; i < n; ++i) {
            mx = std::max(mx, map[base + i]);
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += std::exp((map[base + i] - mx) / temperature);
        }
        const double log_denom = std::log(sum);
        for (std::size_t i = 0; i < n; ++i) {
            out[base + i] = (map[base + i] - mx) / temperature - log_denom;
        }
    }
    return out;
}

void check_map(const Grid& map, const char* who) {
    require(map.rank() == 3, std::string(who) + ": map must be [C,H,W]");
}

} // namespace

ChannelAdapter make_adapter(int teacher_channels, int student_channels, Rng& rng) {
    require(teacher_channels > 0 && student_channels > 0, "make_adapter: channel counts must be > 0");
    Grid kernel({teacher_channels, student_channels, 1, 1});
    if (teacher_channels == student_channels) {
        for (int c = 0; c < teacher_channels; ++c) {
            kernel.at(c, c, 0, 0) = 1.0;
        }
    } else {
        const double scale = 0.1 / std::sqrt(static_cast<double>(student_channels));
        for (std::size_t i = 0; i < kernel.size(); ++i) {
            kernel[i] = scale * rng.next_normal();
        }
    }
    return ChannelAdapter{std::move(kernel)};
}

std::vector<double> soften_logits(const std::vector<double>& logits, double temperature) {
    require(temperature > 0.0, "soften_logits: temperature must be > 0");
    require(!logits.empty(), "soften_logits: empty logit vector");
    double mx = logits[0];
    for (double v : logits) {
        mx = std::max(mx, v);
    }
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp((logits[i] - mx) / temperature);
        sum += out[i];
    }
    for (double& v : out) {
        v /= sum;
    }
    return out;
}

LossResult kd_loss(const Grid& student_logits, const Grid& teacher_logits, double temperature) {
    require(temperature > 0.0, "kd_loss: temperature must be > 0");
    require(student_logits.same_shape(teacher_logits), "kd_loss: logit shapes differ");
    require(student_logits.rank() >= 1, "kd_loss: need a class axis");

    const int c = student_logits.extent(0);
    const std::size_t n = student_logits.size() / static_cast<std::size_t>(c);
    const double t2 = temperature * temperature;

    double value = 0.0;
    Grid grad(student_logits.shape());
    std::vector<double> zs(c), zt(c);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < c; ++k) {
            zs[k] = student_logits[static_cast<std::size_t>(k) * n + i];
            zt[k] = teacher_logits[static_cast<std::size_t>(k) * n + i];
        }
        const std::vector<double> q = soften_logits(zs, temperature);
        const std::vector<double> p = soften_logits(zt, temperature);
        for (int k = 0; k < c; ++k) {
            if (p[k] > 0.0) {
                value += t2 * p[k] * (std::log(p[k]) - std::log(q[k]));
            }
            grad[static_cast<std::size_t>(k) * n + i] =
                temperature * (q[k] - p[k]) / static_cast<double>(n);
        }
    }
    return {value / static_cast<double>(n), std::move(grad)};
}

Grid channel_softmax(const Grid& map, double temperature) {
    check_map(map, "channel_softmax");
    require(temperature > 0.0, "channel_softmax: temperature must be > 0");
    Grid logp = log_channel_softmax(map, temperature);
    for (std::size_t i = 0; i < logp.size(); ++i) {
        logp[i] = std::exp(logp[i]);
    }
    return logp;
}

Grid adapt_channels(const Grid& student_maps, const ChannelAdapter& adapter) {
    check_map(student_maps, "adapt_channels");
    require(adapter.kernel.rank() == 4 && adapter.kernel.extent(2) == 1 &&
                adapter.kernel.extent(3) == 1,
            "adapt_channels: adapter kernel must be [C,C',1,1]");
    require(adapter.kernel.extent(1) == student_maps.extent(0),
            "adapt_channels: adapter input channels do not match student maps");
    return conv2d(student_maps, adapter.kernel, ConvSpec{});
}

LossResult cwd_loss(const ActivationPair& pair, const ChannelAdapter* adapter,
                    Grid* adapter_grad_out) {
    check_map(pair.teacher, "cwd_loss");
    check_map(pair.student, "cwd_loss");
    require(pair.temperature > 0.0, "cwd_loss: temperature must be > 0");
    require(pair.teacher.extent(1) == pair.student.extent(1) &&
                pair.teacher.extent(2) == pair.student.extent(2),
            "cwd_loss: teacher/student spatial extents differ");

    const Grid* mapped = &pair.student;
    Grid adapted;
    if (adapter != nullptr) {
        adapted = adapt_channels(pair.student, *adapter);
        mapped = &adapted;
    }
    require(mapped->extent(0) == pair.teacher.extent(0),
            "cwd_loss: channel mismatch and no adapter supplied");

    const int c = pair.teacher.extent(0);
    const std::size_t n = pair.teacher.size() / static_cast<std::size_t>(c);
    const double t = pair.temperature;
    const double scale = t * t / static_cast<double>(c);

    const Grid log_pt = log_channel_softmax(pair.teacher, t);
    const Grid log_ps = log_channel_softmax(*mapped, t);

    double value = 0.0;
    Grid grad_mapped(mapped->shape());
    for (std::size_t i = 0; i < log_pt.size(); ++i) {
        const double pt = std::exp(log_pt[i]);
        const double ps = std::exp(log_ps[i]);
        value += scale * pt * (log_pt[i] - log_ps[i]);
        grad_mapped[i] = (t / static_cast<double>(c)) * (ps - pt);
    }

    if (adapter == nullptr) {
        return {value, std::move(grad_mapped)};
    }

    // Chain through the 1x1 adapter: grad_student = K^T grad_mapped per pixel,
    // grad_kernel[c,c'] = sum_i grad_mapped[c,i] * student[c',i].
    const int cs = pair.student.extent(0);
    Grid grad_student(pair.student.shape());
    for (int a = 0; a < c; ++a) {
        for (int b = 0; b < cs; ++b) {
            const double w = adapter->kernel.at(a, b, 0, 0);
            for (std::size_t i = 0; i < n; ++i) {
                grad_student[static_cast<std::size_t>(b) * n + i] +=
                    w * grad_mapped[static_cast<std::size_t>(a) * n + i];
            }
        }
    }
    if (adapter_grad_out != nullptr) {
        Grid gk({c, cs, 1, 1});
        for (int a = 0; a < c; ++a) {
            for (int b = 0; b < cs; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    s += grad_mapped[static_cast<std::size_t>(a) * n + i] *
                         pair.student[static_cast<std::size_t>(b) * n + i];
                }
                gk.at(a, b, 0, 0) = s;
            }
        }
        *adapter_grad_out = std::move(gk);
    }
    return {value, std::move(grad_student)};
}

} // namespace segkit
