#include "segkit/segnet.hpp"

#include <cmath>

#include "segkit/check.hpp"
#include "segkit/conv.hpp"
#include "segkit/tensor_ops.hpp"

namespace segkit {

namespace {

// Encoder: a stride-1 3x3 conv keeps full-resolution edge features, then a
// stride-4 6x6 conv brings the total stride to 4. The decoder restores the
// resolution in one fractionally-strided step: (H/4 - 1)*4 + 4 - 0 = H.
constexpr ConvSpec kEnc1Spec{1, 1, 1, 1};
constexpr ConvSpec kEnc2Spec{4, 4, 1, 1};
constexpr ConvSpec kDecSpec{4, 4, 0, 0};
constexpr ConvSpec kClsSpec{1, 1, 0, 0};

Grid he_normal(std::vector<int> shape, Rng& rng) {
    const int fan_in = shape[1] * shape[2] * shape[3];
    return random_normal(std::move(shape), rng, 0.0, std::sqrt(2.0 / fan_in));
}

void add_channel_bias(Grid& maps, const Grid& bias) {
    const int c = maps.extent(0);
    const std::size_t n = maps.size() / static_cast<std::size_t>(c);
    for (int k = 0; k < c; ++k) {
        const double b = bias.at(k);
        for (std::size_t i = 0; i < n; ++i) {
            maps[static_cast<std::size_t>(k) * n + i] += b;
        }
    }
}

Grid relu(const Grid& x) {
    Grid out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
    return out;
}

Grid relu_backward(const Grid& pre_activation, const Grid& grad) {
    Grid out(grad.shape());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        out[i] = pre_activation[i] > 0.0 ? grad[i] : 0.0;
    }
    return out;
}

Grid bias_grad(const Grid& grad_maps) {
    const int c = grad_maps.extent(0);
    const std::size_t n = grad_maps.size() / static_cast<std::size_t>(c);
    Grid out({c});
    for (int k = 0; k < c; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += grad_maps[static_cast<std::size_t>(k) * n + i];
        }
        out.at(k) = s;
    }
    return out;
}

} // namespace

SegNetConfig student_config() {
    SegNetConfig cfg;
    cfg.width1 = 4;
    cfg.width2 = 8;
    return cfg;
}

std::vector<Grid*> SegNet::params() {
    return {&enc1_w, &enc1_b, &enc2_w, &enc2_b, &dec_w, &dec_b, &cls_w, &cls_b};
}

std::vector<const Grid*> SegNet::params() const {
    return {&enc1_w, &enc1_b, &enc2_w, &enc2_b, &dec_w, &dec_b, &cls_w, &cls_b};
}

std::vector<std::pair<std::string, Grid*>> SegNet::named_params() {
    return {{"enc1.weight", &enc1_w}, {"enc1.bias", &enc1_b}, {"enc2.weight", &enc2_w},
            {"enc2.bias", &enc2_b},   {"dec.weight", &dec_w}, {"dec.bias", &dec_b},
            {"cls.weight", &cls_w},   {"cls.bias", &cls_b}};
}

std::vector<std::pair<std::string, const Grid*>> SegNet::named_params() const {
    return {{"enc1.weight", &enc1_w}, {"enc1.bias", &enc1_b}, {"enc2.weight", &enc2_w},
            {"enc2.bias", &enc2_b},   {"dec.weight", &dec_w}, {"dec.bias", &dec_b},
            {"cls.weight", &cls_w},   {"cls.bias", &cls_b}};
}

SegNet make_segnet(const SegNetConfig& cfg, Rng& rng) {
    require(cfg.width1 >= 1 && cfg.width2 >= 1 && cfg.num_classes >= 2, "make_segnet: bad config");
    require(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0, "make_segnet: bad dropout rate");
    SegNet net;
    net.cfg = cfg;
    net.enc1_w = he_normal({cfg.width1, 1, 3, 3}, rng);
    net.enc1_b = Grid({cfg.width1});
    net.enc2_w = he_normal({cfg.width2, cfg.width1, 6, 6}, rng);
    net.enc2_b = Grid({cfg.width2});
    net.dec_w = he_normal({cfg.width2, cfg.width1, 4, 4}, rng);
    net.dec_b = Grid({cfg.width1});
    net.cls_w = he_normal({cfg.num_classes, cfg.width1, 1, 1}, rng);
    net.cls_b = Grid({cfg.num_classes});
    return net;
}

Grid segnet_forward(const SegNet& net, const Grid& image, Rng& rng, bool training,
                    SegNetCache* cache) {
    require(image.rank() == 3 && image.extent(0) == 1, "segnet_forward: image must be [1,H,W]");
    require(image.extent(1) % 4 == 0 && image.extent(2) % 4 == 0,
            "segnet_forward: extents must be divisible by the total stride (4)");

    Grid z1 = conv2d(image, net.enc1_w, kEnc1Spec);
    add_channel_bias(z1, net.enc1_b);
    Grid a1 = relu(z1);

    Grid z2 = conv2d(a1, net.enc2_w, kEnc2Spec);
    add_channel_bias(z2, net.enc2_b);
    Grid a2 = relu(z2);

    Grid z3 = transposed_conv2d(a2, net.dec_w, kDecSpec);
    add_channel_bias(z3, net.dec_b);
    Grid a3 = relu(z3);

    auto [dropped, mask] = dropout(a3, net.cfg.dropout_rate, rng, training);

    Grid logits = conv2d(dropped, net.cls_w, kClsSpec);
    add_channel_bias(logits, net.cls_b);

    if (cache != nullptr) {
        cache->input = image;
        cache->z1 = std::move(z1);
        cache->a1 = std::move(a1);
        cache->z2 = std::move(z2);
        cache->a2 = std::move(a2);
        cache->z3 = std::move(z3);
        cache->a3 = std::move(a3);
        cache->dropped = std::move(dropped);
        cache->drop_mask = std::move(mask);
    }
    return logits;
}

std::vector<Grid*> SegNetGrads::params() {
    return {&enc1_w, &enc1_b, &enc2_w, &enc2_b, &dec_w, &dec_b, &cls_w, &cls_b};
}

std::vector<const Grid*> SegNetGrads::params() const {
    return {&enc1_w, &enc1_b, &enc2_w, &enc2_b, &dec_w, &dec_b, &cls_w, &cls_b};
}

void SegNetGrads::accumulate(const SegNetGrads& other, double scale) {
    auto dst = params();
    auto src = other.params();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        require(dst[i]->size() == src[i]->size(), "SegNetGrads::accumulate: shape mismatch");
        for (std::size_t j = 0; j < dst[i]->size(); ++j) {
            (*dst[i])[j] += scale * (*src[i])[j];
        }
    }
}

SegNetGrads zero_grads(const SegNet& net) {
    SegNetGrads g;
    g.enc1_w = Grid(net.enc1_w.shape());
    g.enc1_b = Grid(net.enc1_b.shape());
    g.enc2_w = Grid(net.enc2_w.shape());
    g.enc2_b = Grid(net.enc2_b.shape());
    g.dec_w = Grid(net.dec_w.shape());
    g.dec_b = Grid(net.dec_b.shape());
    g.cls_w = Grid(net.cls_w.shape());
    g.cls_b = Grid(net.cls_b.shape());
    return g;
}

SegNetGrads segnet_backward(const SegNet& net, const SegNetCache& cache, const Grid& loss_grad) {
    require(cache.dropped.size() > 0, "segnet_backward: cache is empty");
    require(loss_grad.rank() == 3 && loss_grad.extent(0) == net.cfg.num_classes &&
                loss_grad.extent(1) == cache.input.extent(1) &&
                loss_grad.extent(2) == cache.input.extent(2),
            "segnet_backward: loss_grad shape mismatch");

    SegNetGrads g;

    const ConvGrads cls = conv2d_backward(cache.dropped, net.cls_w, kClsSpec, loss_grad);
    g.cls_w = cls.kernel;
    g.cls_b = bias_grad(loss_grad);

    Grid grad_a3(cls.input.shape());
    for (std::size_t i = 0; i < grad_a3.size(); ++i) {
        grad_a3[i] = cls.input[i] * cache.drop_mask[i];
    }
    const Grid grad_z3 = relu_backward(cache.z3, grad_a3);

    const ConvGrads dec = transposed_conv2d_backward(cache.a2, net.dec_w, kDecSpec, grad_z3);
    g.dec_w = dec.kernel;
    g.dec_b = bias_grad(grad_z3);

    const Grid grad_z2 = relu_backward(cache.z2, dec.input);
    const ConvGrads enc2 = conv2d_backward(cache.a1, net.enc2_w, kEnc2Spec, grad_z2);
    g.enc2_w = enc2.kernel;
    g.enc2_b = bias_grad(grad_z2);

    const Grid grad_z1 = relu_backward(cache.z1, enc2.input);
    const ConvGrads enc1 = conv2d_backward(cache.input, net.enc1_w, kEnc1Spec, grad_z1);
    g.enc1_w = enc1.kernel;
    g.enc1_b = bias_grad(grad_z1);

    return g;
}

LabelMask argmax_channels(const Grid& logits) {
    require(logits.rank() == 3, "argmax_channels: logits must be [C,H,W]");
    const int c = logits.extent(0);
    const int h = logits.extent(1), w = logits.extent(2);
    const std::size_t n = static_cast<std::size_t>(h) * w;
    LabelMask out(h, w);
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_v = logits[i];
        for (int k = 1; k < c; ++k) {
            const double v = logits[static_cast<std::size_t>(k) * n + i];
            if (v > best_v) {
                best_v = v;
                best = k;
            }
        }
        out.labels[i] = best;
    }
    return out;
}

} // namespace segkit
