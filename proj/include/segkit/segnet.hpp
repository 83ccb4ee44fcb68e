#pragma once

#include <string>
#include <utility>
#include <vector>

#include "segkit/grid.hpp"
#include "segkit/mask.hpp"
#include "segkit/rng.hpp"

namespace segkit {

/// Tiny fully-convolutional segmentation net: a stride-1 3x3 conv, a
/// stride-4 6x6 conv (total stride 4), one fractionally-strided 4x4 decoder
/// conv that restores the input resolution, dropout, and a 1x1 classifier.
/// The teacher runs widths (16, 32); the student is the same topology at
/// (4, 8).
struct SegNetConfig {
    int width1 = 16;
    int width2 = 32;
    int num_classes = 3;
    double dropout_rate = 0.1;
};

SegNetConfig student_config();

struct SegNet {
    SegNetConfig cfg;
    Grid enc1_w, enc1_b; // [w1,1,3,3], [w1]
    Grid enc2_w, enc2_b; // [w2,w1,6,6], [w2]
    Grid dec_w, dec_b;   // [w2,w1,4,4], [w1] (transposed-conv layout)
    Grid cls_w, cls_b;   // [C,w1,1,1], [C]

    std::vector<Grid*> params();
    std::vector<const Grid*> params() const;
    std::vector<std::pair<std::string, Grid*>> named_params();
    std::vector<std::pair<std::string, const Grid*>> named_params() const;
};

/// He-normal weights, zero biases.
SegNet make_segnet(const SegNetConfig& cfg, Rng& rng);

/// Everything the backward pass needs from one forward call.
struct SegNetCache {
    Grid input;
    Grid z1, a1, z2, a2, z3, a3;
    Grid dropped, drop_mask;
};

/// Runs the net on a [1,H,W] image with H and W divisible by 4 (the encoder
/// stride); returns [C,H,W] logits. Dropout draws from rng only in training
/// mode.
Grid segnet_forward(const SegNet& net, const Grid& image, Rng& rng, bool training,
                    SegNetCache* cache = nullptr);

struct SegNetGrads {
    Grid enc1_w, enc1_b, enc2_w, enc2_b, dec_w, dec_b, cls_w, cls_b;

    std::vector<Grid*> params();
    std::vector<const Grid*> params() const;
    void accumulate(const SegNetGrads& other, double scale);
};

SegNetGrads zero_grads(const SegNet& net);

/// Exact reverse-mode gradients for every parameter given d(loss)/d(logits).
SegNetGrads segnet_backward(const SegNet& net, const SegNetCache& cache, const Grid& loss_grad);

/// Per-pixel argmax over the channel axis; ties go to the lowest class.
LabelMask argmax_channels(const Grid& logits);

} // namespace segkit
