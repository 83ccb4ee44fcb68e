#pragma once

#include "segkit/scene.hpp"

namespace segkit {

/// Training-time preprocessing: resize to the unified extents, take a random
/// square crop, flip horizontally with probability flip_prob, sharpen with
/// probability sharpen_prob. Evaluation applies the resize only. Masks move
/// with nearest-neighbor sampling and boxes are recomputed from the
/// transformed mask. Defaults scale the production recipe (unify to a wide
/// strip, crop a full-height square) down to the 64x64 regime.
struct AugmentConfig {
    int resize_h = 32;
    int resize_w = 128;
    int crop = 32;
    double flip_prob = 0.5;
    double sharpen_prob = 0.1;
};

/// Identity geometry: no resize, crop of the full extent.
AugmentConfig identity_augment_config(int height, int width);

Sample augment(const Sample& sample, const AugmentConfig& cfg, Rng& rng, bool training);

Sample resize_sample(const Sample& sample, int out_h, int out_w);
Sample crop_sample(const Sample& sample, int y0, int x0, int size);
Sample flip_horizontal(const Sample& sample);

/// 3x3 sharpening kernel [[0,-1,0],[-1,5,-1],[0,-1,0]] with zero padding,
/// clamped to [0,1].
Grid sharpen(const Grid& image);

Grid resize_bilinear(const Grid& image, int out_h, int out_w);
LabelMask resize_nearest(const LabelMask& mask, int out_h, int out_w);

} // namespace segkit
