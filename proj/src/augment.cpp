#include "segkit/augment.hpp"

#include <algorithm>
#include <cmath>

#include "segkit/check.hpp"
#include "segkit/components.hpp"
#include "segkit/conv.hpp"

namespace segkit {

AugmentConfig identity_augment_config(int height, int width) {
    AugmentConfig cfg;
    cfg.resize_h = height;
    cfg.resize_w = width;
    cfg.crop = std::min(height, width);
    return cfg;
}

Grid resize_bilinear(const Grid& image, int out_h, int out_w) {
    require(image.rank() == 3 && image.extent(0) == 1, "resize_bilinear: image must be [1,H,W]");
    require(out_h >= 1 && out_w >= 1, "resize_bilinear: bad output extents");
    const int h = image.extent(1), w = image.extent(2);
    Grid out({1, out_h, out_w});
    const double sy = static_cast<double>(h) / out_h;
    const double sx = static_cast<double>(w) / out_w;
    for (int oy = 0; oy < out_h; ++oy) {
        const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double wy = fy - y0;
        for (int ox = 0; ox < out_w; ++ox) {
            const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, w - 1);
            const double wx = fx - x0;
            out.at(0, oy, ox) = (1.0 - wy) * ((1.0 - wx) * image.at(0, y0, x0) +
                                              wx * image.at(0, y0, x1)) +
                                wy * ((1.0 - wx) * image.at(0, y1, x0) + wx * image.at(0, y1, x1));
        }
    }
    return out;
}

LabelMask resize_nearest(const LabelMask& mask, int out_h, int out_w) {
    require(out_h >= 1 && out_w >= 1, "resize_nearest: bad output extents");
    LabelMask out(out_h, out_w);
    const double sy = static_cast<double>(mask.height) / out_h;
    const double sx = static_cast<double>(mask.width) / out_w;
    for (int oy = 0; oy < out_h; ++oy) {
        const int iy = std::min(static_cast<int>((oy + 0.5) * sy), mask.height - 1);
        for (int ox = 0; ox < out_w; ++ox) {
            const int ix = std::min(static_cast<int>((ox + 0.5) * sx), mask.width - 1);
            out.at(oy, ox) = mask.at(iy, ix);
        }
    }
    return out;
}

Sample resize_sample(const Sample& sample, int out_h, int out_w) {
    Sample out;
    out.image = resize_bilinear(sample.image, out_h, out_w);
    out.mask = resize_nearest(sample.mask, out_h, out_w);
    out.boxes = boxes_from_mask(out.mask);
    return out;
}

Sample crop_sample(const Sample& sample, int y0, int x0, int size) {
    const int h = sample.mask.height, w = sample.mask.width;
    require(size >= 1 && size <= h && size <= w, "crop_sample: crop larger than image");
    require(y0 >= 0 && x0 >= 0 && y0 + size <= h && x0 + size <= w,
            "crop_sample: window out of bounds");
    Sample out;
    out.image = Grid({1, size, size});
    out.mask = LabelMask(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            out.image.at(0, y, x) = sample.image.at(0, y0 + y, x0 + x);
            out.mask.at(y, x) = sample.mask.at(y0 + y, x0 + x);
        }
    }
    out.boxes = boxes_from_mask(out.mask);
    return out;
}

Sample flip_horizontal(const Sample& sample) {
    const int h = sample.mask.height, w = sample.mask.width;
    Sample out;
    out.image = Grid({1, h, w});
    out.mask = LabelMask(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.image.at(0, y, x) = sample.image.at(0, y, w - 1 - x);
            out.mask.at(y, x) = sample.mask.at(y, w - 1 - x);
        }
    }
    out.boxes = boxes_from_mask(out.mask);
    return out;
}

Grid sharpen(const Grid& image) {
    require(image.rank() == 3 && image.extent(0) == 1, "sharpen: image must be [1,H,W]");
    static const Grid kernel({1, 1, 3, 3}, {0, -1, 0, -1, 5, -1, 0, -1, 0});
    Grid out = conv2d(image, kernel, ConvSpec{1, 1, 1, 1});
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(out[i], 0.0, 1.0);
    }
    return out;
}

Sample augment(const Sample& sample, const AugmentConfig& cfg, Rng& rng, bool training) {
    require(cfg.crop >= 1 && cfg.crop <= cfg.resize_h && cfg.crop <= cfg.resize_w,
            "augment: crop larger than the resized image");
    Sample out = resize_sample(sample, cfg.resize_h, cfg.resize_w);
    if (!training) {
        return out;
    }
    const int y0 = rng.next_int(0, cfg.resize_h - cfg.crop);
    const int x0 = rng.next_int(0, cfg.resize_w - cfg.crop);
    out = crop_sample(out, y0, x0, cfg.crop);
    if (rng.next_bernoulli(cfg.flip_prob)) {
        out = flip_horizontal(out);
    }
    if (rng.next_bernoulli(cfg.sharpen_prob)) {
        out.image = sharpen(out.image);
    }
    return out;
}

} // namespace segkit
