#include "segkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segkit/check.hpp"

namespace segkit {

namespace {

constexpr int kStride = 4;

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

} // namespace

PipelineResult run_pipeline(const Grid& image, const PipelineConfig& cfg, const SegNet& net) {
    require(image.rank() == 3 && image.extent(0) == 1, "run_pipeline: image must be [1,H,W]");
    const int h = image.extent(1), w = image.extent(2);

    PipelineResult result;
    result.boxes = detect_blobs(image, cfg.det_threshold, cfg.class_split);
    result.mask = LabelMask(h, w);
    if (result.boxes.empty()) {
        return result;
    }

    std::vector<std::size_t> order(result.boxes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *result.boxes[a].score > *result.boxes[b].score;
    });

    Rng silent(0);
    if (cfg.full_frame) {
        require(h % kStride == 0 && w % kStride == 0,
                "run_pipeline: full-frame mode needs stride-divisible extents");
        const LabelMask full = argmax_channels(segnet_forward(net, image, silent, false));
        for (std::size_t oi : order) {
            const Box& b = result.boxes[oi];
            const int y0 = static_cast<int>(b.y), x0 = static_cast<int>(b.x);
            const int bh = static_cast<int>(b.h), bw = static_cast<int>(b.w);
            for (int y = y0; y < y0 + bh; ++y) {
                for (int x = x0; x < x0 + bw; ++x) {
                    result.mask.at(y, x) = full.at(y, x);
                }
            }
        }
        return result;
    }

    for (std::size_t oi : order) {
        const Box& b = result.boxes[oi];
        const int y0 = static_cast<int>(b.y), x0 = static_cast<int>(b.x);
        const int bh = static_cast<int>(b.h), bw = static_cast<int>(b.w);
        const int ch = round_up(bh, kStride), cw = round_up(bw, kStride);

        Grid crop({1, ch, cw});
        for (int y = 0; y < ch; ++y) {
            for (int x = 0; x < cw; ++x) {
                const int sy = y0 + y, sx = x0 + x;
                crop.at(0, y, x) =
                    sy >= 0 && sy < h && sx >= 0 && sx < w ? image.at(0, sy, sx) : 0.0;
            }
        }
        const LabelMask pred = argmax_channels(segnet_forward(net, crop, silent, false));
        // Paste the original box region only; the stride padding stays out.
        for (int y = 0; y < bh; ++y) {
            for (int x = 0; x < bw; ++x) {
                const int sy = y0 + y, sx = x0 + x;
                if (sy >= 0 && sy < h && sx >= 0 && sx < w) {
                    result.mask.at(sy, sx) = pred.at(y, x);
                }
            }
        }
    }
    return result;
}

} // namespace segkit
