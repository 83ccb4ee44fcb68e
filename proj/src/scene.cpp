#include "segkit/scene.hpp"

#include <algorithm>
#include <cmath>

#include "segkit/check.hpp"
#include "segkit/components.hpp"

namespace segkit {

SceneConfig imbalanced_scene_config() {
    SceneConfig cfg;
    cfg.min_blobs = 1;
    cfg.max_blobs = 2;
    cfg.min_axis = 2;
    cfg.max_axis = 4;
    cfg.foreground_cap = 0.05;
    return cfg;
}

namespace {

struct BlobPixels {
    std::vector<std::size_t> pixels;
    int class_id;
    double base_intensity;
};

void check_config(const SceneConfig& cfg) {
    require(cfg.height >= 8 && cfg.width >= 8, "gen_scene: image too small");
    require(cfg.num_classes == static_cast<int>(cfg.class_bands.size()) + 1,
            "gen_scene: class count must be bands + background");
    require(cfg.min_blobs >= 0 && cfg.max_blobs >= cfg.min_blobs, "gen_scene: bad blob range");
    require(cfg.min_axis >= 1 && cfg.max_axis >= cfg.min_axis, "gen_scene: bad axis range");
    // A blob with the smallest axes must fit strictly inside the borders.
    const int side = std::min(cfg.height, cfg.width);
    require(2 * cfg.min_axis + 1 <= side - 2, "gen_scene: no in-bounds blob exists");
    require(cfg.foreground_cap > 0.0 && cfg.foreground_cap <= 1.0, "gen_scene: bad foreground cap");
    for (const auto& [lo, hi] : cfg.class_bands) {
        require(lo >= 0.0 && hi <= 1.0 && lo <= hi, "gen_scene: bad intensity band");
    }
}

} // namespace

Sample gen_scene(const SceneConfig& cfg, Rng& rng) {
    check_config(cfg);
    const int h = cfg.height, w = cfg.width;
    const std::size_t total = static_cast<std::size_t>(h) * w;

    LabelMask mask(h, w);
    Grid image = Grid::full({1, h, w}, cfg.background_level);
    std::vector<bool> occupied(total, false);

    const int n_blobs = rng.next_int(cfg.min_blobs, cfg.max_blobs);
    std::size_t fg_pixels = 0;
    std::vector<std::size_t> candidate;

    for (int blob = 0; blob < n_blobs; ++blob) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            const int cy = static_cast<int>(std::lround(cfg.center_mean_y +
                                                        cfg.center_std_y * rng.next_normal()));
            const int cx = static_cast<int>(std::lround(cfg.center_mean_x +
                                                        cfg.center_std_x * rng.next_normal()));
            const int ay = rng.next_int(cfg.min_axis, cfg.max_axis);
            const int ax = rng.next_int(cfg.min_axis, cfg.max_axis);
            const int band = rng.next_int(0, static_cast<int>(cfg.class_bands.size()) - 1);
            const auto [lo, hi] = cfg.class_bands[static_cast<std::size_t>(band)];
            const double base = lo + (hi - lo) * rng.next_double();

            // Strictly inside the image so no box touches a boundary.
            if (cy - ay < 1 || cy + ay > h - 2 || cx - ax < 1 || cx + ax > w - 2) {
                continue;
            }

            candidate.clear();
            bool clear = true;
            for (int y = cy - ay; y <= cy + ay && clear; ++y) {
                for (int x = cx - ax; x <= cx + ax; ++x) {
                    const double dy = static_cast<double>(y - cy) / ay;
                    const double dx = static_cast<double>(x - cx) / ax;
                    if (dy * dy + dx * dx > 1.0) {
                        continue;
                    }
                    // Keep a one-pixel moat around existing blobs so regions
                    // never merge.
                    for (int yy = y - 1; yy <= y + 1 && clear; ++yy) {
                        for (int xx = x - 1; xx <= x + 1; ++xx) {
                            if (yy >= 0 && yy < h && xx >= 0 && xx < w &&
                                occupied[static_cast<std::size_t>(yy) * w + xx]) {
                                clear = false;
                                break;
                            }
                        }
                    }
                    if (!clear) {
                        break;
                    }
                    candidate.push_back(static_cast<std::size_t>(y) * w + x);
                }
            }
            if (!clear || candidate.empty()) {
                continue;
            }
            if (static_cast<double>(fg_pixels + candidate.size()) >
                cfg.foreground_cap * static_cast<double>(total)) {
                break; // the cap leaves no room for this blob
            }
            for (std::size_t p : candidate) {
                occupied[p] = true;
                mask.labels[p] = band + 1;
                image[p] = base;
            }
            fg_pixels += candidate.size();
            break;
        }
    }

    for (std::size_t i = 0; i < total; ++i) {
        image[i] = std::clamp(image[i] + cfg.noise_std * rng.next_normal(), 0.0, 1.0);
    }

    Sample s;
    s.boxes = boxes_from_mask(mask);
    s.image = std::move(image);
    s.mask = std::move(mask);
    return s;
}

} // namespace segkit
