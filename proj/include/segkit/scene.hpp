#pragma once

#include <utility>
#include <vector>

#include "segkit/grid.hpp"
#include "segkit/mask.hpp"
#include "segkit/metrics.hpp"
#include "segkit/rng.hpp"

namespace segkit {

/// Synthetic blob-scene generator settings. Blob centers follow a normal
/// distribution; every blob must lie strictly inside the image (placements
/// are resampled otherwise) and blobs never touch each other, so the stored
/// boxes are exactly the per-region tight boxes of the mask.
struct SceneConfig {
    int height = 64;
    int width = 64;
    int num_classes = 3; // background + one class per intensity band
    int min_blobs = 1;
    int max_blobs = 4;
    double center_mean_y = 32.0;
    double center_mean_x = 32.0;
    double center_std_y = 12.0;
    double center_std_x = 12.0;
    int min_axis = 3;
    int max_axis = 8;
    double foreground_cap = 1.0; // max fraction of foreground pixels
    double background_level = 0.10;
    double noise_std = 0.02;
    // Intensity band [lo, hi] per foreground class, in class order.
    std::vector<std::pair<double, double>> class_bands = {{0.50, 0.65}, {0.75, 0.90}};
};

/// Foreground capped at 5% of the pixels: few small blobs per scene.
SceneConfig imbalanced_scene_config();

/// One generated scene: grayscale image in [0,1], class mask, and the tight
/// bounding box of every blob (no scores).
struct Sample {
    Grid image; // [1,H,W]
    LabelMask mask;
    BoxSet boxes;
};

Sample gen_scene(const SceneConfig& cfg, Rng& rng);

} // namespace segkit
