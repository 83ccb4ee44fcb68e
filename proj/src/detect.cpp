#include "segkit/detect.hpp"

#include <algorithm>

#include "segkit/check.hpp"
#include "segkit/components.hpp"

namespace segkit {

BoxSet detect_blobs(const Grid& image, double intensity_threshold, double class_split) {
    require(image.rank() == 3 && image.extent(0) == 1, "detect_blobs: image must be [1,H,W]");
    require(intensity_threshold > 0.0 && intensity_threshold < 1.0,
            "detect_blobs: threshold must be in (0,1)");
    const int h = image.extent(1), w = image.extent(2);

    std::vector<int> key(static_cast<std::size_t>(h) * w, 0);
    for (std::size_t i = 0; i < key.size(); ++i) {
        key[i] = image[i] > intensity_threshold ? 1 : 0;
    }
    const ComponentSet comps = label_components(key, h, w);
    if (comps.count == 0) {
        return {};
    }

    struct Stats {
        int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
        long long area = 0;
        double intensity_sum = 0.0;
    };
    std::vector<Stats> stats(static_cast<std::size_t>(comps.count));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const int id = comps.labels[i];
            if (id == 0) {
                continue;
            }
            Stats& s = stats[static_cast<std::size_t>(id - 1)];
            if (s.area == 0) {
                s.min_x = s.max_x = x;
                s.min_y = s.max_y = y;
            } else {
                s.min_x = std::min(s.min_x, x);
                s.min_y = std::min(s.min_y, y);
                s.max_x = std::max(s.max_x, x);
                s.max_y = std::max(s.max_y, y);
            }
            ++s.area;
            s.intensity_sum += image[i];
        }
    }

    BoxSet boxes;
    for (const Stats& s : stats) {
        if (s.area < 4) {
            continue; // speckles
        }
        Box b;
        b.x = s.min_x;
        b.y = s.min_y;
        b.w = s.max_x - s.min_x + 1;
        b.h = s.max_y - s.min_y + 1;
        b.score = s.intensity_sum / static_cast<double>(s.area);
        b.class_id = *b.score < class_split ? 1 : 2;
        boxes.push_back(b);
    }
    return boxes;
}

} // namespace segkit
