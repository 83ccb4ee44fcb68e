#include "segkit/components.hpp"

#include <algorithm>

#include "segkit/check.hpp"

namespace segkit {

ComponentSet label_components(const std::vector<int>& key, int height, int width) {
    require(key.size() == static_cast<std::size_t>(height) * width,
            "label_components: key size mismatch");
    ComponentSet out;
    out.labels.assign(key.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < key.size(); ++start) {
        if (key[start] == 0 || out.labels[start] != 0) {
            continue;
        }
        const int id = ++out.count;
        const int value = key[start];
        stack.clear();
        stack.push_back(start);
        out.labels[start] = id;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const int y = static_cast<int>(i) / width;
            const int x = static_cast<int>(i) % width;
            const int ny[4] = {y - 1, y + 1, y, y};
            const int nx[4] = {x, x, x - 1, x + 1};
            for (int k = 0; k < 4; ++k) {
                if (ny[k] < 0 || ny[k] >= height || nx[k] < 0 || nx[k] >= width) {
                    continue;
                }
                const std::size_t j = static_cast<std::size_t>(ny[k]) * width + nx[k];
                if (out.labels[j] == 0 && key[j] == value) {
                    out.labels[j] = id;
                    stack.push_back(j);
                }
            }
        }
    }
    return out;
}

BoxSet boxes_from_mask(const LabelMask& mask) {
    const ComponentSet comps = label_components(mask.labels, mask.height, mask.width);
    if (comps.count == 0) {
        return {};
    }
    struct Extents {
        int min_x, min_y, max_x, max_y, class_id;
        bool seen = false;
    };
    std::vector<Extents> ext(static_cast<std::size_t>(comps.count));
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const int id = comps.labels[static_cast<std::size_t>(y) * mask.width + x];
            if (id == 0) {
                continue;
            }
            Extents& e = ext[static_cast<std::size_t>(id - 1)];
            if (!e.seen) {
                e = {x, y, x, y, mask.at(y, x), true};
            } else {
                e.min_x = std::min(e.min_x, x);
                e.min_y = std::min(e.min_y, y);
                e.max_x = std::max(e.max_x, x);
                e.max_y = std::max(e.max_y, y);
            }
        }
    }
    BoxSet boxes;
    boxes.reserve(ext.size());
    for (const Extents& e : ext) {
        Box b;
        b.x = e.min_x;
        b.y = e.min_y;
        b.w = e.max_x - e.min_x + 1;
        b.h = e.max_y - e.min_y + 1;
        b.class_id = e.class_id;
        boxes.push_back(b);
    }
    return boxes;
}

} // namespace segkit
