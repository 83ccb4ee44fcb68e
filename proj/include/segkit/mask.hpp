#pragma once

#include <cstddef>
#include <vector>

namespace segkit {

/// 2-D map of integer class indices; 0 is background.
struct LabelMask {
    int height = 0;
    int width = 0;
    std::vector<int> labels;

    LabelMask() = default;
    LabelMask(int h, int w) : height(h), width(w), labels(static_cast<std::size_t>(h) * w, 0) {}
    LabelMask(int h, int w, std::vector<int> values)
        : height(h), width(w), labels(std::move(values)) {}

    std::size_t size() const { return labels.size(); }
    int at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    int& at(int y, int x) { return labels[static_cast<std::size_t>(y) * width + x]; }
    bool same_shape(const LabelMask& o) const { return height == o.height && width == o.width; }
};

} // namespace segkit
