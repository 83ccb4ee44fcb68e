#pragma once

#include <vector>

#include "segkit/mask.hpp"
#include "segkit/metrics.hpp"

namespace segkit {

/// 4-connected components of equal nonzero key values. Component ids are
/// assigned in raster order of each component's first pixel, starting at 1;
/// key 0 stays 0.
struct ComponentSet {
    std::vector<int> labels;
    int count = 0;
};

ComponentSet label_components(const std::vector<int>& key, int height, int width);

/// Tight bounding box of every connected same-class region of a label mask,
/// in component-discovery (raster) order. Boxes carry the region's class id
/// and no score.
BoxSet boxes_from_mask(const LabelMask& mask);

} // namespace segkit
