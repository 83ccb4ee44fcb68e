#pragma once

#include "segkit/grid.hpp"
#include "segkit/metrics.hpp"

namespace segkit {

/// Deterministic blob detector: threshold the intensity image, label the
/// 4-connected components, and emit one tight box per component of at least
/// four pixels. The score is the component's mean intensity; the class is 1
/// below class_split and 2 at or above it, matching the generator's two
/// intensity bands.
BoxSet detect_blobs(const Grid& image, double intensity_threshold, double class_split = 0.70);

} // namespace segkit
