#pragma once

#include "segkit/detect.hpp"
#include "segkit/segnet.hpp"

namespace segkit {

/// Detect-then-segment settings. In crop mode each detected box is cropped
/// (padded up to stride-divisible extents; the padding is never pasted back)
/// and segmented on its own; in full-frame mode the whole image is segmented
/// once and labels outside every detected box are cleared. Either way all
/// nonzero output pixels lie inside some detected box.
struct PipelineConfig {
    double det_threshold = 0.35;
    double class_split = 0.70;
    bool full_frame = false;
};

struct PipelineResult {
    BoxSet boxes;
    LabelMask mask;
};

/// detect_blobs -> per-box (or full-frame) segmentation -> paste into a
/// background-initialized mask. Boxes are processed in descending score
/// order and later pastes overwrite earlier ones on overlap.
PipelineResult run_pipeline(const Grid& image, const PipelineConfig& cfg, const SegNet& net);

} // namespace segkit
