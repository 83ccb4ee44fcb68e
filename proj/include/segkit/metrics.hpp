#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "segkit/mask.hpp"

namespace segkit {

/// Axis-aligned box: (x, y) is the top-left pixel, the box covers
/// [x, x+w) x [y, y+h). Predictions carry a confidence score.
struct Box {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    int class_id = 0;
    std::optional<double> score;
};

using BoxSet = std::vector<Box>;

/// One-vs-rest pixel counts per class; tp+fp+fn+tn equals the pixel count
/// for every class.
struct ConfusionCounts {
    int num_classes = 0;
    std::vector<long long> tp, fp, fn, tn;

    explicit ConfusionCounts(int classes = 0)
        : num_classes(classes), tp(classes, 0), fp(classes, 0), fn(classes, 0), tn(classes, 0) {}

    void add(const ConfusionCounts& other);
};

/// Per-class and mean metric values. Segmentation fills the confusion-based
/// fields; detection fills the mAP fields and per-class P/R/F1 at the
/// matching threshold.
struct MetricsReport {
    std::vector<double> precision, recall, f1, iou, dice; // per class
    double mean_precision = 0.0, mean_recall = 0.0, mean_f1 = 0.0;
    double miou = 0.0, mdice = 0.0, me = 0.0;
    double map50 = 0.0, map_50_95 = 0.0;
};

ConfusionCounts confusion_counts(const LabelMask& pred, const LabelMask& truth, int num_classes);

/// P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R). A 0/0 resolves to 1 when
/// the class is absent from both prediction and truth, else to 0.
struct ClassScore {
    double precision, recall, f1;
};
std::vector<ClassScore> precision_recall_f1(const ConfusionCounts& c);

double box_iou(const Box& a, const Box& b);

/// Ranks same-class predictions by descending score (stable on ties) and
/// greedily matches each to the unmatched truth box of highest IoU at or
/// above the threshold. Returns (score, is_tp) in rank order.
std::vector<std::pair<double, bool>> match_detections(const BoxSet& preds, const BoxSet& truths,
                                                      double iou_threshold);

/// Literal rank-scan AP: sum over ranks of P(k) * delta_recall(k), no
/// interpolation. With no truths it is 1 when there are also no predictions
/// and 0 otherwise.
double average_precision(const std::vector<std::pair<double, bool>>& ranked, int n_truth);

/// Per-threshold mean-over-classes AP plus the mean over all thresholds.
/// Boxes of all classes go in together; partitioning happens internally.
struct MeanApResult {
    std::vector<double> map_at;
    double range_mean = 0.0;
};
MeanApResult mean_ap(const BoxSet& preds, const BoxSet& truths,
                     const std::vector<double>& thresholds);

/// Multi-image variant: detections are matched within their own image and
/// the ranked lists are pooled per class before the AP scan.
MeanApResult mean_ap(const std::vector<BoxSet>& preds, const std::vector<BoxSet>& truths,
                     const std::vector<double>& thresholds);

/// The ten thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> map_range_thresholds();

/// Confusion-based segmentation metrics: per-class IoU/Dice/P/R/F1, their
/// means, and the foreground/background misclassification error. Classes
/// absent from both masks contribute 1 to the means (the 0/0 = 1 convention).
MetricsReport segmentation_report(const LabelMask& pred, const LabelMask& truth, int num_classes);
MetricsReport segmentation_report(const ConfusionCounts& counts);

/// Detection metrics over one or more images: mAP@0.5, mAP@0.5:0.95, and
/// pooled precision/recall/F1 from matching at `iou_threshold`.
MetricsReport detection_report(const std::vector<BoxSet>& preds,
                               const std::vector<BoxSet>& truths, double iou_threshold);

} // namespace segkit
