#include "segkit/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "segkit/check.hpp"

namespace segkit {

void ConfusionCounts::add(const ConfusionCounts& other) {
    require(num_classes == other.num_classes, "ConfusionCounts::add: class count mismatch");
    for (int c = 0; c < num_classes; ++c) {
        tp[c] += other.tp[c];
        fp[c] += other.fp[c];
        fn[c] += other.fn[c];
        tn[c] += other.tn[c];
    }
}

ConfusionCounts confusion_counts(const LabelMask& pred, const LabelMask& truth, int num_classes) {
    require(pred.same_shape(truth), "confusion_counts: mask shapes differ");
    require(num_classes >= 1, "confusion_counts: need at least one class");
    ConfusionCounts c(num_classes);
    const long long total = static_cast<long long>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int p = pred.labels[i];
        const int t = truth.labels[i];
        require(p >= 0 && p < num_classes && t >= 0 && t < num_classes,
                "confusion_counts: label out of range");
        if (p == t) {
            ++c.tp[p];
        } else {
            ++c.fp[p];
            ++c.fn[t];
        }
    }
    for (int k = 0; k < num_classes; ++k) {
        c.tn[k] = total - c.tp[k] - c.fp[k] - c.fn[k];
    }
    return c;
}

std::vector<ClassScore> precision_recall_f1(const ConfusionCounts& c) {
    std::vector<ClassScore> out(static_cast<std::size_t>(c.num_classes));
    for (int k = 0; k < c.num_classes; ++k) {
        const long long tp = c.tp[k], fp = c.fp[k], fn = c.fn[k];
        const bool absent_both = tp + fp == 0 && tp + fn == 0;
        double p, r;
        if (tp + fp > 0) {
            p = static_cast<double>(tp) / static_cast<double>(tp + fp);
        } else {
            p = absent_both ? 1.0 : 0.0;
        }
        if (tp + fn > 0) {
            r = static_cast<double>(tp) / static_cast<double>(tp + fn);
        } else {
            r = absent_both ? 1.0 : 0.0;
        }
        const double f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        out[static_cast<std::size_t>(k)] = {p, r, f1};
    }
    return out;
}

double box_iou(const Box& a, const Box& b) {
    require(a.w > 0 && a.h > 0 && b.w > 0 && b.h > 0, "box_iou: extents must be positive");
    const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    const double inter = iw * ih;
    return inter / (a.w * a.h + b.w * b.h - inter);
}

std::vector<std::pair<double, bool>> match_detections(const BoxSet& preds, const BoxSet& truths,
                                                      double iou_threshold) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        require(preds[a].score.has_value() && preds[b].score.has_value(),
                "match_detections: predictions need scores");
        return *preds[a].score > *preds[b].score;
    });
    if (preds.size() == 1) {
        require(preds[0].score.has_value(), "match_detections: predictions need scores");
    }

    std::vector<bool> used(truths.size(), false);
    std::vector<std::pair<double, bool>> ranked;
    ranked.reserve(preds.size());
    for (std::size_t pi : order) {
        double best = 0.0;
        std::size_t best_t = truths.size();
        for (std::size_t ti = 0; ti < truths.size(); ++ti) {
            if (used[ti]) {
                continue;
            }
            const double iou = box_iou(preds[pi], truths[ti]);
            if (iou >= iou_threshold && iou > best) {
                best = iou;
                best_t = ti;
            }
        }
        const bool tp = best_t < truths.size();
        if (tp) {
            used[best_t] = true;
        }
        ranked.emplace_back(*preds[pi].score, tp);
    }
    return ranked;
}

double average_precision(const std::vector<std::pair<double, bool>>& ranked, int n_truth) {
    require(n_truth >= 0, "average_precision: negative truth count");
    if (n_truth == 0) {
        return ranked.empty() ? 1.0 : 0.0;
    }
    double ap = 0.0;
    long long tp = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (ranked[k].second) {
            ++tp;
            const double precision_at_k = static_cast<double>(tp) / static_cast<double>(k + 1);
            ap += precision_at_k / static_cast<double>(n_truth);
        }
    }
    return ap;
}

std::vector<double> map_range_thresholds() {
    std::vector<double> t(10);
    for (int i = 0; i < 10; ++i) {
        t[static_cast<std::size_t>(i)] = 0.50 + 0.05 * i;
    }
    return t;
}

namespace {

std::vector<int> class_union(const std::vector<BoxSet>& preds, const std::vector<BoxSet>& truths) {
    std::set<int> ids;
    for (const auto& set : preds) {
        for (const auto& b : set) {
            ids.insert(b.class_id);
        }
    }
    for (const auto& set : truths) {
        for (const auto& b : set) {
            ids.insert(b.class_id);
        }
    }
    return {ids.begin(), ids.end()};
}

BoxSet filter_class(const BoxSet& boxes, int class_id) {
    BoxSet out;
    for (const auto& b : boxes) {
        if (b.class_id == class_id) {
            out.push_back(b);
        }
    }
    return out;
}

/// Pooled ranked list for one class across images, matched per image.
std::vector<std::pair<double, bool>> pooled_ranked(const std::vector<BoxSet>& preds,
                                                   const std::vector<BoxSet>& truths, int class_id,
                                                   double threshold, int* n_truth_out) {
    std::vector<std::pair<double, bool>> pooled;
    int n_truth = 0;
    for (std::size_t img = 0; img < preds.size(); ++img) {
        const BoxSet p = filter_class(preds[img], class_id);
        const BoxSet t = filter_class(truths[img], class_id);
        n_truth += static_cast<int>(t.size());
        const auto ranked = match_detections(p, t, threshold);
        pooled.insert(pooled.end(), ranked.begin(), ranked.end());
    }
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    if (n_truth_out != nullptr) {
        *n_truth_out = n_truth;
    }
    return pooled;
}

} // namespace

MeanApResult mean_ap(const std::vector<BoxSet>& preds, const std::vector<BoxSet>& truths,
                     const std::vector<double>& thresholds) {
    require(preds.size() == truths.size(), "mean_ap: image counts differ");
    require(!thresholds.empty(), "mean_ap: no thresholds");
    const std::vector<int> classes = class_union(preds, truths);

    MeanApResult result;
    result.map_at.reserve(thresholds.size());
    for (double thr : thresholds) {
        double sum = 0.0;
        for (int c : classes) {
            int n_truth = 0;
            const auto ranked = pooled_ranked(preds, truths, c, thr, &n_truth);
            sum += average_precision(ranked, n_truth);
        }
        result.map_at.push_back(classes.empty() ? 0.0 : sum / static_cast<double>(classes.size()));
    }
    result.range_mean =
        std::accumulate(result.map_at.begin(), result.map_at.end(), 0.0) /
        static_cast<double>(result.map_at.size());
    return result;
}

MeanApResult mean_ap(const BoxSet& preds, const BoxSet& truths,
                     const std::vector<double>& thresholds) {
    return mean_ap(std::vector<BoxSet>{preds}, std::vector<BoxSet>{truths}, thresholds);
}

MetricsReport segmentation_report(const ConfusionCounts& c) {
    MetricsReport r;
    const int n = c.num_classes;
    const auto prf = precision_recall_f1(c);
    r.precision.resize(n);
    r.recall.resize(n);
    r.f1.resize(n);
    r.iou.resize(n);
    r.dice.resize(n);
    for (int k = 0; k < n; ++k) {
        const long long denom_iou = c.tp[k] + c.fp[k] + c.fn[k];
        const double iou =
            denom_iou > 0 ? static_cast<double>(c.tp[k]) / static_cast<double>(denom_iou) : 1.0;
        const double dice = denom_iou > 0 ? 2.0 * static_cast<double>(c.tp[k]) /
                                                static_cast<double>(2 * c.tp[k] + c.fp[k] + c.fn[k])
                                          : 1.0;
        r.precision[k] = prf[k].precision;
        r.recall[k] = prf[k].recall;
        r.f1[k] = prf[k].f1;
        r.iou[k] = iou;
        r.dice[k] = dice;
        r.mean_precision += prf[k].precision;
        r.mean_recall += prf[k].recall;
        r.mean_f1 += prf[k].f1;
        r.miou += iou;
        r.mdice += dice;
    }
    r.mean_precision /= n;
    r.mean_recall /= n;
    r.mean_f1 /= n;
    r.miou /= n;
    r.mdice /= n;

    // Foreground = any nonzero class, so the correctly-background pixels are
    // tp[0] and the correctly-foreground pixels are tn[0].
    const long long total = c.tp[0] + c.fp[0] + c.fn[0] + c.tn[0];
    if (total > 0) {
        r.me = 1.0 - static_cast<double>(c.tp[0] + c.tn[0]) / static_cast<double>(total);
    }
    return r;
}

MetricsReport segmentation_report(const LabelMask& pred, const LabelMask& truth, int num_classes) {
    return segmentation_report(confusion_counts(pred, truth, num_classes));
}

MetricsReport detection_report(const std::vector<BoxSet>& preds,
                               const std::vector<BoxSet>& truths, double iou_threshold) {
    require(preds.size() == truths.size(), "detection_report: image counts differ");
    MetricsReport r;
    const auto range = mean_ap(preds, truths, map_range_thresholds());
    r.map50 = range.map_at.front();
    r.map_50_95 = range.range_mean;

    const std::vector<int> classes = class_union(preds, truths);
    for (int c : classes) {
        int n_truth = 0;
        const auto ranked = pooled_ranked(preds, truths, c, iou_threshold, &n_truth);
        long long tp = 0;
        for (const auto& [score, is_tp] : ranked) {
            tp += is_tp ? 1 : 0;
        }
        const long long n_pred = static_cast<long long>(ranked.size());
        const bool absent_both = n_pred == 0 && n_truth == 0;
        const double p = n_pred > 0 ? static_cast<double>(tp) / static_cast<double>(n_pred)
                                    : (absent_both ? 1.0 : 0.0);
        const double rc = n_truth > 0 ? static_cast<double>(tp) / static_cast<double>(n_truth)
                                      : (absent_both ? 1.0 : 0.0);
        const double f1 = p + rc > 0.0 ? 2.0 * p * rc / (p + rc) : 0.0;
        r.precision.push_back(p);
        r.recall.push_back(rc);
        r.f1.push_back(f1);
        r.mean_precision += p;
        r.mean_recall += rc;
        r.mean_f1 += f1;
    }
    if (!classes.empty()) {
        const double n = static_cast<double>(classes.size());
        r.mean_precision /= n;
        r.mean_recall /= n;
        r.mean_f1 /= n;
    }
    return r;
}

} // namespace segkit
