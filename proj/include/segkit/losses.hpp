#pragma once

#include "segkit/grid.hpp"
#include "segkit/mask.hpp"

namespace segkit {

/// Scalar loss value plus its analytic gradient with respect to the logits
/// (same shape as the logits that produced it).
struct LossResult {
    double value = 0.0;
    Grid grad;
};

/// Intersection over union of the class-c pixel sets, with 0/0 = 1 when the
/// class is absent from both masks.
double jaccard_index(const LabelMask& pred, const LabelMask& truth, int class_id);

/// 1 - jaccard_index.
double jaccard_loss(const LabelMask& pred, const LabelMask& truth, int class_id);

/// Mean over pixels of -log softmax(logits)[truth]; logits are [C,H,W].
LossResult cross_entropy_loss(const Grid& logits, const LabelMask& truth);

/// Mean over pixels of -alpha * (1-p_t)^gamma * log(p_t). gamma == 0 takes
/// the cross-entropy path exactly, so focal(0, 1) == cross_entropy bit for
/// bit.
LossResult focal_loss(const Grid& logits, const LabelMask& truth, double gamma = 2.0,
                      double alpha = 0.25);

/// Soft Dice loss: 1 - mean over classes of (2*sum p_c*t_c + eps) /
/// (sum p_c + sum t_c + eps) with p the softmax probabilities and t the
/// one-hot truth.
LossResult dice_loss(const Grid& logits, const LabelMask& truth, double epsilon = 1e-6);

/// Lovasz-softmax: for each class present in the truth mask the per-pixel
/// errors (1-p for the class's own pixels, p elsewhere) are sorted in
/// descending order (stable, ties by ascending pixel index) and weighted by
/// the discrete derivative of the extended Jaccard loss; the result is the
/// mean over present classes. The sorting permutation is held constant in the
/// gradient, the standard subgradient choice.
LossResult lovasz_softmax_loss(const Grid& logits, const LabelMask& truth);

/// Discrete derivative of the Jaccard-loss extension along a sorted 0/1
/// indicator vector: with G the indicator sum, inter_k = G - cumsum(ind)_k,
/// union_k = G + cumsum(1-ind)_k, jac_k = 1 - inter_k/union_k; returns the
/// first differences of jac.
std::vector<double> lovasz_grad(const std::vector<double>& sorted_truth_indicators);

} // namespace segkit
