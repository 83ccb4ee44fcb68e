#pragma once

#include <vector>

#include "segkit/grid.hpp"
#include "segkit/losses.hpp"
#include "segkit/rng.hpp"

namespace segkit {

/// Teacher and student activation maps with matching spatial extents, plus
/// the distillation temperature.
struct ActivationPair {
    Grid teacher; // [C,H,W]
    Grid student; // [C',H,W]
    double temperature = 1.0;
};

/// 1x1 convolution mapping student channels onto teacher channels when the
/// counts differ; kernel is [C, C', 1, 1].
struct ChannelAdapter {
    Grid kernel;
};

/// Identity adapter for C' == C, otherwise zero-mean small random weights.
ChannelAdapter make_adapter(int teacher_channels, int student_channels, Rng& rng);

/// Temperature-softened softmax of a logit vector.
std::vector<double> soften_logits(const std::vector<double>& logits, double temperature);

/// Classical distillation loss: T^2 * KL(soften(teacher,T) || soften(student,T))
/// per spatial position of a [C,H,W] logit map, averaged over positions.
/// Gradient is with respect to the student logits; the teacher gets none.
LossResult kd_loss(const Grid& student_logits, const Grid& teacher_logits, double temperature);

/// Per-channel spatial softmax of a [C,H,W] map: each channel becomes a
/// probability distribution over its W*H locations.
Grid channel_softmax(const Grid& map, double temperature);

/// Per-pixel linear map across channels (a 1x1 convolution).
Grid adapt_channels(const Grid& student_maps, const ChannelAdapter& adapter);

/// Channel-wise distillation loss
///   (T^2/C) * sum_c sum_i phi(teacher)_{c,i} * log(phi(teacher)_{c,i} / phi(student)_{c,i})
/// with phi the per-channel spatial softmax. The gradient is with respect to
/// the raw student activations, chained through the adapter when one is
/// supplied; adapter_grad_out, when non-null, receives the gradient with
/// respect to the adapter kernel so it can be trained jointly.
LossResult cwd_loss(const ActivationPair& pair, const ChannelAdapter* adapter = nullptr,
                    Grid* adapter_grad_out = nullptr);

} // namespace segkit
