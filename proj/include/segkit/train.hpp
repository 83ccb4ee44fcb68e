#pragma once

#include <cstdint>
#include <vector>

#include "segkit/augment.hpp"
#include "segkit/metrics.hpp"
#include "segkit/optim.hpp"
#include "segkit/scene.hpp"
#include "segkit/segnet.hpp"

namespace segkit {

enum class LossKind { ce, focal, dice, lovasz };

struct TrainConfig {
    int batch_size = 8;
    int epochs = 30;
    double lr = 0.01;
    OptKind optimizer = OptKind::sgd;
    double weight_decay = 0.01;  // adamw
    double split_ratio = 0.8;    // train fraction, 4:1
    std::uint64_t seed = 0;
    LossKind loss = LossKind::lovasz;
    double lambda = 1.0;         // distillation weight
    double temperature = 2.0;    // distillation temperature
    AugmentConfig augment;
    int num_classes = 3;
};

struct EpochStats {
    double train_loss = 0.0;
    double miou = 0.0;
    double mdice = 0.0;
    double me = 0.0;
};

struct TrainResult {
    SegNet net;
    std::vector<EpochStats> trail;
};

/// Deterministic epoch loop: a fixed 4:1 split of the data, per-epoch
/// shuffling and augmentation from seed-derived streams, and a test-set
/// mIoU/mDice/ME entry per epoch.
TrainResult train(SegNet net, const std::vector<Sample>& data, const TrainConfig& cfg);

/// Same loop with the student loss extended by lambda * cwd(teacher logits,
/// student logits, T). The teacher is frozen; lambda = 0 reproduces plain
/// training bit for bit.
TrainResult distill(const SegNet& teacher, SegNet student, const std::vector<Sample>& data,
                    const TrainConfig& cfg);

/// Pooled-confusion segmentation metrics of a net over samples (inference
/// mode, evaluation augmentation).
MetricsReport evaluate(const SegNet& net, const std::vector<Sample>& samples,
                       const AugmentConfig& augment_cfg, int num_classes);

} // namespace segkit
