#pragma once

#include "segkit/scene.hpp"
#include "segkit/train.hpp"

namespace segkit {

/// A pinned desk-scale experiment: dataset recipe plus training settings.
/// The seeds are part of the recipe; rerunning a preset reproduces its
/// numbers bit for bit.
struct ExperimentPreset {
    SceneConfig scene;
    TrainConfig train;
    int dataset_size = 50;
    std::uint64_t data_seed = 0;
    std::uint64_t net_seed = 0;
};

/// Loss comparison on imbalanced scenes (foreground capped at 5%): the same
/// run with cfg.loss swapped between lovasz and ce orders the losses.
ExperimentPreset loss_comparison_preset();

/// Teacher/student transfer: train the wide net first, then the narrow
/// student with and without the channel-wise term.
ExperimentPreset distill_preset();

/// Detect-then-segment end to end on balanced scenes at native geometry.
ExperimentPreset pipeline_preset();

std::vector<Sample> generate_dataset(const SceneConfig& cfg, int count, std::uint64_t seed);

} // namespace segkit
