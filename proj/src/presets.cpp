#include "segkit/presets.hpp"

namespace segkit {

ExperimentPreset loss_comparison_preset() {
    ExperimentPreset p;
    p.scene = imbalanced_scene_config();
    p.train.epochs = 30;
    p.train.batch_size = 8;
    p.train.optimizer = OptKind::adamw;
    p.train.lr = 3e-3;
    p.train.loss = LossKind::lovasz;
    p.train.seed = 2024;
    p.dataset_size = 50;
    p.data_seed = 101;
    p.net_seed = 7;
    return p;
}

ExperimentPreset distill_preset() {
    ExperimentPreset p = loss_comparison_preset();
    p.train.lambda = 1.0;
    p.train.temperature = 2.0;
    p.data_seed = 202;
    p.net_seed = 11;
    return p;
}

ExperimentPreset pipeline_preset() {
    ExperimentPreset p;
    p.scene = SceneConfig{};
    p.train.epochs = 20;
    p.train.batch_size = 8;
    p.train.optimizer = OptKind::adamw;
    p.train.lr = 3e-3;
    p.train.loss = LossKind::lovasz;
    p.train.seed = 2024;
    p.train.augment = identity_augment_config(p.scene.height, p.scene.width);
    p.dataset_size = 50;
    p.data_seed = 303;
    p.net_seed = 13;
    return p;
}

std::vector<Sample> generate_dataset(const SceneConfig& cfg, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Sample> data;
    data.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        data.push_back(gen_scene(cfg, rng));
    }
    return data;
}

} // namespace segkit
