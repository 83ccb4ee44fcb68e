#include "segkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segkit/check.hpp"
#include "segkit/distill.hpp"
#include "segkit/losses.hpp"

namespace segkit {

namespace {

LossResult task_loss(LossKind kind, const Grid& logits, const LabelMask& truth) {
    switch (kind) {
        case LossKind::ce:
            return cross_entropy_loss(logits, truth);
        case LossKind::focal:
            return focal_loss(logits, truth);
        case LossKind::dice:
            return dice_loss(logits, truth);
        case LossKind::lovasz:
            return lovasz_softmax_loss(logits, truth);
    }
    throw std::invalid_argument("task_loss: unknown loss kind");
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.next_int(0, static_cast<int>(i) - 1))]);
    }
}

TrainResult train_impl(SegNet net, const SegNet* teacher, const std::vector<Sample>& data,
                       const TrainConfig& cfg) {
    require(data.size() >= 2, "train: need at least two samples to split");
    require(cfg.epochs >= 0 && cfg.batch_size >= 1, "train: bad epoch/batch settings");
    require(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0, "train: split ratio must be in (0,1)");
    if (teacher != nullptr) {
        require(teacher->cfg.num_classes == net.cfg.num_classes,
                "distill: teacher/student class counts differ");
    }

    Rng root(cfg.seed);
    Rng rng_split = root.split();
    Rng rng_shuffle = root.split();
    Rng rng_augment = root.split();
    Rng rng_dropout = root.split();

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_indices(order, rng_split);
    const std::size_t n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(cfg.split_ratio * static_cast<double>(data.size()))),
        1, data.size() - 1);
    const std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
    const std::vector<std::size_t> test_idx(order.begin() + n_train, order.end());

    std::vector<Sample> test_set;
    test_set.reserve(test_idx.size());
    for (std::size_t i : test_idx) {
        test_set.push_back(data[i]);
    }

    OptState opt_state = make_opt_state(static_cast<const SegNet&>(net).params());
    OptHyper hyper;
    hyper.lr = cfg.lr;
    hyper.weight_decay = cfg.weight_decay;

    TrainResult result;
    std::vector<std::size_t> epoch_order = train_idx;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_indices(epoch_order, rng_shuffle);
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < epoch_order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(epoch_order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            SegNetGrads batch_grads = zero_grads(net);
            const double inv = 1.0 / static_cast<double>(end - start);
            for (std::size_t k = start; k < end; ++k) {
                const Sample aug = augment(data[epoch_order[k]], cfg.augment, rng_augment, true);
                SegNetCache cache;
                Grid logits = segnet_forward(net, aug.image, rng_dropout, true, &cache);
                LossResult loss = task_loss(cfg.loss, logits, aug.mask);
                if (teacher != nullptr && cfg.lambda != 0.0) {
                    Rng silent(0);
                    Grid teacher_logits = segnet_forward(*teacher, aug.image, silent, false);
                    ActivationPair pair{std::move(teacher_logits), std::move(logits),
                                        cfg.temperature};
                    const LossResult cwd = cwd_loss(pair);
                    loss.value += cfg.lambda * cwd.value;
                    for (std::size_t j = 0; j < loss.grad.size(); ++j) {
                        loss.grad[j] += cfg.lambda * cwd.grad[j];
                    }
                }
                loss_sum += loss.value;
                ++seen;
                const SegNetGrads sample_grads = segnet_backward(net, cache, loss.grad);
                batch_grads.accumulate(sample_grads, inv);
            }
            std::vector<Grid*> params = net.params();
            std::vector<const Grid*> grads;
            for (Grid* g : batch_grads.params()) {
                grads.push_back(g);
            }
            optimizer_step(cfg.optimizer, params, grads, opt_state, hyper);
        }

        EpochStats stats;
        stats.train_loss = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;
        const MetricsReport report = evaluate(net, test_set, cfg.augment, cfg.num_classes);
        stats.miou = report.miou;
        stats.mdice = report.mdice;
        stats.me = report.me;
        result.trail.push_back(stats);
    }
    result.net = std::move(net);
    return result;
}

} // namespace

TrainResult train(SegNet net, const std::vector<Sample>& data, const TrainConfig& cfg) {
    return train_impl(std::move(net), nullptr, data, cfg);
}

TrainResult distill(const SegNet& teacher, SegNet student, const std::vector<Sample>& data,
                    const TrainConfig& cfg) {
    return train_impl(std::move(student), &teacher, data, cfg);
}

MetricsReport evaluate(const SegNet& net, const std::vector<Sample>& samples,
                       const AugmentConfig& augment_cfg, int num_classes) {
    ConfusionCounts pooled(num_classes);
    Rng silent(0);
    for (const Sample& s : samples) {
        const Sample eval = augment(s, augment_cfg, silent, false);
        const Grid logits = segnet_forward(net, eval.image, silent, false);
        const LabelMask pred = argmax_channels(logits);
        pooled.add(confusion_counts(pred, eval.mask, num_classes));
    }
    return segmentation_report(pooled);
}

} // namespace segkit
