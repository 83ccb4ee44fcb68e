#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "segkit/distill.hpp"
#include "segkit/pipeline.hpp"
#include "segkit/train.hpp"

using namespace segkit;

namespace {

std::vector<Sample> make_dataset(int count, std::uint64_t seed) {
    SceneConfig cfg;
    Rng rng(seed);
    std::vector<Sample> data;
    data.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) data.push_back(gen_scene(cfg, rng));
    return data;
}

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.lr = 0.05;
    cfg.seed = 7;
    cfg.loss = LossKind::ce;
    return cfg;
}

bool nets_equal(const SegNet& a, const SegNet& b) {
    auto pa = a.params(), pb = b.params();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i]->values() != pb[i]->values()) return false;
    }
    return true;
}

} // namespace

TEST_CASE("train with zero epochs returns the initial net and an empty trail") {
    auto data = make_dataset(6, 1);
    TrainConfig cfg = quick_config();
    cfg.epochs = 0;
    Rng rng(3);
    SegNet net = make_segnet(student_config(), rng);
    const SegNet before = net;
    TrainResult r = train(std::move(net), data, cfg);
    CHECK(r.trail.empty());
    CHECK(nets_equal(r.net, before));
}

TEST_CASE("train is deterministic: same config and seed give identical trails") {
    auto data = make_dataset(8, 2);
    TrainConfig cfg = quick_config();
    Rng a(5), b(5);
    TrainResult r1 = train(make_segnet(student_config(), a), data, cfg);
    TrainResult r2 = train(make_segnet(student_config(), b), data, cfg);
    REQUIRE(r1.trail.size() == r2.trail.size());
    for (std::size_t i = 0; i < r1.trail.size(); ++i) {
        CHECK(r1.trail[i].train_loss == r2.trail[i].train_loss);
        CHECK(r1.trail[i].miou == r2.trail[i].miou);
        CHECK(r1.trail[i].mdice == r2.trail[i].mdice);
        CHECK(r1.trail[i].me == r2.trail[i].me);
    }
    CHECK(nets_equal(r1.net, r2.net));
}

TEST_CASE("train rejects empty or single-sample datasets") {
    TrainConfig cfg = quick_config();
    Rng rng(1);
    SegNet net = make_segnet(student_config(), rng);
    CHECK_THROWS_AS(train(std::move(net), {}, cfg), std::invalid_argument);
}

TEST_CASE("distill with lambda 0 is bit-identical to plain training") {
    auto data = make_dataset(8, 4);
    TrainConfig cfg = quick_config();
    cfg.lambda = 0.0;

    Rng t(11);
    SegNet teacher = make_segnet(SegNetConfig{}, t);

    Rng a(13), b(13);
    TrainResult plain = train(make_segnet(student_config(), a), data, cfg);
    TrainResult guided = distill(teacher, make_segnet(student_config(), b), data, cfg);

    REQUIRE(plain.trail.size() == guided.trail.size());
    for (std::size_t i = 0; i < plain.trail.size(); ++i) {
        CHECK(plain.trail[i].train_loss == guided.trail[i].train_loss);
        CHECK(plain.trail[i].miou == guided.trail[i].miou);
    }
    CHECK(nets_equal(plain.net, guided.net));
}

TEST_CASE("a student initialized to the teacher starts with zero cwd term") {
    Rng rng(17);
    SegNet teacher = make_segnet(SegNetConfig{}, rng);
    const SegNet student = teacher; // same widths, same weights

    auto data = make_dataset(2, 5);
    Rng silent(0);
    Grid img = data[0].image;
    Grid tl = segnet_forward(teacher, img, silent, false);
    Grid sl = segnet_forward(student, img, silent, false);
    ActivationPair pair{std::move(tl), std::move(sl), 2.0};
    CHECK(cwd_loss(pair).value == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("distill runs and records a trail") {
    auto data = make_dataset(8, 6);
    TrainConfig cfg = quick_config();
    cfg.lambda = 1.0;
    cfg.temperature = 2.0;
    Rng t(19), s(23);
    SegNet teacher = make_segnet(SegNetConfig{}, t);
    TrainResult r = distill(teacher, make_segnet(student_config(), s), data, cfg);
    CHECK(r.trail.size() == 2);
    for (const EpochStats& e : r.trail) {
        CHECK(e.miou >= 0.0);
        CHECK(e.miou <= 1.0);
    }
}

TEST_CASE("run_pipeline on a blank image yields no boxes and background only") {
    Rng rng(29);
    SegNet net = make_segnet(student_config(), rng);
    Grid img = Grid::full({1, 32, 32}, 0.05);
    PipelineConfig cfg;
    PipelineResult r = run_pipeline(img, cfg, net);
    CHECK(r.boxes.empty());
    for (int v : r.mask.labels) CHECK(v == 0);
}

TEST_CASE("run_pipeline keeps every nonzero pixel inside a detected box") {
    SceneConfig scfg;
    Rng rng(31);
    Rng nrng(37);
    SegNet net = make_segnet(student_config(), nrng);
    for (bool full_frame : {false, true}) {
        PipelineConfig cfg;
        cfg.full_frame = full_frame;
        for (int trial = 0; trial < 5; ++trial) {
            Sample s = gen_scene(scfg, rng);
            PipelineResult r = run_pipeline(s.image, cfg, net);
            for (int y = 0; y < r.mask.height; ++y) {
                for (int x = 0; x < r.mask.width; ++x) {
                    if (r.mask.at(y, x) == 0) continue;
                    bool inside = false;
                    for (const Box& b : r.boxes) {
                        if (x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h) {
                            inside = true;
                            break;
                        }
                    }
                    CHECK(inside);
                }
            }
        }
    }
}

TEST_CASE("run_pipeline is deterministic") {
    SceneConfig scfg;
    Rng rng(41);
    Sample s = gen_scene(scfg, rng);
    Rng nrng(43);
    SegNet net = make_segnet(student_config(), nrng);
    PipelineConfig cfg;
    PipelineResult a = run_pipeline(s.image, cfg, net);
    PipelineResult b = run_pipeline(s.image, cfg, net);
    CHECK(a.mask.labels == b.mask.labels);
    REQUIRE(a.boxes.size() == b.boxes.size());
}
