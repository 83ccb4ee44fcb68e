// segkit command line: dataset generation, segmentation/detection
// evaluation, training, distillation, and detect-then-segment inference.
// Every command is reproducible from (config, seed) and writes a manifest
// with digests beside its file outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "segkit/augment.hpp"
#include "segkit/detect.hpp"
#include "segkit/io.hpp"
#include "segkit/metrics.hpp"
#include "segkit/pipeline.hpp"
#include "segkit/presets.hpp"
#include "segkit/report.hpp"
#include "segkit/scene.hpp"
#include "segkit/segnet.hpp"
#include "segkit/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// config plumbing: a JSON file with optional sections overrides defaults,
// explicit flags override the file.

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

void apply_scene(const json& j, segkit::SceneConfig& cfg) {
    maybe(j, "height", cfg.height);
    maybe(j, "width", cfg.width);
    maybe(j, "min_blobs", cfg.min_blobs);
    maybe(j, "max_blobs", cfg.max_blobs);
    maybe(j, "center_mean_y", cfg.center_mean_y);
    maybe(j, "center_mean_x", cfg.center_mean_x);
    maybe(j, "center_std_y", cfg.center_std_y);
    maybe(j, "center_std_x", cfg.center_std_x);
    maybe(j, "min_axis", cfg.min_axis);
    maybe(j, "max_axis", cfg.max_axis);
    maybe(j, "foreground_cap", cfg.foreground_cap);
    maybe(j, "background_level", cfg.background_level);
    maybe(j, "noise_std", cfg.noise_std);
}

json scene_to_json(const segkit::SceneConfig& cfg) {
    return {{"height", cfg.height},
            {"width", cfg.width},
            {"num_classes", cfg.num_classes},
            {"min_blobs", cfg.min_blobs},
            {"max_blobs", cfg.max_blobs},
            {"center_mean_y", cfg.center_mean_y},
            {"center_mean_x", cfg.center_mean_x},
            {"center_std_y", cfg.center_std_y},
            {"center_std_x", cfg.center_std_x},
            {"min_axis", cfg.min_axis},
            {"max_axis", cfg.max_axis},
            {"foreground_cap", cfg.foreground_cap},
            {"background_level", cfg.background_level},
            {"noise_std", cfg.noise_std}};
}

void apply_augment(const json& j, segkit::AugmentConfig& cfg) {
    maybe(j, "resize_h", cfg.resize_h);
    maybe(j, "resize_w", cfg.resize_w);
    maybe(j, "crop", cfg.crop);
    maybe(j, "flip_prob", cfg.flip_prob);
    maybe(j, "sharpen_prob", cfg.sharpen_prob);
}

json augment_to_json(const segkit::AugmentConfig& cfg) {
    return {{"resize_h", cfg.resize_h},
            {"resize_w", cfg.resize_w},
            {"crop", cfg.crop},
            {"flip_prob", cfg.flip_prob},
            {"sharpen_prob", cfg.sharpen_prob}};
}

void apply_net(const json& j, segkit::SegNetConfig& cfg) {
    maybe(j, "width1", cfg.width1);
    maybe(j, "width2", cfg.width2);
    maybe(j, "num_classes", cfg.num_classes);
    maybe(j, "dropout_rate", cfg.dropout_rate);
}

json net_to_json(const segkit::SegNetConfig& cfg) {
    return {{"width1", cfg.width1},
            {"width2", cfg.width2},
            {"num_classes", cfg.num_classes},
            {"dropout_rate", cfg.dropout_rate}};
}

json train_to_json(const segkit::TrainConfig& cfg) {
    return {{"batch_size", cfg.batch_size},
            {"epochs", cfg.epochs},
            {"lr", cfg.lr},
            {"optimizer", cfg.optimizer == segkit::OptKind::sgd ? "sgd" : "adamw"},
            {"weight_decay", cfg.weight_decay},
            {"split_ratio", cfg.split_ratio},
            {"seed", cfg.seed},
            {"loss", cfg.loss == segkit::LossKind::ce       ? "ce"
                     : cfg.loss == segkit::LossKind::focal  ? "focal"
                     : cfg.loss == segkit::LossKind::dice   ? "dice"
                                                            : "lovasz"},
            {"lambda", cfg.lambda},
            {"temperature", cfg.temperature},
            {"augment", augment_to_json(cfg.augment)},
            {"num_classes", cfg.num_classes}};
}

json load_config_file(const std::string& path) {
    if (path.empty()) {
        return json::object();
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file " + path);
    }
    return json::parse(in);
}

segkit::LossKind parse_loss(const std::string& s) {
    if (s == "ce") return segkit::LossKind::ce;
    if (s == "focal") return segkit::LossKind::focal;
    if (s == "dice") return segkit::LossKind::dice;
    if (s == "lovasz") return segkit::LossKind::lovasz;
    throw CLI::ValidationError("--loss", "expected one of ce|focal|dice|lovasz");
}

segkit::OptKind parse_optimizer(const std::string& s) {
    if (s == "sgd") return segkit::OptKind::sgd;
    if (s == "adamw") return segkit::OptKind::adamw;
    throw CLI::ValidationError("--optimizer", "expected sgd|adamw");
}

// ---------------------------------------------------------------------------
// small file helpers

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension,
                                   const std::string& prefix = "") {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() == extension &&
            (prefix.empty() || name.rfind(prefix, 0) == 0)) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string index_name(const char* stem, int i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%03d%s", stem, i, ext);
    return buf;
}

std::vector<segkit::Sample> load_samples(const fs::path& dir) {
    std::vector<segkit::Sample> samples;
    for (const fs::path& img_path : sorted_files(dir, ".pgm", "img")) {
        std::string mask_name = img_path.filename().string();
        mask_name.replace(0, 3, "mask");
        const fs::path mask_path = img_path.parent_path() / mask_name;
        if (!fs::exists(mask_path)) {
            throw std::runtime_error("no mask for " + img_path.string());
        }
        segkit::Sample s;
        s.image = segkit::read_pgm(img_path.string());
        s.mask = segkit::read_mask_pgm(mask_path.string());
        samples.push_back(std::move(s));
    }
    if (samples.empty()) {
        throw std::runtime_error("no img*.pgm samples under " + dir.string());
    }
    return samples;
}

void add_digest(segkit::RunManifest& manifest, const fs::path& path) {
    manifest.output_digests[path.filename().string()] = segkit::digest_file(path.string());
}

void emit_report(const segkit::ReportDocument& doc, const std::string& out_path,
                 const segkit::RunManifest& base) {
    std::cout << doc.text;
    if (out_path.empty()) {
        return;
    }
    std::ofstream out(out_path);
    if (!out) {
        throw std::runtime_error("cannot write " + out_path);
    }
    out << doc.records.dump(2) << "\n";
    out.close();
    segkit::RunManifest manifest = base;
    add_digest(manifest, out_path);
    segkit::write_manifest(out_path + ".manifest.json", manifest);
}

// ---------------------------------------------------------------------------
// subcommands

int run_gen(std::uint64_t seed, int count, const std::string& out_dir, bool imbalanced,
            const std::string& config_path) {
    const json file_cfg = load_config_file(config_path);
    segkit::SceneConfig scene =
        imbalanced ? segkit::imbalanced_scene_config() : segkit::SceneConfig{};
    if (file_cfg.contains("scene")) {
        apply_scene(file_cfg.at("scene"), scene);
    }

    fs::create_directories(out_dir);
    segkit::RunManifest manifest;
    manifest.command = "gen";
    manifest.seed = seed;
    manifest.config = {{"scene", scene_to_json(scene)}, {"count", count}, {"imbalanced", imbalanced}};

    segkit::Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        const segkit::Sample s = segkit::gen_scene(scene, rng);
        const std::string img_name = index_name("img", i, ".pgm");
        const std::string mask_name = index_name("mask", i, ".pgm");
        const std::string boxes_name = index_name("boxes", i, ".json");
        const fs::path img_path = fs::path(out_dir) / img_name;
        const fs::path mask_path = fs::path(out_dir) / mask_name;
        const fs::path boxes_path = fs::path(out_dir) / boxes_name;
        segkit::write_pgm(img_path.string(), s.image);
        segkit::write_mask_pgm(mask_path.string(), s.mask);
        segkit::write_boxes_json(boxes_path.string(), index_name("img", i, ""), s.boxes);
        add_digest(manifest, img_path);
        add_digest(manifest, mask_path);
        add_digest(manifest, boxes_path);
    }
    segkit::write_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
    std::cout << "wrote " << count << " scenes to " << out_dir << "\n";
    return 0;
}

int run_eval_seg(const std::string& pred_path, const std::string& truth_path, int num_classes,
                 const std::string& out_path) {
    std::vector<std::pair<fs::path, fs::path>> pairs;
    if (fs::is_directory(pred_path)) {
        for (const fs::path& p : sorted_files(pred_path, ".pgm")) {
            const fs::path t = fs::path(truth_path) / p.filename();
            if (!fs::exists(t)) {
                throw std::runtime_error("no truth mask for " + p.filename().string());
            }
            pairs.emplace_back(p, t);
        }
        if (pairs.empty()) {
            throw std::runtime_error("no .pgm masks under " + pred_path);
        }
    } else {
        pairs.emplace_back(pred_path, truth_path);
    }

    // Pool confusion counts over images, then compute ratios: the only
    // aggregation order that is independent of how images are sliced.
    segkit::ConfusionCounts pooled(num_classes);
    for (const auto& [p, t] : pairs) {
        pooled.add(segkit::confusion_counts(segkit::read_mask_pgm(p.string()),
                                            segkit::read_mask_pgm(t.string()), num_classes));
    }
    const segkit::MetricsReport report = segkit::segmentation_report(pooled);
    const segkit::ReportDocument doc =
        segkit::render_report({{fs::path(pred_path).filename().string(), report}},
                              segkit::ReportKind::segmentation);
    segkit::RunManifest manifest;
    manifest.command = "eval-seg";
    manifest.config = {{"pred", pred_path}, {"truth", truth_path}, {"classes", num_classes}};
    emit_report(doc, out_path, manifest);
    return 0;
}

int run_eval_det(const std::string& pred_path, const std::string& truth_path, double iou_threshold,
                 const std::string& out_path) {
    std::vector<segkit::BoxSet> preds, truths;
    if (fs::is_directory(pred_path)) {
        for (const fs::path& p : sorted_files(pred_path, ".json")) {
            if (p.filename() == "manifest.json") {
                continue;
            }
            const fs::path t = fs::path(truth_path) / p.filename();
            if (!fs::exists(t)) {
                throw std::runtime_error("no truth boxes for " + p.filename().string());
            }
            preds.push_back(segkit::read_boxes_json(p.string()).second);
            truths.push_back(segkit::read_boxes_json(t.string()).second);
        }
        if (preds.empty()) {
            throw std::runtime_error("no .json box files under " + pred_path);
        }
    } else {
        preds.push_back(segkit::read_boxes_json(pred_path).second);
        truths.push_back(segkit::read_boxes_json(truth_path).second);
    }

    const segkit::MetricsReport report = segkit::detection_report(preds, truths, iou_threshold);
    const segkit::ReportDocument doc =
        segkit::render_report({{fs::path(pred_path).filename().string(), report}},
                              segkit::ReportKind::detection);
    segkit::RunManifest manifest;
    manifest.command = "eval-det";
    manifest.config = {
        {"pred", pred_path}, {"truth", truth_path}, {"iou_threshold", iou_threshold}};
    emit_report(doc, out_path, manifest);
    return 0;
}

void write_trail(const std::string& path, const std::vector<segkit::EpochStats>& trail) {
    json doc;
    doc["epochs"] = json::array();
    for (std::size_t i = 0; i < trail.size(); ++i) {
        doc["epochs"].push_back({{"epoch", i + 1},
                                 {"train_loss", trail[i].train_loss},
                                 {"miou", trail[i].miou},
                                 {"mdice", trail[i].mdice},
                                 {"me", trail[i].me}});
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << doc.dump(2) << "\n";
}

struct TrainCli {
    std::string data, out, config_path;
    std::string loss = "lovasz", optimizer;
    double lr = -1.0, lambda = -1.0, temperature = -1.0;
    int epochs = -1, batch = -1;
    std::uint64_t seed = 0;
};

void resolve_train_config(const TrainCli& cli, const json& file_cfg, segkit::TrainConfig& cfg) {
    if (file_cfg.contains("train")) {
        const json& jt = file_cfg.at("train");
        maybe(jt, "batch_size", cfg.batch_size);
        maybe(jt, "epochs", cfg.epochs);
        maybe(jt, "lr", cfg.lr);
        maybe(jt, "weight_decay", cfg.weight_decay);
        maybe(jt, "split_ratio", cfg.split_ratio);
        maybe(jt, "lambda", cfg.lambda);
        maybe(jt, "temperature", cfg.temperature);
        if (jt.contains("loss")) {
            cfg.loss = parse_loss(jt.at("loss").get<std::string>());
        }
        if (jt.contains("optimizer")) {
            cfg.optimizer = parse_optimizer(jt.at("optimizer").get<std::string>());
        }
    }
    if (file_cfg.contains("augment")) {
        apply_augment(file_cfg.at("augment"), cfg.augment);
    }
    cfg.loss = parse_loss(cli.loss);
    if (!cli.optimizer.empty()) {
        cfg.optimizer = parse_optimizer(cli.optimizer);
    }
    if (cli.lr >= 0.0) cfg.lr = cli.lr;
    if (cli.epochs >= 0) cfg.epochs = cli.epochs;
    if (cli.batch >= 1) cfg.batch_size = cli.batch;
    if (cli.lambda >= 0.0) cfg.lambda = cli.lambda;
    if (cli.temperature > 0.0) cfg.temperature = cli.temperature;
    cfg.seed = cli.seed;
}

int run_train(const TrainCli& cli, const std::string& teacher_path) {
    const json file_cfg = load_config_file(cli.config_path);
    segkit::TrainConfig cfg;
    resolve_train_config(cli, file_cfg, cfg);

    segkit::SegNetConfig net_cfg =
        teacher_path.empty() ? segkit::SegNetConfig{} : segkit::student_config();
    if (file_cfg.contains("net")) {
        apply_net(file_cfg.at("net"), net_cfg);
    }
    cfg.num_classes = net_cfg.num_classes;

    const std::vector<segkit::Sample> data = load_samples(cli.data);
    segkit::Rng net_rng(cfg.seed);
    segkit::SegNet net = segkit::make_segnet(net_cfg, net_rng);

    segkit::TrainResult result;
    if (teacher_path.empty()) {
        result = segkit::train(std::move(net), data, cfg);
    } else {
        const segkit::SegNet teacher = segkit::load_model(teacher_path);
        result = segkit::distill(teacher, std::move(net), data, cfg);
    }

    segkit::save_model(cli.out, result.net, cfg.seed);
    const std::string trail_path = cli.out + ".trail.json";
    write_trail(trail_path, result.trail);

    segkit::RunManifest manifest;
    manifest.command = teacher_path.empty() ? "train" : "distill";
    manifest.seed = cfg.seed;
    manifest.config = {{"train", train_to_json(cfg)}, {"net", net_to_json(net_cfg)},
                       {"data", cli.data}};
    if (!teacher_path.empty()) {
        manifest.config["teacher"] = teacher_path;
    }
    add_digest(manifest, cli.out);
    add_digest(manifest, trail_path);
    segkit::write_manifest(cli.out + ".manifest.json", manifest);

    if (!result.trail.empty()) {
        const segkit::EpochStats& last = result.trail.back();
        std::printf("final test mIoU %.4f  mDice %.4f  ME %.4f\n", last.miou, last.mdice, last.me);
    }
    return 0;
}

int run_pipeline_cmd(const std::string& model_path, const std::string& image_path,
                     const std::string& data_dir, const std::string& out_arg, double threshold,
                     bool full_frame) {
    const segkit::SegNet net = segkit::load_model(model_path);
    segkit::PipelineConfig cfg;
    cfg.det_threshold = threshold;
    cfg.full_frame = full_frame;

    segkit::RunManifest manifest;
    manifest.command = "pipeline";
    manifest.config = {{"model", model_path},
                       {"det_threshold", threshold},
                       {"full_frame", full_frame}};

    if (!image_path.empty()) {
        const segkit::Grid image = segkit::read_pgm(image_path);
        const segkit::PipelineResult r = segkit::run_pipeline(image, cfg, net);
        const std::string mask_path = out_arg.empty() ? image_path + ".pred.pgm" : out_arg;
        const std::string boxes_path = mask_path + ".boxes.json";
        segkit::write_mask_pgm(mask_path, r.mask);
        segkit::write_boxes_json(boxes_path, fs::path(image_path).stem().string(), r.boxes);
        add_digest(manifest, mask_path);
        add_digest(manifest, boxes_path);
        segkit::write_manifest(mask_path + ".manifest.json", manifest);
        std::cout << "detected " << r.boxes.size() << " regions\n";
        return 0;
    }

    fs::create_directories(out_arg);
    for (const fs::path& img : sorted_files(data_dir, ".pgm", "img")) {
        const segkit::Grid image = segkit::read_pgm(img.string());
        const segkit::PipelineResult r = segkit::run_pipeline(image, cfg, net);
        std::string pred_name = img.filename().string();
        pred_name.replace(0, 3, "pred");
        std::string boxes_name = img.stem().string();
        boxes_name.replace(0, 3, "det");
        const fs::path mask_path = fs::path(out_arg) / pred_name;
        const fs::path boxes_path = fs::path(out_arg) / (boxes_name + ".json");
        segkit::write_mask_pgm(mask_path.string(), r.mask);
        segkit::write_boxes_json(boxes_path.string(), img.stem().string(), r.boxes);
        add_digest(manifest, mask_path);
        add_digest(manifest, boxes_path);
    }
    if (manifest.output_digests.empty()) {
        throw std::runtime_error("no img*.pgm inputs under " + data_dir);
    }
    segkit::write_manifest((fs::path(out_arg) / "manifest.json").string(), manifest);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"segkit: synthetic blob-scene segmentation toolkit"};
    app.set_version_flag("--version", segkit::kToolkitVersion);
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic scene dataset");
    std::uint64_t gen_seed = 0;
    int gen_count = 10;
    std::string gen_out, gen_config;
    bool gen_imbalanced = false;
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--count", gen_count, "number of scenes");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_flag("--imbalanced", gen_imbalanced, "cap foreground at 5% of pixels");
    gen->add_option("--config", gen_config, "JSON config overriding defaults");

    // eval-seg
    auto* eseg = app.add_subcommand("eval-seg", "segmentation metrics for mask files");
    std::string eseg_pred, eseg_truth, eseg_out;
    int eseg_classes = 3;
    eseg->add_option("--pred", eseg_pred, "predicted mask .pgm or directory")->required();
    eseg->add_option("--truth", eseg_truth, "ground-truth mask .pgm or directory")->required();
    eseg->add_option("--classes", eseg_classes, "number of classes");
    eseg->add_option("--out", eseg_out, "write machine-readable report here");

    // eval-det
    auto* edet = app.add_subcommand("eval-det", "detection metrics for box files");
    std::string edet_pred, edet_truth, edet_out;
    double edet_iou = 0.5;
    edet->add_option("--pred", edet_pred, "predicted boxes .json or directory")->required();
    edet->add_option("--truth", edet_truth, "ground-truth boxes .json or directory")->required();
    edet->add_option("--iou-threshold", edet_iou, "matching IoU threshold");
    edet->add_option("--out", edet_out, "write machine-readable report here");

    // train / distill share flags
    TrainCli tcli;
    auto add_train_flags = [&](CLI::App* cmd) {
        cmd->add_option("--data", tcli.data, "dataset directory (img*.pgm + mask*.pgm)")
            ->required();
        cmd->add_option("--out", tcli.out, "model output path")->required();
        cmd->add_option("--loss", tcli.loss, "ce|focal|dice|lovasz");
        cmd->add_option("--optimizer", tcli.optimizer, "sgd|adamw");
        cmd->add_option("--lr", tcli.lr, "learning rate");
        cmd->add_option("--epochs", tcli.epochs, "epochs");
        cmd->add_option("--batch", tcli.batch, "batch size");
        cmd->add_option("--seed", tcli.seed, "rng seed");
        cmd->add_option("--config", tcli.config_path, "JSON config overriding defaults");
    };
    auto* train_cmd = app.add_subcommand("train", "train a segmentation net");
    add_train_flags(train_cmd);
    auto* distill_cmd = app.add_subcommand("distill", "train a student against a teacher");
    add_train_flags(distill_cmd);
    std::string distill_teacher;
    distill_cmd->add_option("--teacher", distill_teacher, "teacher model path")->required();
    distill_cmd->add_option("--lambda", tcli.lambda, "distillation weight");
    distill_cmd->add_option("--temperature", tcli.temperature, "distillation temperature");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "detect then segment");
    std::string pipe_model, pipe_image, pipe_data, pipe_out;
    double pipe_threshold = 0.35;
    bool pipe_full_frame = false;
    pipe->add_option("--model", pipe_model, "trained model path")->required();
    pipe->add_option("--image", pipe_image, "single input image .pgm");
    pipe->add_option("--data", pipe_data, "directory of img*.pgm inputs");
    pipe->add_option("--out", pipe_out, "output mask path (single) or directory");
    pipe->add_option("--threshold", pipe_threshold, "detector intensity threshold");
    pipe->add_flag("--full-frame", pipe_full_frame, "segment the full frame under box guidance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            return run_gen(gen_seed, gen_count, gen_out, gen_imbalanced, gen_config);
        }
        if (eseg->parsed()) {
            return run_eval_seg(eseg_pred, eseg_truth, eseg_classes, eseg_out);
        }
        if (edet->parsed()) {
            return run_eval_det(edet_pred, edet_truth, edet_iou, edet_out);
        }
        if (train_cmd->parsed()) {
            return run_train(tcli, "");
        }
        if (distill_cmd->parsed()) {
            return run_train(tcli, distill_teacher);
        }
        if (pipe->parsed()) {
            if (pipe_image.empty() == pipe_data.empty()) {
                std::cerr << "pipeline: pass exactly one of --image or --data\n";
                return 2;
            }
            if (pipe_image.empty() && pipe_out.empty()) {
                std::cerr << "pipeline: --data mode needs --out\n";
                return 2;
            }
            return run_pipeline_cmd(pipe_model, pipe_image, pipe_data, pipe_out, pipe_threshold,
                                    pipe_full_frame);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
