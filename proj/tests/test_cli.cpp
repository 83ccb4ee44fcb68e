#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "segkit/io.hpp"
#include "segkit/presets.hpp"
#include "segkit/report.hpp"
#include "segkit/scene.hpp"

using namespace segkit;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
    const fs::path dir = fs::temp_directory_path() / (std::string("segkit_cli_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SEGKIT_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string run_cli_stdout(const std::string& args, const fs::path& capture) {
    const std::string cmd =
        std::string(SEGKIT_CLI) + " " + args + " >" + capture.string() + " 2>/dev/null";
    std::system(cmd.c_str());
    std::ifstream in(capture);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

} // namespace

TEST_CASE("pgm image and mask round trips") {
    const fs::path dir = temp_dir("pgm");
    Rng rng(1);
    Sample s = gen_scene(SceneConfig{}, rng);

    const fs::path img = dir / "img.pgm";
    write_pgm(img.string(), s.image);
    const Grid back = read_pgm(img.string());
    REQUIRE(back.shape() == s.image.shape());
    // Quantization to 255 levels; a second round trip is exact.
    const fs::path img2 = dir / "img2.pgm";
    write_pgm(img2.string(), back);
    CHECK(same_bytes(img, img2));

    const fs::path mask = dir / "mask.pgm";
    write_mask_pgm(mask.string(), s.mask);
    const LabelMask mback = read_mask_pgm(mask.string());
    CHECK(mback.labels == s.mask.labels);

    CHECK_THROWS(read_pgm((dir / "missing.pgm").string()));
}

TEST_CASE("boxes json round trip preserves values exactly") {
    const fs::path dir = temp_dir("boxes");
    BoxSet boxes;
    Box a{1.0, 2.0, 3.0, 4.0, 1, 0.123456789012345};
    Box b{10.5, 20.25, 5.0, 6.0, 2, std::nullopt};
    boxes.push_back(a);
    boxes.push_back(b);
    const fs::path path = dir / "boxes.json";
    write_boxes_json(path.string(), "img000", boxes);
    const auto [id, back] = read_boxes_json(path.string());
    CHECK(id == "img000");
    REQUIRE(back.size() == 2);
    CHECK(back[0].x == a.x);
    CHECK(back[0].score.has_value());
    CHECK(*back[0].score == *a.score);
    CHECK_FALSE(back[1].score.has_value());
    CHECK(back[1].class_id == 2);
}

TEST_CASE("model save/load round trip is bit exact") {
    const fs::path dir = temp_dir("model");
    Rng rng(3);
    SegNet net = make_segnet(SegNetConfig{}, rng);
    const fs::path path = dir / "model.bin";
    save_model(path.string(), net, 42);
    const SegNet back = load_model(path.string());
    CHECK(back.cfg.width1 == net.cfg.width1);
    CHECK(back.cfg.dropout_rate == net.cfg.dropout_rate);
    auto pa = net.params();
    auto pb = back.params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->values() == pb[i]->values());

    CHECK_THROWS(load_model((dir / "nope.bin").string()));
}

TEST_CASE("render_report text and records") {
    MetricsReport perfect;
    perfect.mdice = 1.0;
    perfect.miou = 1.0;
    perfect.me = 0.0;
    const ReportDocument doc = render_report({{"net", perfect}}, ReportKind::segmentation);
    CHECK(doc.text.find("1.0000") != std::string::npos);
    CHECK(doc.text.find("0.0000") != std::string::npos);
    CHECK(doc.text.find("mDice") != std::string::npos);

    const ReportDocument empty = render_report({}, ReportKind::detection);
    CHECK(empty.text.find("Precision") != std::string::npos);
    CHECK(empty.records["rows"].empty());
}

TEST_CASE("report records round-trip the rendered values") {
    MetricsReport r;
    r.mdice = 0.87654321;
    r.miou = 0.7654321;
    r.me = 0.0123456;
    const ReportDocument doc = render_report({{"x", r}}, ReportKind::segmentation);
    const auto row = doc.records["rows"][0];
    CHECK(row["mDice"].get<double>() == r.mdice);
    CHECK(row["mIoU"].get<double>() == r.miou);
    CHECK(row["ME"].get<double>() == r.me);
    // text shows the same values at 4 decimals
    char want[16];
    std::snprintf(want, sizeof(want), "%.4f", r.mdice);
    CHECK(doc.text.find(want) != std::string::npos);
}

TEST_CASE("cli usage errors exit with 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("gen --no-such-flag --out /tmp/x") == 2);
}

TEST_CASE("cli gen is byte-identical across runs with one seed") {
    const fs::path dir = temp_dir("gen");
    const std::string d1 = (dir / "a").string(), d2 = (dir / "b").string();
    REQUIRE(run_cli("gen --seed 7 --count 3 --out " + d1) == 0);
    REQUIRE(run_cli("gen --seed 7 --count 3 --out " + d2) == 0);
    for (const auto& entry : fs::directory_iterator(d1)) {
        CHECK(same_bytes(entry.path(), fs::path(d2) / entry.path().filename()));
    }
    // a different seed changes the bytes
    const std::string d3 = (dir / "c").string();
    REQUIRE(run_cli("gen --seed 8 --count 3 --out " + d3) == 0);
    CHECK_FALSE(same_bytes(fs::path(d1) / "img000.pgm", fs::path(d3) / "img000.pgm"));
}

TEST_CASE("cli eval-seg on identity fixtures reports perfect scores") {
    const fs::path dir = temp_dir("evalseg");
    REQUIRE(run_cli("gen --seed 3 --count 2 --out " + (dir / "d").string()) == 0);
    fs::create_directories(dir / "pred");
    fs::create_directories(dir / "truth");
    for (int i = 0; i < 2; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "mask%03d.pgm", i);
        fs::copy_file(dir / "d" / name, dir / "pred" / name);
        fs::copy_file(dir / "d" / name, dir / "truth" / name);
    }
    const std::string text = run_cli_stdout("eval-seg --pred " + (dir / "pred").string() +
                                                " --truth " + (dir / "truth").string(),
                                            dir / "cap.txt");
    CHECK(text.find("1.0000") != std::string::npos);
    CHECK(text.find("0.0000") != std::string::npos);
}

TEST_CASE("cli eval-seg pools confusion counts over the directory") {
    const fs::path dir = temp_dir("pool");
    REQUIRE(run_cli("gen --seed 11 --count 4 --out " + (dir / "d").string()) == 0);
    // predictions: masks from a different seed's scenes (same geometry)
    REQUIRE(run_cli("gen --seed 12 --count 4 --out " + (dir / "p").string()) == 0);
    fs::create_directories(dir / "pred");
    fs::create_directories(dir / "truth");
    ConfusionCounts pooled(3);
    for (int i = 0; i < 4; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "mask%03d.pgm", i);
        fs::copy_file(dir / "p" / name, dir / "pred" / name);
        fs::copy_file(dir / "d" / name, dir / "truth" / name);
        pooled.add(confusion_counts(read_mask_pgm((dir / "p" / name).string()),
                                    read_mask_pgm((dir / "d" / name).string()), 3));
    }
    const fs::path out = dir / "report.json";
    REQUIRE(run_cli("eval-seg --pred " + (dir / "pred").string() + " --truth " +
                    (dir / "truth").string() + " --out " + out.string()) == 0);
    std::ifstream in(out);
    const nlohmann::json doc = nlohmann::json::parse(in);
    const MetricsReport want = segmentation_report(pooled);
    CHECK(doc["rows"][0]["mIoU"].get<double>() == doctest::Approx(want.miou).epsilon(1e-15));
    CHECK(doc["rows"][0]["ME"].get<double>() == doctest::Approx(want.me).epsilon(1e-15));
    // manifest written beside the output
    CHECK(fs::exists(dir / "report.json.manifest.json"));
}

TEST_CASE("manifest digests reproduce across identical runs") {
    const fs::path dir = temp_dir("manifest");
    REQUIRE(run_cli("gen --seed 5 --count 2 --out " + (dir / "a").string()) == 0);
    REQUIRE(run_cli("gen --seed 5 --count 2 --out " + (dir / "b").string()) == 0);
    std::ifstream ma(dir / "a" / "manifest.json"), mb(dir / "b" / "manifest.json");
    const nlohmann::json ja = nlohmann::json::parse(ma), jb = nlohmann::json::parse(mb);
    CHECK(ja["outputs"] == jb["outputs"]);
    CHECK(ja["version"] == kToolkitVersion);
}
