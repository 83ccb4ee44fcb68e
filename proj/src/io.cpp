#include "segkit/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "segkit/check.hpp"

namespace segkit {

namespace {

void io_fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        io_fail("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        io_fail("cannot write " + path);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        io_fail("short write to " + path);
    }
}

struct PgmPayload {
    int width = 0, height = 0;
    std::string bytes;
};

PgmPayload parse_pgm(const std::string& path) {
    const std::string raw = read_file(path);
    std::istringstream in(raw);
    std::string magic;
    in >> magic;
    if (magic != "P5") {
        io_fail(path + ": not a binary PGM (P5)");
    }
    auto next_int = [&]() {
        int v;
        while (in >> std::ws && in.peek() == '#') {
            std::string comment;
            std::getline(in, comment);
        }
        if (!(in >> v)) {
            io_fail(path + ": truncated PGM header");
        }
        return v;
    };
    PgmPayload p;
    p.width = next_int();
    p.height = next_int();
    const int maxval = next_int();
    if (p.width < 1 || p.height < 1 || maxval != 255) {
        io_fail(path + ": unsupported PGM geometry");
    }
    in.get(); // the single whitespace byte before the raster
    const std::size_t need = static_cast<std::size_t>(p.width) * p.height;
    const std::size_t offset = static_cast<std::size_t>(in.tellg());
    if (raw.size() < offset + need) {
        io_fail(path + ": truncated PGM raster");
    }
    p.bytes = raw.substr(offset, need);
    return p;
}

std::string pgm_header(int width, int height) {
    std::ostringstream out;
    out << "P5\n" << width << " " << height << "\n255\n";
    return out.str();
}

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

std::uint64_t read_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return v;
}

void append_double_le(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    append_u64_le(out, bits);
}

double read_double_le(const unsigned char* p) {
    std::uint64_t bits = read_u64_le(p);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
}

constexpr char kModelMagic[9] = "SGKMDL01";

} // namespace

void write_pgm(const std::string& path, const Grid& image) {
    require(image.rank() == 3 && image.extent(0) == 1, "write_pgm: image must be [1,H,W]");
    const int h = image.extent(1), w = image.extent(2);
    std::string out = pgm_header(w, h);
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double v = std::clamp(image[i], 0.0, 1.0);
        out.push_back(static_cast<char>(static_cast<int>(std::lround(v * 255.0))));
    }
    write_file(path, out);
}

Grid read_pgm(const std::string& path) {
    const PgmPayload p = parse_pgm(path);
    Grid image({1, p.height, p.width});
    for (std::size_t i = 0; i < p.bytes.size(); ++i) {
        image[i] = static_cast<double>(static_cast<unsigned char>(p.bytes[i])) / 255.0;
    }
    return image;
}

void write_mask_pgm(const std::string& path, const LabelMask& mask) {
    std::string out = pgm_header(mask.width, mask.height);
    for (int v : mask.labels) {
        require(v >= 0 && v <= 255, "write_mask_pgm: label does not fit a byte");
        out.push_back(static_cast<char>(v));
    }
    write_file(path, out);
}

LabelMask read_mask_pgm(const std::string& path) {
    const PgmPayload p = parse_pgm(path);
    LabelMask mask(p.height, p.width);
    for (std::size_t i = 0; i < p.bytes.size(); ++i) {
        mask.labels[i] = static_cast<int>(static_cast<unsigned char>(p.bytes[i]));
    }
    return mask;
}

void write_boxes_json(const std::string& path, const std::string& image_id, const BoxSet& boxes) {
    nlohmann::json doc;
    doc["image_id"] = image_id;
    doc["boxes"] = nlohmann::json::array();
    for (const Box& b : boxes) {
        nlohmann::json jb;
        jb["x"] = b.x;
        jb["y"] = b.y;
        jb["w"] = b.w;
        jb["h"] = b.h;
        jb["class"] = b.class_id;
        if (b.score.has_value()) {
            jb["score"] = *b.score;
        }
        doc["boxes"].push_back(jb);
    }
    write_file(path, doc.dump(2) + "\n");
}

std::pair<std::string, BoxSet> read_boxes_json(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        io_fail(path + ": " + e.what());
    }
    BoxSet boxes;
    for (const auto& jb : doc.at("boxes")) {
        Box b;
        b.x = jb.at("x").get<double>();
        b.y = jb.at("y").get<double>();
        b.w = jb.at("w").get<double>();
        b.h = jb.at("h").get<double>();
        b.class_id = jb.at("class").get<int>();
        if (jb.contains("score")) {
            b.score = jb.at("score").get<double>();
        }
        boxes.push_back(b);
    }
    return {doc.at("image_id").get<std::string>(), boxes};
}

void save_model(const std::string& path, const SegNet& net, std::uint64_t seed) {
    nlohmann::json header;
    header["format"] = "segkit-model";
    header["version"] = 1;
    header["seed"] = seed;
    header["config"] = {{"width1", net.cfg.width1},
                        {"width2", net.cfg.width2},
                        {"num_classes", net.cfg.num_classes},
                        {"dropout_rate", net.cfg.dropout_rate}};
    header["layers"] = nlohmann::json::array();
    for (const auto& [name, grid] : net.named_params()) {
        header["layers"].push_back({{"name", name}, {"shape", grid->shape()}});
    }
    const std::string header_text = header.dump();

    std::string out(kModelMagic, 8);
    append_u64_le(out, header_text.size());
    out += header_text;
    for (const auto& [name, grid] : net.named_params()) {
        for (std::size_t i = 0; i < grid->size(); ++i) {
            append_double_le(out, (*grid)[i]);
        }
    }
    write_file(path, out);
}

SegNet load_model(const std::string& path) {
    const std::string raw = read_file(path);
    if (raw.size() < 16 || raw.compare(0, 8, kModelMagic, 8) != 0) {
        io_fail(path + ": not a segkit model file");
    }
    const std::uint64_t header_len =
        read_u64_le(reinterpret_cast<const unsigned char*>(raw.data()) + 8);
    if (raw.size() < 16 + header_len) {
        io_fail(path + ": truncated model header");
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(raw.substr(16, header_len));
    } catch (const nlohmann::json::exception& e) {
        io_fail(path + ": " + e.what());
    }

    SegNetConfig cfg;
    cfg.width1 = header.at("config").at("width1").get<int>();
    cfg.width2 = header.at("config").at("width2").get<int>();
    cfg.num_classes = header.at("config").at("num_classes").get<int>();
    cfg.dropout_rate = header.at("config").at("dropout_rate").get<double>();

    Rng unused(0);
    SegNet net = make_segnet(cfg, unused);

    std::size_t offset = 16 + header_len;
    const auto layers = header.at("layers");
    auto named = net.named_params();
    require(layers.size() == named.size(), path + ": unexpected layer count");
    for (std::size_t li = 0; li < named.size(); ++li) {
        const auto& [name, grid] = named[li];
        require(layers[li].at("name").get<std::string>() == name, path + ": layer order mismatch");
        require(layers[li].at("shape").get<std::vector<int>>() == grid->shape(),
                path + ": layer shape mismatch");
        const std::size_t bytes = grid->size() * 8;
        if (raw.size() < offset + bytes) {
            io_fail(path + ": truncated model payload");
        }
        for (std::size_t i = 0; i < grid->size(); ++i) {
            (*grid)[i] = read_double_le(
                reinterpret_cast<const unsigned char*>(raw.data()) + offset + i * 8);
        }
        offset += bytes;
    }
    return net;
}

std::string digest_file(const std::string& path) {
    const std::string bytes = read_file(path);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    nlohmann::json doc;
    doc["command"] = manifest.command;
    doc["config"] = manifest.config;
    doc["seed"] = manifest.seed;
    doc["version"] = kToolkitVersion;
    doc["outputs"] = manifest.output_digests;
    write_file(path, doc.dump(2) + "\n");
}

} // namespace segkit
