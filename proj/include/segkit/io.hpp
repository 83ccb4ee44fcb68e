#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include <json.hpp>

#include "segkit/grid.hpp"
#include "segkit/mask.hpp"
#include "segkit/metrics.hpp"
#include "segkit/segnet.hpp"

namespace segkit {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Binary PGM (magic P5, maxval 255). Images store intensities scaled to
// 0..255; masks store raw class indices. Both are bit-exact round trips for
// the value ranges this toolkit produces.
void write_pgm(const std::string& path, const Grid& image);
Grid read_pgm(const std::string& path);
void write_mask_pgm(const std::string& path, const LabelMask& mask);
LabelMask read_mask_pgm(const std::string& path);

// Box sets as UTF-8 JSON: {"image_id": ..., "boxes": [{x,y,w,h,class,score?}]}
// with shortest-round-trip number formatting.
void write_boxes_json(const std::string& path, const std::string& image_id, const BoxSet& boxes);
std::pair<std::string, BoxSet> read_boxes_json(const std::string& path);

// Model file: 8-byte magic, little-endian u64 header length, a JSON header
// (config, seed, layer names and shapes), then the parameters as a flat
// little-endian 64-bit-real payload in header order.
void save_model(const std::string& path, const SegNet& net, std::uint64_t seed);
SegNet load_model(const std::string& path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string digest_file(const std::string& path);

/// Reproducibility record written beside every command's outputs: re-running
/// with the same config and seed must reproduce the same digests.
struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> output_digests; // file name -> digest
};

void write_manifest(const std::string& path, const RunManifest& manifest);

} // namespace segkit
