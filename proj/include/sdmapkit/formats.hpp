#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <string>
#include <vector>

#include "sdmapkit/geo.hpp"
#include "sdmapkit/graph_ops.hpp"
#include "sdmapkit/metrics.hpp"
#include "sdmapkit/raster.hpp"
#include "sdmapkit/sd_graph.hpp"

namespace sdmapkit::formats {

inline constexpr int kSdgVersion = 1;

// sdg-json: line-delimited JSON.
//   {"version":1,"origin_lat":..,"origin_lon":..,"ego_pose":{"x":..,"y":..,"heading":..}}
//   {"idx":0,"x":..,"y":..,"class":"residential"}   one per node, idx ascending from 0
//   {"a":0,"b":1}                                   one per undirected edge
std::string write_sdg(const SdMapGraph& graph);
void write_sdg_file(const SdMapGraph& graph, const std::filesystem::path& path);
/// Throws SchemaError naming the 1-based line.
SdMapGraph read_sdg(std::string_view text);
SdMapGraph read_sdg_file(const std::filesystem::path& path);

// bev-f32: little-endian.
//   char[4] "BEVF", u32 version(1), u32 H, u32 W, u32 C,
//   f64 x_min, f64 x_max, f64 y_min, f64 y_max, f64 resolution,
//   f32 data[H*W*C] row-major (row, col, channel).
inline constexpr char kBevMagic[4] = {'B', 'E', 'V', 'F'};
std::vector<std::uint8_t> write_bev(const raster::BevCanvas& canvas);
raster::BevCanvas read_bev(std::span<const std::uint8_t> bytes);
raster::BevCanvas read_bev_file(const std::filesystem::path& path);

// aug-f32: augmented node features, little-endian.
//   char[4] "AUGF", u32 version(1), u32 N, u32 D, u32 base_dim,
//   index table N x {u32 node_idx, i32 x_b, i32 y_b, u32 in_range},
//   f32 features[N*D] row-major.
inline constexpr char kAugMagic[4] = {'A', 'U', 'G', 'F'};
std::vector<std::uint8_t> write_augmented(const std::vector<graph_ops::AugmentedNodeFeature>& rows);

// olann-json: one scene per line.
//   {"scene_id":"..","centerlines":[{"points":[[x,y(,z)],..],"score":s}],
//    "traffic_elements":[{"box":[x,y,w,h],"class":"..","score":s}],
//    "A_CC":[[..]],"A_CT":[[..]]}
// Missing scores read as 1.0; missing matrices read as all-zero.
std::vector<metrics::SceneAnnotation> read_olann(std::string_view text);
std::vector<metrics::SceneAnnotation> read_olann_file(const std::filesystem::path& path);
std::string write_olann(const std::vector<metrics::SceneAnnotation>& scenes);

/// JSON array of {"x","y","heading"} in the shared Cartesian frame.
std::vector<geo::EgoPose> read_poses(std::string_view text);
std::vector<geo::EgoPose> read_poses_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> contents);

}  // namespace sdmapkit::formats
