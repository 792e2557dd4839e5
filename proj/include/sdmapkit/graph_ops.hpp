#pragma once

#include <cstdint>
#include <vector>

#include "sdmapkit/raster.hpp"
#include "sdmapkit/sd_graph.hpp"

namespace sdmapkit::graph_ops {

struct GridIndex {
  std::int64_t x_b = 0;  // row, along forward x
  std::int64_t y_b = 0;  // column, along lateral y
  bool in_range = false;
};

/// x_B = floor(x * H_B^m) + H_B / 2 and y_B = floor(y * W_B^m) + W_B / 2, with
/// H_B^m, W_B^m in cells per meter. Out-of-range indices are flagged, never clamped.
GridIndex align_to_grid(Vec2 position, const raster::BevSpec& spec);

/// Length of the base node feature: (x, y) followed by a 25-way class one-hot.
inline constexpr std::size_t kBaseFeatureSize = 2 + osm::kHighwayClassCount;

std::vector<double> base_feature(const GraphNode& node);

struct AugmentedNodeFeature {
  std::vector<double> base;
  std::vector<double> bev_slice;
  std::vector<double> combined;  // base ++ bev_slice
  GridIndex cell;
};

/// Concatenates every node's base feature with the BEV feature vector at its
/// grid cell. Nodes outside the grid get a zero slice. Throws DimensionMismatch
/// when the feature grid does not have the spec's H_B x W_B shape.
std::vector<AugmentedNodeFeature> augment_nodes(const SdMapGraph& graph,
                                                const raster::BevCanvas& bev,
                                                const raster::BevSpec& spec);

struct NoiseSpec {
  double translation_magnitude = 0.0;  // meters
  double rotation_magnitude = 0.0;     // degrees
  std::uint64_t seed = 0;
};

/// p' = R(rotation) p + translation, about the ego origin.
struct RigidTransform {
  Vec2 translation;
  double rotation = 0.0;  // radians

  Vec2 apply(Vec2 p) const;
};

/// Draws the scene-level localization error for `noise`: a uniform direction
/// on [0, 2pi) scaled to exactly translation_magnitude, and a rotation of
/// +/- rotation_magnitude. The stream is std::mt19937_64 seeded with noise.seed;
/// angle = (draw1 >> 11) * 2^-53 * 2pi, sign = low bit of draw2.
RigidTransform sample_perturbation(const NoiseSpec& noise);

/// Applies one rigid transform to every node; topology and classes unchanged.
SdMapGraph perturb(const SdMapGraph& graph, const NoiseSpec& noise);
SdMapGraph apply_transform(const SdMapGraph& graph, const RigidTransform& transform);

}  // namespace sdmapkit::graph_ops
