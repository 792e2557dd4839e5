#include "sdmapkit/graph_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sdmapkit/error.hpp"

namespace sdmapkit::graph_ops {

GridIndex align_to_grid(Vec2 position, const raster::BevSpec& spec) {
  const auto rows = static_cast<std::int64_t>(spec.rows());
  const auto cols = static_cast<std::int64_t>(spec.cols());
  GridIndex idx;
  const double fx = std::floor(position.x * spec.cells_per_meter_x());
  const double fy = std::floor(position.y * spec.cells_per_meter_y());
  // Keep far-away positions representable; they are out of range either way.
  constexpr double kLimit = 4.0e18;
  idx.x_b = static_cast<std::int64_t>(std::clamp(fx, -kLimit, kLimit)) + rows / 2;
  idx.y_b = static_cast<std::int64_t>(std::clamp(fy, -kLimit, kLimit)) + cols / 2;
  idx.in_range = std::isfinite(fx) && std::isfinite(fy) && idx.x_b >= 0 && idx.x_b < rows &&
                 idx.y_b >= 0 && idx.y_b < cols;
  return idx;
}

std::vector<double> base_feature(const GraphNode& node) {
  std::vector<double> f(kBaseFeatureSize, 0.0);
  f[0] = node.position.x;
  f[1] = node.position.y;
  f[2 + osm::index_of(node.cls)] = 1.0;
  return f;
}

std::vector<AugmentedNodeFeature> augment_nodes(const SdMapGraph& graph,
                                                const raster::BevCanvas& bev,
                                                const raster::BevSpec& spec) {
  if (bev.rows() != spec.rows() || bev.cols() != spec.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "BEV features are " + std::to_string(bev.rows()) + "x" +
                    std::to_string(bev.cols()) + ", spec expects " + std::to_string(spec.rows()) +
                    "x" + std::to_string(spec.cols()));
  }
  std::vector<AugmentedNodeFeature> out;
  out.reserve(graph.nodes.size());
  for (const auto& node : graph.nodes) {
    AugmentedNodeFeature f;
    f.base = base_feature(node);
    f.cell = align_to_grid(node.position, spec);
    f.bev_slice.assign(bev.channels(), 0.0);
    if (f.cell.in_range) {
      const auto cell = bev.cell(static_cast<std::size_t>(f.cell.x_b),
                                 static_cast<std::size_t>(f.cell.y_b));
      for (std::size_t c = 0; c < cell.size(); ++c) f.bev_slice[c] = cell[c];
    }
    f.combined = f.base;
    f.combined.insert(f.combined.end(), f.bev_slice.begin(), f.bev_slice.end());
    out.push_back(std::move(f));
  }
  return out;
}

Vec2 RigidTransform::apply(Vec2 p) const {
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  return Vec2{c * p.x - s * p.y, s * p.x + c * p.y} + translation;
}

RigidTransform sample_perturbation(const NoiseSpec& noise) {
  if (!(noise.translation_magnitude >= 0.0) || !(noise.rotation_magnitude >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise magnitudes must be >= 0");
  }
  std::mt19937_64 gen(noise.seed);
  const std::uint64_t draw_angle = gen();
  const std::uint64_t draw_sign = gen();
  const double unit = static_cast<double>(draw_angle >> 11) * 0x1.0p-53;
  const double angle = unit * 2.0 * std::numbers::pi;
  const double sign = (draw_sign & 1U) != 0 ? 1.0 : -1.0;
  RigidTransform t;
  t.translation = {noise.translation_magnitude * std::cos(angle),
                   noise.translation_magnitude * std::sin(angle)};
  t.rotation = sign * noise.rotation_magnitude * std::numbers::pi / 180.0;
  return t;
}

SdMapGraph apply_transform(const SdMapGraph& graph, const RigidTransform& transform) {
  SdMapGraph out = graph;
  if (transform.rotation == 0.0 && transform.translation == Vec2{}) return out;
  for (auto& node : out.nodes) node.position = transform.apply(node.position);
  return out;
}

SdMapGraph perturb(const SdMapGraph& graph, const NoiseSpec& noise) {
  return apply_transform(graph, sample_perturbation(noise));
}

}  // namespace sdmapkit::graph_ops
