#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sdmapkit/geo.hpp"
#include "sdmapkit/highway.hpp"
#include "sdmapkit/vec.hpp"

namespace sdmapkit {

struct GraphNode {
  Vec2 position;  // ego frame, meters
  osm::HighwayClass cls = osm::HighwayClass::road;
  std::int64_t source_way_id = 0;             // 0 for point features and nodes read back from disk
  std::optional<std::int64_t> source_node_id;  // empty for interpolated/clipped nodes
};

struct GraphEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  osm::HighwayClass cls = osm::HighwayClass::road;
  std::int64_t source_way_id = 0;
};

/// Where the graph's ego frame sits on the globe.
struct GraphFrame {
  geo::GeoPoint origin;
  geo::EgoPose ego;
};

/// Ego-centric SD map graph. Edges are undirected; zero-degree nodes are
/// point features (stop, traffic_signals, ...) carried for rasterization.
struct SdMapGraph {
  GraphFrame frame;
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
};

using BoolMatrix = std::vector<std::vector<std::uint8_t>>;

BoolMatrix adjacency_matrix(const SdMapGraph& graph);
std::vector<std::size_t> degrees(const SdMapGraph& graph);
std::size_t connected_components(const SdMapGraph& graph);
double total_edge_length(const SdMapGraph& graph);
double max_edge_length(const SdMapGraph& graph);

}  // namespace sdmapkit
