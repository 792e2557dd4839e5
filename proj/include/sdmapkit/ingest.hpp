#pragma once

#include <optional>
#include <vector>

#include "sdmapkit/osm.hpp"
#include "sdmapkit/sd_graph.hpp"

namespace sdmapkit::osm {

inline constexpr double kDefaultDensity = 1.0;  // meters per waypoint

struct BuildOptions {
  /// Clip region in the projected (shared) frame. Ways crossing it are cut
  /// with an interpolated boundary node; segments fully outside are dropped.
  std::optional<geo::BoundingRegion> clip;
  /// Add OSM nodes whose own highway tag is an ingested class as zero-degree
  /// annotation nodes.
  bool point_features = true;
};

struct GraphBuild {
  SdMapGraph graph;
  std::vector<Diagnostic> diagnostics;
};

/// One graph node per distinct OSM node in the kept ways (shared nodes become
/// junctions), one undirected edge per consecutive node pair. Positions are
/// projected around `origin` and expressed in the `ego` frame.
GraphBuild build_graph(const std::vector<ClassifiedWay>& ways, const OsmDocument& store,
                       const geo::GeoPoint& origin, const geo::EgoPose& ego,
                       const BuildOptions& options = {});

/// Subdivides every edge longer than `density` into ceil(length / density)
/// equal pieces. Original nodes keep their indices; inserted nodes are
/// appended and inherit the edge class. Throws InvalidDensity for density <= 0.
SdMapGraph resample_graph(const SdMapGraph& graph, double density = kDefaultDensity);

}  // namespace sdmapkit::osm
