#include "sdmapkit/ingest.hpp"

#include <cmath>
#include <set>
#include <unordered_map>
#include <utility>

#include "sdmapkit/error.hpp"

namespace sdmapkit::osm {
namespace {

// Absolute slack on edge lengths so a resampled graph is a fixed point of
// resampling despite rounding in the interpolated positions.
constexpr double kLengthSlack = 1e-10;

struct ClipInterval {
  double t0 = 0.0;
  double t1 = 1.0;
};

/// Liang-Barsky clip of p + t (q - p), t in [0, 1], against the box.
std::optional<ClipInterval> clip_segment(Vec2 p, Vec2 q, const geo::BoundingRegion& box) {
  const Vec2 d = q - p;
  ClipInterval out;
  const double pk[4] = {-d.x, d.x, -d.y, d.y};
  const double qk[4] = {p.x - box.min_corner.x, box.max_corner.x - p.x, p.y - box.min_corner.y,
                        box.max_corner.y - p.y};
  for (int k = 0; k < 4; ++k) {
    if (pk[k] == 0.0) {
      if (qk[k] < 0.0) return std::nullopt;
      continue;
    }
    const double r = qk[k] / pk[k];
    if (pk[k] < 0.0) {
      out.t0 = std::max(out.t0, r);
    } else {
      out.t1 = std::min(out.t1, r);
    }
  }
  if (out.t0 > out.t1) return std::nullopt;
  return out;
}

class GraphAssembler {
 public:
  GraphAssembler(const OsmDocument& store, const geo::GeoPoint& origin, const geo::EgoPose& ego)
      : store_(store), origin_(origin), ego_(ego) {
    graph_.frame = {origin, ego};
  }

  Vec2 projected(OsmId id) const {
    return geo::project_wgs84(origin_, store_.find_node(id)->location);
  }

  std::size_t way_node(OsmId id, HighwayClass cls, OsmId way_id, Vec2 shared) {
    const auto it = by_osm_id_.find(id);
    if (it != by_osm_id_.end()) return it->second;
    const std::size_t idx = add_node(shared, cls, way_id, id);
    by_osm_id_.emplace(id, idx);
    return idx;
  }

  std::size_t add_node(Vec2 shared, HighwayClass cls, OsmId way_id, std::optional<OsmId> osm_id) {
    graph_.nodes.push_back({geo::to_ego_frame(ego_, shared), cls, way_id, osm_id});
    return graph_.nodes.size() - 1;
  }

  void add_edge(std::size_t a, std::size_t b, HighwayClass cls, OsmId way_id) {
    if (a == b) return;
    const auto key = std::minmax(a, b);
    if (!edge_keys_.insert(key).second) return;
    graph_.edges.push_back({a, b, cls, way_id});
  }

  SdMapGraph take() { return std::move(graph_); }

 private:
  const OsmDocument& store_;
  geo::GeoPoint origin_;
  geo::EgoPose ego_;
  SdMapGraph graph_;
  std::unordered_map<OsmId, std::size_t> by_osm_id_;
  std::set<std::pair<std::size_t, std::size_t>> edge_keys_;
};

}  // namespace

GraphBuild build_graph(const std::vector<ClassifiedWay>& ways, const OsmDocument& store,
                       const geo::GeoPoint& origin, const geo::EgoPose& ego,
                       const BuildOptions& options) {
  for (const auto& cw : ways) {
    for (const OsmId ref : cw.way.node_refs) {
      if (store.find_node(ref) == nullptr) {
        throw Error(ErrorCode::DanglingNodeRef, "way " + std::to_string(cw.way.id) +
                                                    " references missing node " +
                                                    std::to_string(ref));
      }
    }
  }

  GraphAssembler assembler(store, origin, ego);
  GraphBuild result;

  for (const auto& [way, cls] : ways) {
    bool clipped = false;
    for (std::size_t i = 0; i + 1 < way.node_refs.size(); ++i) {
      const OsmId ref_a = way.node_refs[i];
      const OsmId ref_b = way.node_refs[i + 1];
      if (ref_a == ref_b) continue;
      const Vec2 p = assembler.projected(ref_a);
      const Vec2 q = assembler.projected(ref_b);
      if (!options.clip) {
        const std::size_t a = assembler.way_node(ref_a, cls, way.id, p);
        const std::size_t b = assembler.way_node(ref_b, cls, way.id, q);
        assembler.add_edge(a, b, cls, way.id);
        continue;
      }
      const auto interval = clip_segment(p, q, *options.clip);
      if (!interval) {
        clipped = true;
        continue;
      }
      const auto [t0, t1] = *interval;
      if (t0 > 0.0 || t1 < 1.0) clipped = true;
      if (t1 <= t0) continue;  // touches the box in a single point
      const std::size_t a = t0 == 0.0 ? assembler.way_node(ref_a, cls, way.id, p)
                                      : assembler.add_node(p + t0 * (q - p), cls, way.id, {});
      const std::size_t b = t1 == 1.0 ? assembler.way_node(ref_b, cls, way.id, q)
                                      : assembler.add_node(p + t1 * (q - p), cls, way.id, {});
      assembler.add_edge(a, b, cls, way.id);
    }
    if (clipped) {
      result.diagnostics.push_back(
          {DiagnosticKind::ClippedWay, way.id, "way cut at the bounding region"});
    }
  }

  if (options.point_features) {
    for (const auto& node : store.nodes()) {
      const auto tag = node.tags.find("highway");
      if (tag == node.tags.end()) continue;
      const auto cls = parse_highway_class(tag->second);
      if (!cls) continue;
      const Vec2 shared = geo::project_wgs84(origin, node.location);
      if (options.clip && !options.clip->contains(shared)) continue;
      assembler.add_node(shared, *cls, 0, node.id);
    }
  }

  result.graph = assembler.take();
  return result;
}

SdMapGraph resample_graph(const SdMapGraph& graph, double density) {
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw Error(ErrorCode::InvalidDensity, "density must be > 0, got " + std::to_string(density));
  }
  SdMapGraph out;
  out.frame = graph.frame;
  out.nodes = graph.nodes;
  out.edges.reserve(graph.edges.size());
  for (const auto& edge : graph.edges) {
    const Vec2 pa = graph.nodes[edge.a].position;
    const Vec2 pb = graph.nodes[edge.b].position;
    const double length = distance(pa, pb);
    if (length <= density + kLengthSlack) {
      out.edges.push_back(edge);
      continue;
    }
    const auto pieces = static_cast<std::size_t>(std::ceil((length - kLengthSlack) / density));
    std::size_t prev = edge.a;
    for (std::size_t k = 1; k < pieces; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(pieces);
      out.nodes.push_back({pa + t * (pb - pa), edge.cls, edge.source_way_id, std::nullopt});
      const std::size_t inserted = out.nodes.size() - 1;
      out.edges.push_back({prev, inserted, edge.cls, edge.source_way_id});
      prev = inserted;
    }
    out.edges.push_back({prev, edge.b, edge.cls, edge.source_way_id});
  }
  return out;
}

}  // namespace sdmapkit::osm
