#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sdmapkit/geo.hpp"
#include "sdmapkit/highway.hpp"

namespace sdmapkit::osm {

using OsmId = std::int64_t;
using Tags = std::map<std::string, std::string, std::less<>>;

struct OsmNode {
  OsmId id = 0;
  geo::GeoPoint location;
  Tags tags;
};

struct OsmWay {
  OsmId id = 0;
  std::vector<OsmId> node_refs;
  Tags tags;
};

enum class DiagnosticKind {
  DanglingNodeRef,  // way referenced a node missing from the document; way dropped
  ShortWay,         // way with fewer than two node refs; way dropped
  DuplicateId,      // repeated node or way id; later element dropped
  ExcludedWay,      // way without a recognised highway class
  ClippedWay,       // way crossed the bounding region and was cut
};

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind;
  OsmId element_id = 0;
  std::string message;
};

/// Parsed OSM document. Nodes and ways keep document order; every way in
/// `ways` only references ids present in `nodes`.
class OsmDocument {
 public:
  OsmDocument() = default;
  OsmDocument(std::vector<OsmNode> nodes, std::vector<OsmWay> ways,
              std::vector<Diagnostic> diagnostics);

  const std::vector<OsmNode>& nodes() const { return nodes_; }
  const std::vector<OsmWay>& ways() const { return ways_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

  const OsmNode* find_node(OsmId id) const;

 private:
  std::vector<OsmNode> nodes_;
  std::vector<OsmWay> ways_;
  std::vector<Diagnostic> diagnostics_;
  std::unordered_map<OsmId, std::size_t> node_index_;
};

/// Parses the OSM v0.6 XML subset (osm, node, way, nd, tag; other elements are
/// skipped). Throws MalformedXml with a line:column position on syntax errors
/// or missing required attributes. Ways with dangling refs are dropped and
/// reported as DanglingNodeRef diagnostics.
OsmDocument parse_osm_xml(std::string_view document);
OsmDocument parse_osm_file(const std::filesystem::path& path);

struct ClassifiedWay {
  OsmWay way;
  HighwayClass cls;
};

struct HighwayFilterResult {
  std::vector<ClassifiedWay> kept;
  std::size_t excluded = 0;
};

/// Keeps the ways whose `highway` tag is one of the 25 ingested classes.
HighwayFilterResult filter_highways(const std::vector<OsmWay>& ways);

}  // namespace sdmapkit::osm
