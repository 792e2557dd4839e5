#include "sdmapkit/highway.hpp"

#include <algorithm>

namespace sdmapkit::osm {
namespace {

constexpr std::array<std::string_view, kHighwayClassCount> kNames = {
    "crossing",       "living_street",  "mini_roundabout", "motorway",     "motorway_junction",
    "motorway_link",  "path",           "primary",         "primary_link", "residential",
    "road",           "secondary",      "secondary_link",  "service",      "services",
    "stop",           "tertiary",       "tertiary_link",   "traffic_sign", "traffic_signals",
    "trunk",          "trunk_link",     "turning_circle",  "turning_loop", "unclassified",
};

}  // namespace

std::optional<HighwayClass> parse_highway_class(std::string_view value) {
  const auto it = std::find(kNames.begin(), kNames.end(), value);
  if (it == kNames.end()) return std::nullopt;
  return static_cast<HighwayClass>(it - kNames.begin());
}

std::string_view to_string(HighwayClass cls) { return kNames[index_of(cls)]; }

const std::array<HighwayClass, kHighwayClassCount>& all_highway_classes() {
  static const auto classes = [] {
    std::array<HighwayClass, kHighwayClassCount> out{};
    for (std::size_t i = 0; i < kHighwayClassCount; ++i) out[i] = static_cast<HighwayClass>(i);
    return out;
  }();
  return classes;
}

}  // namespace sdmapkit::osm
