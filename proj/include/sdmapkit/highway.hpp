#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace sdmapkit::osm {

/// The 25 OSM `highway` values the toolkit ingests. Anything else is ignored.
enum class HighwayClass : unsigned char {
  crossing,
  living_street,
  mini_roundabout,
  motorway,
  motorway_junction,
  motorway_link,
  path,
  primary,
  primary_link,
  residential,
  road,
  secondary,
  secondary_link,
  service,
  services,
  stop,
  tertiary,
  tertiary_link,
  traffic_sign,
  traffic_signals,
  trunk,
  trunk_link,
  turning_circle,
  turning_loop,
  unclassified,
};

inline constexpr std::size_t kHighwayClassCount = 25;

std::optional<HighwayClass> parse_highway_class(std::string_view value);
std::string_view to_string(HighwayClass cls);
const std::array<HighwayClass, kHighwayClassCount>& all_highway_classes();

inline std::size_t index_of(HighwayClass cls) { return static_cast<std::size_t>(cls); }

}  // namespace sdmapkit::osm
