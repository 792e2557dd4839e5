#pragma once

#include <numbers>
#include <span>

#include "sdmapkit/vec.hpp"

namespace sdmapkit::geo {

inline constexpr double kWgs84SemiMajor = 6378137.0;
inline constexpr double kWgs84Flattening = 1.0 / 298.257223563;
inline constexpr double kDefaultMargin = 200.0;

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

/// Vehicle pose in the shared Cartesian frame. Heading is CCW from +x,
/// normalized to [-pi, pi).
struct EgoPose {
  Vec2 position;
  double heading = 0.0;
};

struct BoundingRegion {
  Vec2 min_corner;
  Vec2 max_corner;

  bool contains(Vec2 p) const {
    return p.x >= min_corner.x && p.x <= max_corner.x && p.y >= min_corner.y &&
           p.y <= max_corner.y;
  }
  bool contains(const BoundingRegion& other) const {
    return contains(other.min_corner) && contains(other.max_corner);
  }
};

bool is_valid(const GeoPoint& p);
double normalize_heading(double radians);
EgoPose make_pose(Vec2 position, double heading);

/// East/north offset of `point` from `origin` on the local tangent plane.
///
/// Uses the WGS84 radii of curvature at the origin latitude: the prime
/// vertical radius (scaled by cos(lat0)) for the east axis and the meridional
/// radius for the north axis. Error grows quadratically with distance and is
/// sub-centimeter over a 1 km scene. Throws InvalidCoordinate for lat/lon out of
/// range.
Vec2 project_wgs84(const GeoPoint& origin, const GeoPoint& point);

/// Inverse of project_wgs84 for the same origin.
GeoPoint unproject_wgs84(const GeoPoint& origin, Vec2 offset);

/// Axis-aligned box around all pose positions grown by `margin` on every side.
/// Throws EmptyInput for no poses and InvalidArgument for a negative margin.
BoundingRegion bounding_region(std::span<const EgoPose> poses, double margin = kDefaultMargin);

/// Shared frame -> ego frame: translate by -position, rotate by -heading.
Vec2 to_ego_frame(const EgoPose& pose, Vec2 point);
Vec2 from_ego_frame(const EgoPose& pose, Vec2 point);

}  // namespace sdmapkit::geo
