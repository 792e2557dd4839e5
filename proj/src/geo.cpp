#include "sdmapkit/geo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdmapkit/error.hpp"

namespace sdmapkit::geo {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Radii {
  double meridional;
  double prime_vertical;
};

Radii radii_at(double lat_deg) {
  const double e2 = kWgs84Flattening * (2.0 - kWgs84Flattening);
  const double s = std::sin(lat_deg * kDegToRad);
  const double w2 = 1.0 - e2 * s * s;
  const double w = std::sqrt(w2);
  return {kWgs84SemiMajor * (1.0 - e2) / (w2 * w), kWgs84SemiMajor / w};
}

void require_valid(const GeoPoint& p, const char* what) {
  if (!is_valid(p)) {
    throw Error(ErrorCode::InvalidCoordinate, std::string(what) + " (" + std::to_string(p.lat) +
                                                  ", " + std::to_string(p.lon) + ")");
  }
}

}  // namespace

bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

double normalize_heading(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double h = std::fmod(radians + std::numbers::pi, two_pi);
  if (h < 0.0) h += two_pi;
  h -= std::numbers::pi;
  // fmod can round up to exactly +pi.
  if (h >= std::numbers::pi) h -= two_pi;
  return h;
}

EgoPose make_pose(Vec2 position, double heading) {
  if (!std::isfinite(position.x) || !std::isfinite(position.y) || !std::isfinite(heading)) {
    throw Error(ErrorCode::InvalidArgument, "pose must be finite");
  }
  return {position, normalize_heading(heading)};
}

Vec2 project_wgs84(const GeoPoint& origin, const GeoPoint& point) {
  require_valid(origin, "origin");
  require_valid(point, "point");
  const Radii r = radii_at(origin.lat);
  double dlon = point.lon - origin.lon;
  if (dlon > 180.0) dlon -= 360.0;
  if (dlon < -180.0) dlon += 360.0;
  const double east = dlon * kDegToRad * r.prime_vertical * std::cos(origin.lat * kDegToRad);
  const double north = (point.lat - origin.lat) * kDegToRad * r.meridional;
  return {east, north};
}

GeoPoint unproject_wgs84(const GeoPoint& origin, Vec2 offset) {
  require_valid(origin, "origin");
  const Radii r = radii_at(origin.lat);
  const double lat = origin.lat + offset.y / r.meridional / kDegToRad;
  const double lon =
      origin.lon + offset.x / (r.prime_vertical * std::cos(origin.lat * kDegToRad)) / kDegToRad;
  return {lat, lon};
}

BoundingRegion bounding_region(std::span<const EgoPose> poses, double margin) {
  if (poses.empty()) throw Error(ErrorCode::EmptyInput, "bounding_region needs at least one pose");
  if (!(margin >= 0.0)) throw Error(ErrorCode::InvalidArgument, "margin must be >= 0");
  BoundingRegion box{poses.front().position, poses.front().position};
  for (const auto& pose : poses) {
    box.min_corner.x = std::min(box.min_corner.x, pose.position.x);
    box.min_corner.y = std::min(box.min_corner.y, pose.position.y);
    box.max_corner.x = std::max(box.max_corner.x, pose.position.x);
    box.max_corner.y = std::max(box.max_corner.y, pose.position.y);
  }
  box.min_corner = box.min_corner - Vec2{margin, margin};
  box.max_corner = box.max_corner + Vec2{margin, margin};
  return box;
}

Vec2 to_ego_frame(const EgoPose& pose, Vec2 point) {
  const Vec2 d = point - pose.position;
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

Vec2 from_ego_frame(const EgoPose& pose, Vec2 point) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return Vec2{c * point.x - s * point.y, s * point.x + c * point.y} + pose.position;
}

}  // namespace sdmapkit::geo
