#include "sdmapkit/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "sdmapkit/error.hpp"
#include "sdmapkit/png.hpp"

namespace sdmapkit::plot {
namespace {

void draw_line(RgbImage& img, long x0, long y0, long x1, long y1, const std::array<std::uint8_t, 3>& c) {
  const long dx = std::abs(x1 - x0);
  const long dy = -std::abs(y1 - y0);
  const long sx = x0 < x1 ? 1 : -1;
  const long sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  while (true) {
    img.set(x0, y0, c[0], c[1], c[2]);
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::vector<std::uint8_t> render_graph(const SdMapGraph& graph, const raster::ClassPalette& palette) {
  palette.validate();
  constexpr long kSize = static_cast<long>(kGraphImageSize);
  constexpr long kMargin = 16;
  double extent = 10.0;
  for (const auto& n : graph.nodes) {
    extent = std::max({extent, std::abs(n.position.x) + 5.0, std::abs(n.position.y) + 5.0});
  }
  const double scale = static_cast<double>(kSize - 2 * kMargin) / (2.0 * extent);
  const long centre = kSize / 2;
  auto px = [&](Vec2 p) {
    return std::pair<long, long>{centre - std::lround(p.y * scale), centre - std::lround(p.x * scale)};
  };
  auto colour = [&](osm::HighwayClass cls) {
    const auto it = palette.classes.find(cls);
    const std::size_t ch = it == palette.classes.end() ? 0 : it->second.channel;
    return palette.channels[ch].color;
  };

  RgbImage img(kGraphImageSize, kGraphImageSize, 24);
  // 10 m grid
  for (long k = -static_cast<long>(extent / 10.0); k <= static_cast<long>(extent / 10.0); ++k) {
    const long off = std::lround(static_cast<double>(k) * 10.0 * scale);
    for (long t = 0; t < kSize; ++t) {
      img.set(centre + off, t, 48, 48, 48);
      img.set(t, centre + off, 48, 48, 48);
    }
  }
  for (const auto& e : graph.edges) {
    const auto [x0, y0] = px(graph.nodes[e.a].position);
    const auto [x1, y1] = px(graph.nodes[e.b].position);
    draw_line(img, x0, y0, x1, y1, colour(graph.nodes[e.a].cls));
  }
  const auto deg = degrees(graph);
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (deg[i] != 0) continue;
    const auto [x, y] = px(graph.nodes[i].position);
    const auto c = colour(graph.nodes[i].cls);
    img.fill_rect(x - 2, y - 2, x + 2, y + 2, c[0], c[1], c[2]);
  }
  for (long t = -6; t <= 6; ++t) {
    img.set(centre + t, centre, 0, 220, 220);
    img.set(centre, centre + t, 0, 220, 220);
  }
  img.draw_text(4, 4, "GRID 10M", 2, 160, 160, 160);
  return img.to_png();
}

std::vector<Bar> report_bars(std::string_view report_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(report_json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("report: ") + e.what());
  }
  if (!j.is_object() || !j.contains("task")) throw Error(ErrorCode::SchemaError, "report: missing task");
  std::vector<Bar> bars;
  try {
    if (j.at("task") == "perception") {
      const auto& lane = j.at("lane_ap");
      const auto thresholds = lane.at("thresholds").get<std::vector<double>>();
      const auto ap = lane.at("ap").get<std::vector<double>>();
      for (std::size_t i = 0; i < thresholds.size() && i < ap.size(); ++i) {
        char label[32];
        std::snprintf(label, sizeof(label), "AP@%g", thresholds[i]);
        bars.emplace_back(label, ap[i]);
      }
      bars.emplace_back("MEAN", lane.at("mean").get<double>());
    } else {
      for (const char* key : {"DET_l", "DET_t", "TOP_ll", "TOP_lt", "OLS"}) {
        bars.emplace_back(key, j.at(key).get<double>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("report: ") + e.what());
  }
  return bars;
}

std::vector<std::uint8_t> render_bars(const std::vector<Bar>& bars) {
  constexpr long kWidth = 480;
  constexpr long kHeight = 320;
  constexpr long kLeft = 40;
  constexpr long kRight = 20;
  constexpr long kTop = 30;
  constexpr long kBottom = 270;  // y of the zero line
  RgbImage img(kWidth, kHeight, 255);
  for (const double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const long y = kBottom - std::lround(tick * (kBottom - kTop));
    for (long x = kLeft; x < kWidth - kRight; ++x) img.set(x, y, 220, 220, 220);
    img.draw_text(4, y - 4, format_value(tick).substr(0, 4), 1, 90, 90, 90);
  }
  img.fill_rect(kLeft, kTop, kLeft, kBottom, 0, 0, 0);
  img.fill_rect(kLeft, kBottom, kWidth - kRight, kBottom, 0, 0, 0);
  if (!bars.empty()) {
    const long slot = (kWidth - kRight - kLeft) / static_cast<long>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
      const double v = std::clamp(bars[i].second, 0.0, 1.0);
      const long x0 = kLeft + static_cast<long>(i) * slot + slot / 5;
      const long x1 = kLeft + static_cast<long>(i + 1) * slot - slot / 5;
      const long height = std::lround(v * (kBottom - kTop));
      if (height > 0) img.fill_rect(x0, kBottom - height, x1, kBottom - 1, 60, 110, 200);
      img.draw_text(x0, kBottom - height - 14, format_value(bars[i].second), 2, 0, 0, 0);
      img.draw_text(x0, kBottom + 10, bars[i].first, 2, 0, 0, 0);
    }
  }
  return img.to_png();
}

}  // namespace sdmapkit::plot
