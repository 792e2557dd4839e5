#include "sdmapkit/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sdmapkit/error.hpp"
#include "sdmapkit/png.hpp"

namespace sdmapkit::raster {
namespace {

std::size_t cell_count(double lo, double hi, double resolution) {
  return static_cast<std::size_t>(std::llround((hi - lo) / resolution));
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

/// Inclusive index range of cells whose centres fall in [lo, hi] along one axis.
bool center_range(double lo, double hi, double mid, double resolution, std::size_t count,
                  std::size_t& first, std::size_t& last) {
  const double half = static_cast<double>(count) / 2.0;
  const double f = std::ceil((lo - mid) / resolution + half - 0.5);
  const double l = std::floor((hi - mid) / resolution + half - 0.5);
  if (l < 0.0 || f > static_cast<double>(count) - 1.0 || f > l) return false;
  first = static_cast<std::size_t>(std::max(f, 0.0));
  last = static_cast<std::size_t>(std::min(l, static_cast<double>(count) - 1.0));
  return true;
}

void draw_segment(BevCanvas& canvas, Vec2 a, Vec2 b, std::size_t channel, double width) {
  const BevSpec& spec = canvas.spec();
  const double half_width = width / 2.0;
  const double x_mid = (spec.x_min + spec.x_max) / 2.0;
  const double y_mid = (spec.y_min + spec.y_max) / 2.0;
  std::size_t r0 = 0, r1 = 0, c0 = 0, c1 = 0;
  // The bounding box is slightly padded; the exact distance test decides.
  const double pad = half_width + spec.resolution;
  if (!center_range(std::min(a.x, b.x) - pad, std::max(a.x, b.x) + pad, x_mid, spec.resolution,
                    canvas.rows(), r0, r1) ||
      !center_range(std::min(a.y, b.y) - pad, std::max(a.y, b.y) + pad, y_mid, spec.resolution,
                    canvas.cols(), c0, c1)) {
    return;
  }
  for (std::size_t r = r0; r <= r1; ++r) {
    for (std::size_t c = c0; c <= c1; ++c) {
      if (point_segment_distance(spec.cell_center(r, c), a, b) <= half_width) {
        canvas.at(r, c, channel) = 1.0f;
      }
    }
  }
}

std::array<std::uint8_t, 3> fallback_color(std::size_t channel) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 4> kColors = {
      {{255, 255, 255}, {255, 200, 0}, {0, 200, 80}, {255, 40, 40}}};
  return kColors[channel % kColors.size()];
}

std::size_t channel_named(const std::vector<PaletteChannel>& channels, const std::string& name) {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].name == name) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "palette has no channel named " + name);
}

}  // namespace

std::size_t BevSpec::rows() const { return cell_count(x_min, x_max, resolution); }
std::size_t BevSpec::cols() const { return cell_count(y_min, y_max, resolution); }
double BevSpec::cells_per_meter_x() const { return static_cast<double>(rows()) / (x_max - x_min); }
double BevSpec::cells_per_meter_y() const { return static_cast<double>(cols()) / (y_max - y_min); }

Vec2 BevSpec::cell_center(std::size_t row, std::size_t col) const {
  const double x_mid = (x_min + x_max) / 2.0;
  const double y_mid = (y_min + y_max) / 2.0;
  return {x_mid + (static_cast<double>(row) + 0.5 - static_cast<double>(rows()) / 2.0) * resolution,
          y_mid + (static_cast<double>(col) + 0.5 - static_cast<double>(cols()) / 2.0) * resolution};
}

void BevSpec::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorCode::InvalidArgument, "resolution must be > 0");
  }
  if (!(x_max > x_min) || !(y_max > y_min) || !std::isfinite(x_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_min) || !std::isfinite(y_max)) {
    throw Error(ErrorCode::InvalidArgument, "BEV ranges must be finite and non-degenerate");
  }
  if (rows() == 0 || cols() == 0) {
    throw Error(ErrorCode::InvalidArgument, "BEV grid has no cells at this resolution");
  }
}

BevCanvas::BevCanvas(const BevSpec& spec, std::size_t channels)
    : spec_(spec), rows_(spec.rows()), cols_(spec.cols()), channels_(channels) {
  spec.validate();
  data_.assign(rows_ * cols_ * channels_, 0.0f);
}

bool BevCanvas::is_blank() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return v == 0.0f; });
}

std::size_t BevCanvas::lit_cells(std::size_t channel) const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) n += at(r, c, channel) > 0.0f ? 1 : 0;
  }
  return n;
}

ClassPalette ClassPalette::defaults() {
  using osm::HighwayClass;
  ClassPalette p;
  p.channels = {{"road", {255, 255, 255}},
                {"crosswalk", {255, 200, 0}},
                {"sidewalk", {0, 200, 80}},
                {"control", {255, 40, 40}}};
  for (const HighwayClass cls : osm::all_highway_classes()) {
    p.classes[cls] = {0, 1.5};
  }
  p.classes[HighwayClass::crossing] = {1, 1.0};
  p.classes[HighwayClass::path] = {2, 1.0};
  p.classes[HighwayClass::stop] = {3, 2.0};
  p.classes[HighwayClass::traffic_sign] = {3, 2.0};
  p.classes[HighwayClass::traffic_signals] = {3, 2.0};
  return p;
}

void ClassPalette::validate() const {
  if (channels.empty()) throw Error(ErrorCode::InvalidArgument, "palette has no channels");
  for (const auto& [cls, style] : classes) {
    if (style.channel >= channels.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "class " + std::string(osm::to_string(cls)) + " uses a missing channel");
    }
    if (!(style.width > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "class " + std::string(osm::to_string(cls)) + " needs width > 0");
    }
  }
}

ClassPalette parse_palette(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("palette: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "palette must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "channels" && key != "classes") {
      throw Error(ErrorCode::SchemaError, "palette: unknown key " + key);
    }
  }
  const ClassPalette base = ClassPalette::defaults();
  ClassPalette out;
  try {
    if (doc.contains("channels")) {
      for (const auto& ch : doc.at("channels")) {
        PaletteChannel pc;
        pc.name = ch.at("name").get<std::string>();
        const auto rgb = ch.at("color").get<std::vector<int>>();
        if (rgb.size() != 3) throw Error(ErrorCode::SchemaError, "palette colour needs 3 values");
        for (std::size_t i = 0; i < 3; ++i) {
          pc.color[i] = static_cast<std::uint8_t>(std::clamp(rgb[i], 0, 255));
        }
        out.channels.push_back(pc);
      }
    } else {
      out.channels = base.channels;
    }
    for (const auto& [cls, style] : base.classes) {
      const std::string& name = base.channels[style.channel].name;
      for (std::size_t i = 0; i < out.channels.size(); ++i) {
        if (out.channels[i].name == name) out.classes[cls] = {i, style.width};
      }
    }
    if (doc.contains("classes")) {
      for (const auto& [name, style] : doc.at("classes").items()) {
        const auto cls = osm::parse_highway_class(name);
        if (!cls) throw Error(ErrorCode::SchemaError, "palette: unknown class " + name);
        ClassStyle s = out.classes.contains(*cls) ? out.classes[*cls] : ClassStyle{};
        if (style.contains("channel")) {
          s.channel = channel_named(out.channels, style.at("channel").get<std::string>());
        }
        if (style.contains("width")) s.width = style.at("width").get<double>();
        out.classes[*cls] = s;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("palette: ") + e.what());
  }
  out.validate();
  return out;
}

ClassPalette load_palette(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_palette(buffer.str());
}

std::vector<Stroke> strokes_from_graph(const SdMapGraph& graph, const ClassPalette& palette) {
  std::vector<Stroke> strokes;
  const auto deg = degrees(graph);
  for (const auto& e : graph.edges) {
    const auto style = palette.classes.find(e.cls);
    if (style == palette.classes.end()) continue;
    strokes.push_back({{graph.nodes[e.a].position, graph.nodes[e.b].position},
                       style->second.channel,
                       style->second.width});
  }
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (deg[i] != 0) continue;
    const auto style = palette.classes.find(graph.nodes[i].cls);
    if (style == palette.classes.end()) continue;
    strokes.push_back({{graph.nodes[i].position}, style->second.channel, style->second.width});
  }
  return strokes;
}

BevCanvas rasterize(std::span<const Stroke> strokes, const BevSpec& spec, std::size_t channels) {
  BevCanvas canvas(spec, channels);
  for (const auto& stroke : strokes) {
    if (stroke.channel >= channels) {
      throw Error(ErrorCode::DimensionMismatch, "stroke channel beyond canvas channels");
    }
    if (stroke.points.size() == 1) {
      draw_segment(canvas, stroke.points[0], stroke.points[0], stroke.channel, stroke.width);
    }
    for (std::size_t i = 0; i + 1 < stroke.points.size(); ++i) {
      draw_segment(canvas, stroke.points[i], stroke.points[i + 1], stroke.channel, stroke.width);
    }
  }
  return canvas;
}

BevCanvas rasterize(const SdMapGraph& graph, const BevSpec& spec, const ClassPalette& palette) {
  palette.validate();
  const auto strokes = strokes_from_graph(graph, palette);
  return rasterize(strokes, spec, palette.channels.size());
}

std::vector<std::uint8_t> canvas_to_png(const BevCanvas& canvas, const ClassPalette& palette) {
  const std::size_t channels = canvas.channels();
  if (channels > 4) {
    throw Error(ErrorCode::TooManyChannels,
                "PNG export supports at most 4 channels, canvas has " + std::to_string(channels));
  }
  const std::size_t height = canvas.rows();
  const std::size_t width = canvas.cols();
  const int out_channels = channels == 1 ? 1 : 3;
  std::vector<std::uint8_t> pixels(height * width * static_cast<std::size_t>(out_channels), 0);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t row = height - 1 - y;  // forward up
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t col = width - 1 - x;  // +y (left) on the left
      std::uint8_t* px = &pixels[(y * width + x) * static_cast<std::size_t>(out_channels)];
      if (channels == 1) {
        px[0] = static_cast<std::uint8_t>(std::lround(std::clamp(canvas.at(row, col, 0), 0.0f, 1.0f) * 255.0f));
        continue;
      }
      for (std::size_t ch = 0; ch < channels; ++ch) {
        const float v = std::clamp(canvas.at(row, col, ch), 0.0f, 1.0f);
        if (v <= 0.0f) continue;
        const auto color =
            ch < palette.channels.size() ? palette.channels[ch].color : fallback_color(ch);
        // Later channels paint over earlier ones.
        for (int k = 0; k < 3; ++k) {
          px[k] = static_cast<std::uint8_t>(std::lround((1.0f - v) * px[k] + v * color[k]));
        }
      }
    }
  }
  return encode_png(width, height, out_channels, pixels);
}

}  // namespace sdmapkit::raster
