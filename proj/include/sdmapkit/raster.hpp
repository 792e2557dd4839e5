#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sdmapkit/highway.hpp"
#include "sdmapkit/sd_graph.hpp"
#include "sdmapkit/vec.hpp"

namespace sdmapkit::raster {

/// Metric extent of an ego-centric grid. Rows follow x (forward), columns
/// follow y (lateral); cells are centred on the range midpoint.
struct BevSpec {
  double x_min = -50.0;
  double x_max = 50.0;
  double y_min = -25.0;
  double y_max = 25.0;
  double resolution = 0.5;  // meters per cell

  std::size_t rows() const;  // H_B
  std::size_t cols() const;  // W_B
  double cells_per_meter_x() const;
  double cells_per_meter_y() const;
  Vec2 cell_center(std::size_t row, std::size_t col) const;
  /// Throws InvalidArgument for degenerate ranges or non-positive resolution.
  void validate() const;
};

/// H x W x C float grid, row-major with channels innermost.
class BevCanvas {
 public:
  BevCanvas() = default;
  BevCanvas(const BevSpec& spec, std::size_t channels);

  const BevSpec& spec() const { return spec_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t channels() const { return channels_; }

  float& at(std::size_t row, std::size_t col, std::size_t channel) {
    return data_[(row * cols_ + col) * channels_ + channel];
  }
  float at(std::size_t row, std::size_t col, std::size_t channel) const {
    return data_[(row * cols_ + col) * channels_ + channel];
  }
  std::span<const float> cell(std::size_t row, std::size_t col) const {
    return {data_.data() + (row * cols_ + col) * channels_, channels_};
  }
  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool is_blank() const;
  std::size_t lit_cells(std::size_t channel) const;

 private:
  BevSpec spec_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t channels_ = 0;
  std::vector<float> data_;
};

struct PaletteChannel {
  std::string name;
  std::array<std::uint8_t, 3> color{};
};

struct ClassStyle {
  std::size_t channel = 0;
  double width = 1.0;  // meters
};

struct ClassPalette {
  std::vector<PaletteChannel> channels;
  std::map<osm::HighwayClass, ClassStyle> classes;

  /// road / crosswalk / sidewalk / control channels covering all 25 classes.
  static ClassPalette defaults();
  void validate() const;
};

/// JSON palette: {"channels":[{"name","color":[r,g,b]}], "classes":{name:{"channel","width"}}}.
/// Classes not listed keep their default style when its channel name exists.
ClassPalette load_palette(const std::filesystem::path& path);
ClassPalette parse_palette(const std::string& json_text);

/// Polyline (or single point) drawn with a round-capped stroke.
struct Stroke {
  std::vector<Vec2> points;
  std::size_t channel = 0;
  double width = 1.0;
};

std::vector<Stroke> strokes_from_graph(const SdMapGraph& graph, const ClassPalette& palette);

/// A cell is lit (1.0) iff its centre is within width/2 of a stroke segment.
/// Geometry outside the canvas is skipped. A blank result is the EmptyCanvas
/// signal (see BevCanvas::is_blank).
BevCanvas rasterize(std::span<const Stroke> strokes, const BevSpec& spec, std::size_t channels);
BevCanvas rasterize(const SdMapGraph& graph, const BevSpec& spec, const ClassPalette& palette);

/// 8-bit PNG with ego at the centre and forward (+x) pointing up. One channel
/// gives grayscale; 2-4 channels are painted in order with the palette colours,
/// each channel alpha-blended over the previous ones by its cell value.
std::vector<std::uint8_t> canvas_to_png(const BevCanvas& canvas, const ClassPalette& palette);

}  // namespace sdmapkit::raster
