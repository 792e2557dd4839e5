#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdmapkit/raster.hpp"
#include "sdmapkit/sd_graph.hpp"

namespace sdmapkit::plot {

inline constexpr std::size_t kGraphImageSize = 512;

/// Top-down view of the graph in the ego frame: forward points up, +y (left)
/// is drawn on the left. Edges take their class colour from the palette,
/// zero-degree nodes are drawn as squares, the ego origin as a cyan cross.
std::vector<std::uint8_t> render_graph(const SdMapGraph& graph, const raster::ClassPalette& palette);

using Bar = std::pair<std::string, double>;

/// Headline values from a report JSON document (reasoning: DET_l, DET_t,
/// TOP_ll, TOP_lt, OLS; perception: AP per threshold and the mean).
/// Throws SchemaError if the document is not a report.
std::vector<Bar> report_bars(std::string_view report_json);

/// Bar chart on a [0, 1] axis with the label under and the value over each bar.
std::vector<std::uint8_t> render_bars(const std::vector<Bar>& bars);

}  // namespace sdmapkit::plot
