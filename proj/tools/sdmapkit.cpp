#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdmapkit/error.hpp"
#include "sdmapkit/evaluate.hpp"
#include "sdmapkit/formats.hpp"
#include "sdmapkit/geo.hpp"
#include "sdmapkit/graph_ops.hpp"
#include "sdmapkit/ingest.hpp"
#include "sdmapkit/osm.hpp"
#include "sdmapkit/plot.hpp"
#include "sdmapkit/raster.hpp"

namespace fs = std::filesystem;
using namespace sdmapkit;

namespace {

constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

// Localization error grid swept by `perturb --sweep`.
const std::vector<double> kSweepTranslations = {0.25, 0.5, 1.0, 2.0};
const std::vector<double> kSweepRotations = {0.0, 5.0, 10.0};

struct IngestArgs {
  std::string osm;
  std::string poses;
  std::string out;
  double origin_lat = 0.0;
  double origin_lon = 0.0;
  double margin = geo::kDefaultMargin;
  double density = osm::kDefaultDensity;
  std::string anchor = "first";
  bool no_clip = false;
  bool no_point_features = false;
};

struct SpecArgs {
  raster::BevSpec spec;
  std::string palette;
};

struct RasterizeArgs {
  std::string graph;
  std::string out;
  std::string png;
  SpecArgs spec;
};

struct AlignArgs {
  std::string graph;
  std::string bev;
  std::string out;
};

struct PerturbArgs {
  std::string graph;
  std::string out;
  double trans = 0.0;
  double rot = 0.0;
  std::uint64_t seed = 0;
  bool sweep = false;
};

struct EvaluateArgs {
  std::string pred;
  std::string gt;
  std::string out;
  std::string csv;
  std::string task = "reasoning";
  std::vector<double> thresholds;
  std::string ols_variant = "sqrt";
  std::string matcher = "greedy";
  unsigned threads = 0;
};

struct PlotArgs {
  std::string input;
  std::string out;
  std::string palette;
};

std::string format_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

fs::path with_suffix(const fs::path& out, const std::string& suffix) {
  // a/b.sdg.json + "_3" -> a/b_3.sdg.json
  const std::string name = out.filename().string();
  const auto dot = name.find('.');
  const std::string stem = dot == std::string::npos ? name : name.substr(0, dot);
  const std::string ext = dot == std::string::npos ? "" : name.substr(dot);
  return out.parent_path() / (stem + suffix + ext);
}

raster::ClassPalette palette_from(const std::string& path) {
  return path.empty() ? raster::ClassPalette::defaults() : raster::load_palette(path);
}

int run_ingest(const IngestArgs& a) {
  const geo::GeoPoint origin{a.origin_lat, a.origin_lon};
  if (!geo::is_valid(origin)) {
    throw Error(ErrorCode::InvalidArgument, "origin outside WGS84 range");
  }
  const auto poses = formats::read_poses_file(a.poses);
  const auto document = osm::parse_osm_file(a.osm);
  const auto filtered = osm::filter_highways(document.ways());
  const auto region = geo::bounding_region(poses, a.margin);

  osm::BuildOptions options;
  if (!a.no_clip) options.clip = region;
  options.point_features = !a.no_point_features;

  const std::size_t outputs = a.anchor == "each" ? poses.size() : 1;
  for (std::size_t i = 0; i < outputs; ++i) {
    auto build = osm::build_graph(filtered.kept, document, origin, poses[i], options);
    const auto graph = osm::resample_graph(build.graph, a.density);
    const fs::path out = a.anchor == "each" ? with_suffix(a.out, "_" + std::to_string(i)) : fs::path(a.out);
    formats::write_sdg_file(graph, out);

    std::map<std::string, std::size_t> counts;
    for (const auto& d : document.diagnostics()) ++counts[std::string(osm::to_string(d.kind))];
    for (const auto& d : build.diagnostics) ++counts[std::string(osm::to_string(d.kind))];
    std::cerr << out.string() << ": nodes=" << graph.nodes.size() << " edges=" << graph.edges.size()
              << " components=" << connected_components(graph)
              << " max_spacing=" << format_number(max_edge_length(graph))
              << " excluded_ways=" << filtered.excluded;
    for (const auto& [kind, n] : counts) std::cerr << ' ' << kind << '=' << n;
    std::cerr << '\n';
  }
  return 0;
}

int run_rasterize(const RasterizeArgs& a) {
  a.spec.spec.validate();
  const auto palette = palette_from(a.spec.palette);
  const auto graph = formats::read_sdg_file(a.graph);
  const auto canvas = raster::rasterize(graph, a.spec.spec, palette);
  formats::write_file(a.out, formats::write_bev(canvas));
  if (!a.png.empty()) formats::write_file(a.png, raster::canvas_to_png(canvas, palette));
  std::cerr << a.out << ": " << canvas.rows() << "x" << canvas.cols() << "x" << canvas.channels();
  for (std::size_t c = 0; c < canvas.channels(); ++c) {
    std::cerr << ' ' << palette.channels[c].name << '=' << canvas.lit_cells(c);
  }
  if (canvas.is_blank()) std::cerr << " (empty canvas)";
  std::cerr << '\n';
  return 0;
}

int run_align(const AlignArgs& a) {
  const auto graph = formats::read_sdg_file(a.graph);
  const auto bev = formats::read_bev_file(a.bev);
  const auto rows = graph_ops::augment_nodes(graph, bev, bev.spec());
  formats::write_file(a.out, formats::write_augmented(rows));
  std::size_t in_range = 0;
  for (const auto& r : rows) in_range += r.cell.in_range ? 1 : 0;
  std::cerr << a.out << ": nodes=" << rows.size() << " in_range=" << in_range << '\n';
  return 0;
}

int run_perturb(const PerturbArgs& a) {
  const auto graph = formats::read_sdg_file(a.graph);
  if (!a.sweep) {
    const auto out = graph_ops::perturb(graph, {a.trans, a.rot, a.seed});
    formats::write_sdg_file(out, a.out);
    return 0;
  }
  fs::create_directories(a.out);
  for (const double t : kSweepTranslations) {
    for (const double r : kSweepRotations) {
      const auto out = graph_ops::perturb(graph, {t, r, a.seed});
      const fs::path path =
          fs::path(a.out) / ("perturb_t" + format_number(t) + "m_r" + format_number(r) + "deg.sdg.json");
      formats::write_sdg_file(out, path);
      std::cerr << path.string() << '\n';
    }
  }
  return 0;
}

int run_evaluate(const EvaluateArgs& a) {
  evaluate::EvalOptions options;
  options.task = a.task == "perception" ? evaluate::Task::Perception : evaluate::Task::Reasoning;
  if (!a.thresholds.empty()) options.thresholds = a.thresholds;
  options.ols_variant = a.ols_variant == "mean" ? metrics::OlsVariant::Mean : metrics::OlsVariant::Sqrt;
  options.matcher = a.matcher == "hungarian" ? metrics::Matcher::Hungarian : metrics::Matcher::Greedy;
  options.threads = a.threads;
  const auto preds = formats::read_olann_file(a.pred);
  const auto gts = formats::read_olann_file(a.gt);
  const auto report = evaluate::evaluate(preds, gts, options);
  const std::string json = evaluate::report_json(report);
  if (a.out.empty()) {
    std::cout << json;
  } else {
    formats::write_file(a.out, json);
  }
  if (!a.csv.empty()) formats::write_file(a.csv, evaluate::report_csv(report));
  return 0;
}

int run_plot(const PlotArgs& a) {
  const std::string text = formats::read_text_file(a.input);
  const auto first = text.find_first_not_of(" \t\r\n");
  // A report is one pretty-printed JSON object; sdg-json starts with a header line.
  bool is_report = false;
  if (first != std::string::npos && text[first] == '{') {
    const auto line_end = text.find('\n', first);
    is_report = text.find("\"task\"") != std::string::npos &&
                text.find("\"version\"", first) > line_end;
  }
  if (is_report) {
    formats::write_file(a.out, plot::render_bars(plot::report_bars(text)));
  } else {
    formats::write_file(a.out, plot::render_graph(formats::read_sdg(text), palette_from(a.palette)));
  }
  return 0;
}

void add_spec_options(CLI::App* cmd, SpecArgs& s) {
  cmd->add_option("--x-min", s.spec.x_min, "Forward range start (m)")->capture_default_str();
  cmd->add_option("--x-max", s.spec.x_max, "Forward range end (m)")->capture_default_str();
  cmd->add_option("--y-min", s.spec.y_min, "Lateral range start (m)")->capture_default_str();
  cmd->add_option("--y-max", s.spec.y_max, "Lateral range end (m)")->capture_default_str();
  cmd->add_option("--resolution", s.spec.resolution, "Meters per cell")->capture_default_str();
  cmd->add_option("--palette", s.palette, "Class palette JSON")->check(CLI::ExistingFile);
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Io:
    case ErrorCode::SchemaError:
    case ErrorCode::MalformedXml:
    case ErrorCode::InvalidArgument:
      return kExitUsage;
    default:
      return kExitComputation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SD map toolkit: OSM ingest, BEV rasterization, graph alignment and lane-topology metrics"};
  app.set_config("--config", "", "Read options from a TOML/INI file (one [subcommand] section each)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Build an ego-centric graph from OSM XML");
  c_ingest->add_option("--osm", ingest.osm, "OSM XML file")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--poses", ingest.poses, "Poses JSON file")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--origin-lat", ingest.origin_lat, "Projection origin latitude")->required();
  c_ingest->add_option("--origin-lon", ingest.origin_lon, "Projection origin longitude")->required();
  c_ingest->add_option("--out", ingest.out, "Output sdg-json path")->required();
  c_ingest->add_option("--margin", ingest.margin, "Bounding margin around poses (m)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  c_ingest->add_option("--density", ingest.density, "Max meters between waypoints")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_ingest->add_option("--anchor", ingest.anchor, "Ego frame: first pose, or one graph per pose")
      ->capture_default_str()
      ->check(CLI::IsMember({"first", "each"}));
  c_ingest->add_flag("--no-clip", ingest.no_clip, "Keep geometry outside the bounding region");
  c_ingest->add_flag("--no-point-features", ingest.no_point_features,
                     "Skip crossing/stop/signal point nodes");

  RasterizeArgs rasterize;
  auto* c_raster = app.add_subcommand("rasterize", "Render a graph into a BEV grid");
  c_raster->add_option("--graph", rasterize.graph, "Input sdg-json")->required()->check(CLI::ExistingFile);
  c_raster->add_option("--out", rasterize.out, "Output bev-f32 path")->required();
  c_raster->add_option("--png", rasterize.png, "Optional PNG preview");
  add_spec_options(c_raster, rasterize.spec);

  AlignArgs align;
  auto* c_align = app.add_subcommand("align", "Attach BEV features to graph nodes");
  c_align->add_option("--graph", align.graph, "Input sdg-json")->required()->check(CLI::ExistingFile);
  c_align->add_option("--bev", align.bev, "Input bev-f32")->required()->check(CLI::ExistingFile);
  c_align->add_option("--out", align.out, "Output aug-f32 path")->required();

  PerturbArgs perturb;
  auto* c_perturb = app.add_subcommand("perturb", "Apply a rigid localization error to a graph");
  c_perturb->add_option("--graph", perturb.graph, "Input sdg-json")->required()->check(CLI::ExistingFile);
  c_perturb->add_option("--out", perturb.out, "Output sdg-json path (directory with --sweep)")->required();
  c_perturb->add_option("--trans-noise", perturb.trans, "Translation magnitude (m)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  c_perturb->add_option("--rot-noise", perturb.rot, "Rotation magnitude (degrees)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  c_perturb->add_option("--seed", perturb.seed, "PRNG seed")->capture_default_str();
  c_perturb->add_flag("--sweep", perturb.sweep, "Write the 4x3 translation x rotation grid");

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Score predictions against ground truth");
  c_eval->add_option("--pred", eval.pred, "Predictions olann-json")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--gt", eval.gt, "Ground truth olann-json")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--out", eval.out, "Report JSON path (stdout if omitted)");
  c_eval->add_option("--csv", eval.csv, "Per-scene CSV path");
  c_eval->add_option("--task", eval.task, "perception or reasoning")
      ->capture_default_str()
      ->check(CLI::IsMember({"perception", "reasoning"}));
  c_eval->add_option("--thresholds", eval.thresholds, "Lane thresholds (m), comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  c_eval->add_option("--ols-variant", eval.ols_variant, "sqrt or mean")
      ->capture_default_str()
      ->check(CLI::IsMember({"sqrt", "mean"}));
  c_eval->add_option("--matcher", eval.matcher, "greedy or hungarian")
      ->capture_default_str()
      ->check(CLI::IsMember({"greedy", "hungarian"}));
  c_eval->add_option("--threads", eval.threads, "Worker threads (default SDMAPKIT_THREADS or all cores)");

  PlotArgs plot_args;
  auto* c_plot = app.add_subcommand("plot", "Render a report bar chart or a graph overlay");
  c_plot->add_option("--in", plot_args.input, "Report JSON or sdg-json")->required()->check(CLI::ExistingFile);
  c_plot->add_option("--out", plot_args.out, "Output PNG")->required();
  c_plot->add_option("--palette", plot_args.palette, "Class palette JSON")->check(CLI::ExistingFile);

  for (auto* sub : {c_ingest, c_raster, c_align, c_perturb, c_eval, c_plot}) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (c_ingest->parsed()) return run_ingest(ingest);
    if (c_raster->parsed()) return run_rasterize(rasterize);
    if (c_align->parsed()) return run_align(align);
    if (c_perturb->parsed()) return run_perturb(perturb);
    if (c_eval->parsed()) return run_evaluate(eval);
    if (c_plot->parsed()) return run_plot(plot_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitUsage;
}
