#include "sdmapkit/formats.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sdmapkit/error.hpp"

namespace sdmapkit::formats {
namespace {

using nlohmann::json;

class ByteWriter {
 public:
  void raw(const char (&magic)[4]) { bytes_.insert(bytes_.end(), magic, magic + 4); }
  void u32(std::uint32_t v) { little_endian(v); }
  void i32(std::int32_t v) { little_endian(std::bit_cast<std::uint32_t>(v)); }
  void f32(float v) { little_endian(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { little_endian(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  template <typename T>
  void little_endian(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool magic(const char (&expected)[4]) {
    need(4);
    const bool ok = std::memcmp(bytes_.data() + at_, expected, 4) == 0;
    at_ += 4;
    return ok;
  }
  std::uint32_t u32() { return little_endian<std::uint32_t>(); }
  float f32() { return std::bit_cast<float>(little_endian<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(little_endian<std::uint64_t>()); }
  std::size_t remaining() const { return bytes_.size() - at_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - at_ < n) throw Error(ErrorCode::SchemaError, "bev-f32: truncated file");
  }
  template <typename T>
  T little_endian() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<T>(bytes_[at_ + i]) << (8 * i));
    }
    at_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t at_ = 0;
};

[[noreturn]] void schema_error(const std::string& format, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::SchemaError, format + " line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.size() - start
                                                                             : end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return lines;
}

std::set<std::string> keys_of(const json& j) {
  std::set<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.insert(k);
  return keys;
}

double finite_number(const json& j, const char* key, const std::string& format, std::size_t line) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    schema_error(format, line, std::string("missing numeric field \"") + key + "\"");
  }
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) schema_error(format, line, std::string("non-finite \"") + key + "\"");
  return v;
}

}  // namespace

std::string write_sdg(const SdMapGraph& graph) {
  std::string out;
  json header = {{"version", kSdgVersion},
                 {"origin_lat", graph.frame.origin.lat},
                 {"origin_lon", graph.frame.origin.lon},
                 {"ego_pose",
                  {{"x", graph.frame.ego.position.x},
                   {"y", graph.frame.ego.position.y},
                   {"heading", graph.frame.ego.heading}}}};
  out += header.dump() + "\n";
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& n = graph.nodes[i];
    json rec = {{"idx", i},
                {"x", n.position.x},
                {"y", n.position.y},
                {"class", std::string(osm::to_string(n.cls))}};
    out += rec.dump() + "\n";
  }
  for (const auto& e : graph.edges) {
    out += json{{"a", e.a}, {"b", e.b}}.dump() + "\n";
  }
  return out;
}

void write_sdg_file(const SdMapGraph& graph, const std::filesystem::path& path) {
  write_file(path, write_sdg(graph));
}

SdMapGraph read_sdg(std::string_view text) {
  const std::string fmt = "sdg-json";
  SdMapGraph graph;
  bool have_header = false;
  bool in_edges = false;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(lines[i]);
    } catch (const json::exception& e) {
      schema_error(fmt, line_no, e.what());
    }
    if (!rec.is_object()) schema_error(fmt, line_no, "record must be an object");
    const auto keys = keys_of(rec);
    if (!have_header) {
      if (keys != std::set<std::string>{"version", "origin_lat", "origin_lon", "ego_pose"}) {
        schema_error(fmt, line_no, "first record must be the header");
      }
      if (!rec.at("version").is_number_integer() || rec.at("version").get<int>() != kSdgVersion) {
        schema_error(fmt, line_no, "unsupported version");
      }
      graph.frame.origin = {finite_number(rec, "origin_lat", fmt, line_no),
                            finite_number(rec, "origin_lon", fmt, line_no)};
      if (!geo::is_valid(graph.frame.origin)) schema_error(fmt, line_no, "origin out of range");
      const json& pose = rec.at("ego_pose");
      if (!pose.is_object() || keys_of(pose) != std::set<std::string>{"x", "y", "heading"}) {
        schema_error(fmt, line_no, "ego_pose needs exactly x, y, heading");
      }
      graph.frame.ego = geo::make_pose({finite_number(pose, "x", fmt, line_no),
                                        finite_number(pose, "y", fmt, line_no)},
                                       finite_number(pose, "heading", fmt, line_no));
      have_header = true;
    } else if (keys == std::set<std::string>{"idx", "x", "y", "class"}) {
      if (in_edges) schema_error(fmt, line_no, "node record after edge records");
      if (!rec.at("idx").is_number_unsigned() ||
          rec.at("idx").get<std::size_t>() != graph.nodes.size()) {
        schema_error(fmt, line_no, "node idx must count up from 0");
      }
      if (!rec.at("class").is_string()) schema_error(fmt, line_no, "class must be a string");
      const auto cls = osm::parse_highway_class(rec.at("class").get<std::string>());
      if (!cls) schema_error(fmt, line_no, "unknown class " + rec.at("class").get<std::string>());
      GraphNode node;
      node.position = {finite_number(rec, "x", fmt, line_no), finite_number(rec, "y", fmt, line_no)};
      node.cls = *cls;
      graph.nodes.push_back(node);
    } else if (keys == std::set<std::string>{"a", "b"}) {
      in_edges = true;
      if (!rec.at("a").is_number_unsigned() || !rec.at("b").is_number_unsigned()) {
        schema_error(fmt, line_no, "edge endpoints must be non-negative integers");
      }
      const auto a = rec.at("a").get<std::size_t>();
      const auto b = rec.at("b").get<std::size_t>();
      if (a >= graph.nodes.size() || b >= graph.nodes.size()) {
        schema_error(fmt, line_no, "edge endpoint out of range");
      }
      if (a == b) schema_error(fmt, line_no, "self-loop edge");
      graph.edges.push_back({a, b, graph.nodes[a].cls, 0});
    } else {
      schema_error(fmt, line_no, "unrecognised record");
    }
  }
  if (!have_header) schema_error(fmt, 1, "missing header record");
  return graph;
}

SdMapGraph read_sdg_file(const std::filesystem::path& path) {
  return read_sdg(read_text_file(path));
}

std::vector<std::uint8_t> write_bev(const raster::BevCanvas& canvas) {
  ByteWriter w;
  w.raw(kBevMagic);
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(canvas.rows()));
  w.u32(static_cast<std::uint32_t>(canvas.cols()));
  w.u32(static_cast<std::uint32_t>(canvas.channels()));
  const auto& s = canvas.spec();
  for (const double v : {s.x_min, s.x_max, s.y_min, s.y_max, s.resolution}) w.f64(v);
  for (const float v : canvas.data()) w.f32(v);
  return w.take();
}

raster::BevCanvas read_bev(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (!r.magic(kBevMagic)) throw Error(ErrorCode::SchemaError, "bev-f32: bad magic");
  if (r.u32() != 1) throw Error(ErrorCode::SchemaError, "bev-f32: unsupported version");
  const std::uint32_t h = r.u32();
  const std::uint32_t w = r.u32();
  const std::uint32_t c = r.u32();
  raster::BevSpec spec;
  spec.x_min = r.f64();
  spec.x_max = r.f64();
  spec.y_min = r.f64();
  spec.y_max = r.f64();
  spec.resolution = r.f64();
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaError, std::string("bev-f32: ") + e.what());
  }
  if (spec.rows() != h || spec.cols() != w) {
    throw Error(ErrorCode::SchemaError, "bev-f32: H/W disagree with ranges and resolution");
  }
  const std::size_t count = static_cast<std::size_t>(h) * w * c;
  if (r.remaining() != count * 4) {
    throw Error(ErrorCode::SchemaError, "bev-f32: payload size does not match header");
  }
  raster::BevCanvas canvas(spec, c);
  for (auto& v : canvas.data()) {
    v = r.f32();
    if (!(v >= 0.0f && v <= 1.0f)) throw Error(ErrorCode::SchemaError, "bev-f32: value outside [0, 1]");
  }
  return canvas;
}

raster::BevCanvas read_bev_file(const std::filesystem::path& path) {
  const auto bytes = read_binary_file(path);
  return read_bev(bytes);
}

std::vector<std::uint8_t> write_augmented(const std::vector<graph_ops::AugmentedNodeFeature>& rows) {
  ByteWriter w;
  w.raw(kAugMagic);
  w.u32(1);
  const std::size_t dim = rows.empty() ? graph_ops::kBaseFeatureSize : rows.front().combined.size();
  const std::size_t base = rows.empty() ? graph_ops::kBaseFeatureSize : rows.front().base.size();
  w.u32(static_cast<std::uint32_t>(rows.size()));
  w.u32(static_cast<std::uint32_t>(dim));
  w.u32(static_cast<std::uint32_t>(base));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    w.u32(static_cast<std::uint32_t>(i));
    w.i32(static_cast<std::int32_t>(std::clamp<std::int64_t>(rows[i].cell.x_b, INT32_MIN, INT32_MAX)));
    w.i32(static_cast<std::int32_t>(std::clamp<std::int64_t>(rows[i].cell.y_b, INT32_MIN, INT32_MAX)));
    w.u32(rows[i].cell.in_range ? 1 : 0);
  }
  for (const auto& row : rows) {
    if (row.combined.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged features");
    for (const double v : row.combined) w.f32(static_cast<float>(v));
  }
  return w.take();
}

namespace {

metrics::DenseMatrix read_matrix(const json& scene, const char* key, std::size_t rows,
                                 std::size_t cols, std::size_t line) {
  if (!scene.contains(key)) {
    return metrics::DenseMatrix(rows, std::vector<double>(cols, 0.0));
  }
  const json& m = scene.at(key);
  if (!m.is_array()) schema_error("olann-json", line, std::string(key) + " must be an array");
  metrics::DenseMatrix out;
  for (const auto& row : m) {
    if (!row.is_array()) schema_error("olann-json", line, std::string(key) + " rows must be arrays");
    std::vector<double> values;
    for (const auto& v : row) {
      if (!v.is_number()) schema_error("olann-json", line, std::string(key) + " entries must be numbers");
      values.push_back(v.get<double>());
    }
    out.push_back(std::move(values));
  }
  if (rows > 0 && cols == 0 && out.empty()) out.assign(rows, {});
  return out;
}

double read_score(const json& j, std::size_t line) {
  if (!j.contains("score")) return 1.0;
  if (!j.at("score").is_number()) schema_error("olann-json", line, "score must be a number");
  return j.at("score").get<double>();
}

}  // namespace

std::vector<metrics::SceneAnnotation> read_olann(std::string_view text) {
  std::vector<metrics::SceneAnnotation> scenes;
  std::set<std::string> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(lines[i]);
    } catch (const json::exception& e) {
      schema_error("olann-json", line_no, e.what());
    }
    if (!rec.is_object()) schema_error("olann-json", line_no, "scene record must be an object");
    for (const auto& key : keys_of(rec)) {
      static const std::set<std::string> allowed = {"scene_id", "centerlines", "traffic_elements",
                                                    "A_CC", "A_CT"};
      if (!allowed.contains(key)) schema_error("olann-json", line_no, "unknown key " + key);
    }
    metrics::SceneAnnotation scene;
    try {
      scene.id = rec.at("scene_id").get<std::string>();
      if (!seen.insert(scene.id).second) schema_error("olann-json", line_no, "duplicate scene_id");
      if (rec.contains("centerlines")) {
        for (const auto& cl : rec.at("centerlines")) {
          metrics::Polyline line;
          for (const auto& p : cl.at("points")) {
            if (!p.is_array() || (p.size() != 2 && p.size() != 3)) {
              schema_error("olann-json", line_no, "waypoints must be [x, y] or [x, y, z]");
            }
            Vec3 v{p[0].get<double>(), p[1].get<double>(), p.size() == 3 ? p[2].get<double>() : 0.0};
            if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
              schema_error("olann-json", line_no, "non-finite waypoint");
            }
            line.points.push_back(v);
          }
          line.score = read_score(cl, line_no);
          scene.centerlines.push_back(std::move(line));
        }
      }
      if (rec.contains("traffic_elements")) {
        for (const auto& te : rec.at("traffic_elements")) {
          metrics::TrafficElement t;
          const auto box = te.at("box").get<std::vector<double>>();
          if (box.size() != 4) schema_error("olann-json", line_no, "box must be [x, y, w, h]");
          t.box = {box[0], box[1], box[2], box[3]};
          const json& cls = te.at("class");
          t.cls = cls.is_string() ? cls.get<std::string>() : cls.dump();
          t.score = read_score(te, line_no);
          scene.traffic_elements.push_back(std::move(t));
        }
      }
    } catch (const json::exception& e) {
      schema_error("olann-json", line_no, e.what());
    }
    scene.a_cc = read_matrix(rec, "A_CC", scene.centerlines.size(), scene.centerlines.size(), line_no);
    scene.a_ct =
        read_matrix(rec, "A_CT", scene.centerlines.size(), scene.traffic_elements.size(), line_no);
    try {
      scene.validate();
    } catch (const Error& e) {
      schema_error("olann-json", line_no, e.what());
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

std::vector<metrics::SceneAnnotation> read_olann_file(const std::filesystem::path& path) {
  return read_olann(read_text_file(path));
}

std::string write_olann(const std::vector<metrics::SceneAnnotation>& scenes) {
  std::string out;
  for (const auto& s : scenes) {
    json rec;
    rec["scene_id"] = s.id;
    rec["centerlines"] = json::array();
    for (const auto& cl : s.centerlines) {
      json pts = json::array();
      for (const auto& p : cl.points) pts.push_back({p.x, p.y, p.z});
      rec["centerlines"].push_back({{"points", pts}, {"score", cl.score}});
    }
    rec["traffic_elements"] = json::array();
    for (const auto& te : s.traffic_elements) {
      rec["traffic_elements"].push_back({{"box", {te.box.x, te.box.y, te.box.w, te.box.h}},
                                         {"class", te.cls},
                                         {"score", te.score}});
    }
    rec["A_CC"] = s.a_cc;
    rec["A_CT"] = s.a_ct;
    out += rec.dump() + "\n";
  }
  return out;
}

std::vector<geo::EgoPose> read_poses(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("poses: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::SchemaError, "poses: expected a JSON array");
  std::vector<geo::EgoPose> poses;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    if (!rec.is_object() || keys_of(rec) != std::set<std::string>{"x", "y", "heading"}) {
      throw Error(ErrorCode::SchemaError,
                  "poses: record " + std::to_string(i) + " needs exactly x, y, heading");
    }
    poses.push_back(geo::make_pose({finite_number(rec, "x", "poses", i + 1),
                                    finite_number(rec, "y", "poses", i + 1)},
                                   finite_number(rec, "heading", "poses", i + 1)));
  }
  return poses;
}

std::vector<geo::EgoPose> read_poses_file(const std::filesystem::path& path) {
  return read_poses(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return {text.begin(), text.end()};
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> contents) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(contents.data()), contents.size()));
}

}  // namespace sdmapkit::formats
