#include "sdmapkit/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "sdmapkit/error.hpp"

namespace sdmapkit::evaluate {
namespace {

using metrics::PrCurve;
using metrics::SceneAnnotation;

struct SceneWork {
  SceneRow row;
  std::vector<PrCurve> lane_curves;
  std::map<std::string, PrCurve> traffic_curves;
  std::vector<std::vector<double>> top_ll;  // per threshold
  std::vector<std::vector<double>> top_lt;
  std::exception_ptr error;
};

double mean_or(const std::vector<double>& values, double fallback) {
  if (values.empty()) return fallback;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

metrics::TopResult pool_top(const std::vector<std::vector<double>>& entries) {
  metrics::TopResult out;
  for (const auto& per_threshold : entries) {
    out.vertices = std::max(out.vertices, per_threshold.size());
    out.per_threshold.push_back(mean_or(per_threshold, 1.0));
  }
  out.undefined = out.vertices == 0;
  out.value = mean_or(out.per_threshold, 1.0);
  return out;
}

SceneWork evaluate_scene(const SceneAnnotation& pred, const SceneAnnotation& gt,
                         const EvalOptions& options, const std::vector<double>& thresholds) {
  SceneWork work;
  work.row.id = gt.id;
  work.row.pred_lanes = pred.centerlines.size();
  work.row.gt_lanes = gt.centerlines.size();
  work.row.pred_traffic = pred.traffic_elements.size();
  work.row.gt_traffic = gt.traffic_elements.size();

  if (options.task == Task::Perception) {
    const auto cost = metrics::lane_cost(pred.centerlines, gt.centerlines, metrics::LaneDistance::Chamfer);
    metrics::accumulate_lane_curves(cost, pred.centerlines, gt.centerlines, thresholds, std::nullopt,
                                    options.matcher, work.lane_curves);
    work.row.lane_ap = metrics::summarize(thresholds, work.lane_curves).mean;
    return work;
  }

  const auto cost =
      metrics::lane_cost(pred.centerlines, gt.centerlines, metrics::LaneDistance::FrechetPermuted);
  metrics::accumulate_lane_curves(cost, pred.centerlines, gt.centerlines, thresholds,
                                  options.relaxation, options.matcher, work.lane_curves);
  work.row.lane_ap = metrics::summarize(thresholds, work.lane_curves).mean;

  const metrics::TrafficMatchConfig traffic{options.iou_threshold, options.matcher};
  metrics::accumulate_traffic_curves(pred.traffic_elements, gt.traffic_elements, traffic,
                                     work.traffic_curves);
  work.row.det_t = metrics::summarize_det_t(work.traffic_curves).value;

  metrics::TopConfig top;
  top.lanes = {thresholds, options.relaxation, options.matcher};
  top.traffic = traffic;
  top.edge_threshold = options.edge_threshold;
  for (const double t : thresholds) {
    work.top_ll.push_back(metrics::top_vertex_scores(pred, gt, metrics::TopMode::LaneLane, t, top));
    work.top_lt.push_back(metrics::top_vertex_scores(pred, gt, metrics::TopMode::LaneTraffic, t, top));
  }
  work.row.top_ll = pool_top(work.top_ll).value;
  work.row.top_lt = pool_top(work.top_lt).value;
  return work;
}

}  // namespace

const char* to_string(Task task) { return task == Task::Perception ? "perception" : "reasoning"; }

unsigned thread_cap() {
  if (const char* env = std::getenv("SDMAPKIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MetricReport evaluate(const std::vector<SceneAnnotation>& preds,
                      const std::vector<SceneAnnotation>& gts, const EvalOptions& options) {
  std::vector<double> thresholds = options.thresholds.value_or(
      options.task == Task::Perception ? metrics::kChamferThresholds : metrics::kFrechetThresholds);
  if (thresholds.empty()) throw Error(ErrorCode::InvalidArgument, "no thresholds given");
  for (const double t : thresholds) {
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "thresholds must be positive");
  }

  MetricReport report;
  report.task = options.task;
  report.ols_variant = options.ols_variant;
  auto& diag = report.diagnostics;

  std::unordered_map<std::string, std::size_t> pred_index;
  for (std::size_t i = 0; i < preds.size(); ++i) pred_index.emplace(preds[i].id, i);
  std::unordered_map<std::string, std::size_t> gt_ids;
  for (std::size_t i = 0; i < gts.size(); ++i) gt_ids.emplace(gts[i].id, i);
  for (const auto& p : preds) {
    if (!gt_ids.contains(p.id)) diag.unmatched_predictions.push_back(p.id);
  }

  std::vector<SceneAnnotation> empty_preds(gts.size());
  std::vector<const SceneAnnotation*> paired(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const auto it = pred_index.find(gts[i].id);
    if (it != pred_index.end()) {
      paired[i] = &preds[it->second];
    } else {
      diag.missing_predictions.push_back(gts[i].id);
      empty_preds[i].id = gts[i].id;
      paired[i] = &empty_preds[i];
    }
  }

  std::vector<SceneWork> work(gts.size());
  const unsigned cap = options.threads > 0 ? options.threads : thread_cap();
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cap, gts.size()));
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < gts.size(); i = next++) {
      try {
        work[i] = evaluate_scene(*paired[i], gts[i], options, thresholds);
      } catch (...) {
        work[i].error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  }

  // Ordered reduction in gt order.
  std::vector<PrCurve> lane_curves(thresholds.size());
  std::map<std::string, PrCurve> traffic_curves;
  std::vector<std::vector<double>> top_ll(thresholds.size());
  std::vector<std::vector<double>> top_lt(thresholds.size());
  for (auto& w : work) {
    if (w.error) std::rethrow_exception(w.error);
    for (std::size_t t = 0; t < w.lane_curves.size(); ++t) {
      auto& dst = lane_curves[t];
      dst.hits.insert(dst.hits.end(), w.lane_curves[t].hits.begin(), w.lane_curves[t].hits.end());
      dst.gt_count += w.lane_curves[t].gt_count;
    }
    for (const auto& [cls, curve] : w.traffic_curves) {
      auto& dst = traffic_curves[cls];
      dst.hits.insert(dst.hits.end(), curve.hits.begin(), curve.hits.end());
      dst.gt_count += curve.gt_count;
    }
    for (std::size_t t = 0; t < w.top_ll.size(); ++t) {
      top_ll[t].insert(top_ll[t].end(), w.top_ll[t].begin(), w.top_ll[t].end());
      top_lt[t].insert(top_lt[t].end(), w.top_lt[t].begin(), w.top_lt[t].end());
    }
    diag.pred_lanes += w.row.pred_lanes;
    diag.gt_lanes += w.row.gt_lanes;
    diag.pred_traffic += w.row.pred_traffic;
    diag.gt_traffic += w.row.gt_traffic;
    report.scenes.push_back(std::move(w.row));
  }
  diag.scenes = gts.size();

  report.lane_ap = metrics::summarize(thresholds, lane_curves);
  for (const auto& curve : lane_curves) {
    diag.lane_true_positives.push_back(static_cast<std::size_t>(std::count_if(
        curve.hits.begin(), curve.hits.end(), [](const metrics::ScoredHit& h) { return h.true_positive; })));
  }
  const char* lane_name = options.task == Task::Perception ? "lane_ap" : "DET_l";
  if (std::any_of(report.lane_ap.per_threshold.begin(), report.lane_ap.per_threshold.end(),
                  [](const metrics::ApValue& v) { return v.undefined; })) {
    diag.undefined.emplace_back(lane_name);
  }
  if (options.task == Task::Reasoning) {
    report.det_t = metrics::summarize_det_t(traffic_curves);
    report.top_ll = pool_top(top_ll);
    report.top_lt = pool_top(top_lt);
    diag.top_ll_vertices = report.top_ll.vertices;
    diag.top_lt_vertices = report.top_lt.vertices;
    if (report.det_t.undefined) diag.undefined.emplace_back("DET_t");
    if (report.top_ll.undefined) diag.undefined.emplace_back("TOP_ll");
    if (report.top_lt.undefined) diag.undefined.emplace_back("TOP_lt");
    report.ols = metrics::ols(report.lane_ap.mean, report.det_t.value, report.top_ll.value,
                              report.top_lt.value, options.ols_variant);
  }
  return report;
}

std::string report_json(const MetricReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["task"] = to_string(report.task);
  ordered_json lane;
  lane["thresholds"] = report.lane_ap.thresholds;
  ordered_json per = ordered_json::array();
  for (const auto& v : report.lane_ap.per_threshold) per.push_back(v.value);
  lane["ap"] = per;
  lane["mean"] = report.lane_ap.mean;
  const auto& d = report.diagnostics;
  if (report.task == Task::Perception) {
    j["lane_ap"] = lane;
  } else {
    j["DET_l"] = report.lane_ap.mean;
    j["DET_t"] = report.det_t.value;
    j["TOP_ll"] = report.top_ll.value;
    j["TOP_lt"] = report.top_lt.value;
    j["OLS"] = *report.ols;
    j["ols_variant"] = report.ols_variant == metrics::OlsVariant::Sqrt ? "sqrt" : "mean";
    j["DET_l_per_threshold"] = lane;
    ordered_json classes = ordered_json::object();
    for (const auto& c : report.det_t.per_class) classes[c.cls] = c.ap.value;
    j["DET_t_per_class"] = classes;
    j["TOP_ll_per_threshold"] = report.top_ll.per_threshold;
    j["TOP_lt_per_threshold"] = report.top_lt.per_threshold;
  }
  ordered_json diag;
  diag["scenes"] = d.scenes;
  diag["missing_predictions"] = d.missing_predictions;
  diag["unmatched_predictions"] = d.unmatched_predictions;
  diag["pred_lanes"] = d.pred_lanes;
  diag["gt_lanes"] = d.gt_lanes;
  diag["lane_true_positives"] = d.lane_true_positives;
  if (report.task == Task::Reasoning) {
    diag["pred_traffic"] = d.pred_traffic;
    diag["gt_traffic"] = d.gt_traffic;
    diag["top_ll_vertices"] = d.top_ll_vertices;
    diag["top_lt_vertices"] = d.top_lt_vertices;
  }
  diag["undefined"] = d.undefined;
  j["diagnostics"] = diag;
  return j.dump(2) + "\n";
}

std::string report_csv(const MetricReport& report) {
  std::ostringstream out;
  out.precision(17);
  const bool reasoning = report.task == Task::Reasoning;
  out << "scene_id,pred_lanes,gt_lanes,pred_traffic,gt_traffic,"
      << (reasoning ? "DET_l,DET_t,TOP_ll,TOP_lt" : "lane_ap") << "\n";
  for (const auto& r : report.scenes) {
    out << r.id << ',' << r.pred_lanes << ',' << r.gt_lanes << ',' << r.pred_traffic << ','
        << r.gt_traffic << ',' << r.lane_ap;
    if (reasoning) out << ',' << r.det_t << ',' << r.top_ll << ',' << r.top_lt;
    out << "\n";
  }
  return out.str();
}

}  // namespace sdmapkit::evaluate
