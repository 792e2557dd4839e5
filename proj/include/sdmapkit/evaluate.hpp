#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdmapkit/metrics.hpp"

namespace sdmapkit::evaluate {

enum class Task { Perception, Reasoning };

struct EvalOptions {
  Task task = Task::Reasoning;
  /// Overrides the task's lane thresholds (Chamfer for perception, Fréchet otherwise).
  std::optional<std::vector<double>> thresholds;
  metrics::OlsVariant ols_variant = metrics::OlsVariant::Sqrt;
  metrics::Matcher matcher = metrics::Matcher::Greedy;
  metrics::Relaxation relaxation;
  double iou_threshold = 0.75;
  double edge_threshold = 0.5;
  /// 0 means "use the SDMAPKIT_THREADS cap or hardware concurrency".
  unsigned threads = 0;
};

struct SceneRow {
  std::string id;
  std::size_t pred_lanes = 0;
  std::size_t gt_lanes = 0;
  std::size_t pred_traffic = 0;
  std::size_t gt_traffic = 0;
  // Per-scene values; only the ones relevant to the task are filled.
  double lane_ap = 0.0;
  double det_t = 0.0;
  double top_ll = 0.0;
  double top_lt = 0.0;
};

struct Diagnostics {
  std::size_t scenes = 0;
  std::vector<std::string> missing_predictions;  // gt scenes with no pred record
  std::vector<std::string> unmatched_predictions;  // pred scenes with no gt record
  std::vector<std::size_t> lane_true_positives;    // per threshold, pooled
  std::size_t pred_lanes = 0;
  std::size_t gt_lanes = 0;
  std::size_t pred_traffic = 0;
  std::size_t gt_traffic = 0;
  std::size_t top_ll_vertices = 0;
  std::size_t top_lt_vertices = 0;
  std::vector<std::string> undefined;  // metrics reported as 1.0 because nothing was evaluable
};

struct MetricReport {
  Task task = Task::Reasoning;
  metrics::ApSummary lane_ap;  // Chamfer AP (perception) or DET_l (reasoning)
  metrics::DetTResult det_t;
  metrics::TopResult top_ll;
  metrics::TopResult top_lt;
  std::optional<double> ols;
  metrics::OlsVariant ols_variant = metrics::OlsVariant::Sqrt;
  Diagnostics diagnostics;
  std::vector<SceneRow> scenes;
};

/// Pairs scenes by id (gt order), evaluates them in parallel and pools the
/// per-scene results in gt order, so the output does not depend on threads.
MetricReport evaluate(const std::vector<metrics::SceneAnnotation>& preds,
                      const std::vector<metrics::SceneAnnotation>& gts, const EvalOptions& options);

/// Thread count from SDMAPKIT_THREADS when set to a positive integer, else
/// hardware concurrency (at least 1).
unsigned thread_cap();

std::string report_json(const MetricReport& report);
std::string report_csv(const MetricReport& report);

const char* to_string(Task task);

}  // namespace sdmapkit::evaluate
