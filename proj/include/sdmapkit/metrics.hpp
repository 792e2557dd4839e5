#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdmapkit/vec.hpp"

namespace sdmapkit::metrics {

using DenseMatrix = std::vector<std::vector<double>>;

/// Centerline or map polyline. 2D inputs carry z = 0.
struct Polyline {
  std::vector<Vec3> points;
  double score = 1.0;
};

/// Image-space box: top-left corner (x, y) plus width and height, pixels.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct TrafficElement {
  Box box;
  std::string cls;
  double score = 1.0;
};

struct SceneAnnotation {
  std::string id;
  std::vector<Polyline> centerlines;
  std::vector<TrafficElement> traffic_elements;
  DenseMatrix a_cc;  // centerlines x centerlines
  DenseMatrix a_ct;  // centerlines x traffic elements

  /// Throws SchemaError if matrix shapes disagree with the element lists.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Distances

/// 1/2 (CD_dir(a, b) + CD_dir(b, a)) with Euclidean point distance.
/// Throws EmptySet if either set is empty.
double chamfer(std::span<const Vec3> a, std::span<const Vec3> b);

/// Discrete Fréchet distance (dynamic program over monotone couplings).
double frechet(std::span<const Vec3> a, std::span<const Vec3> b);

/// min(frechet(a, b), frechet(a, reverse(b))).
double frechet_permuted(std::span<const Vec3> a, std::span<const Vec3> b);

double iou(const Box& a, const Box& b);

// ---------------------------------------------------------------------------
// Assignment and matching

struct Assignment {
  std::vector<int> row_to_col;  // -1 for rows left unassigned (rows > cols)
  double total_cost = 0.0;      // summed in row order
};

/// Minimum-cost one-to-one assignment (Kuhn-Munkres with potentials). Rectangular
/// inputs are handled by assigning min(rows, cols) pairs.
Assignment hungarian_match(const DenseMatrix& cost);

enum class Matcher { Greedy, Hungarian };

/// Match predictions to ground truth for one scene. `cost` is preds x gts
/// (lower is better); a pair is acceptable iff cost <= gt_limit[g].
///
/// Greedy: predictions in descending score order each take their lowest-cost
/// gt; the prediction is a TP iff that pair is acceptable and the gt is not yet
/// covered. Hungarian: optimal assignment over acceptable pairs.
/// Returns the matched gt index per prediction, or -1 for a false positive.
std::vector<int> match_predictions(const DenseMatrix& cost, std::span<const double> scores,
                                   std::span<const double> gt_limit, Matcher matcher);

// ---------------------------------------------------------------------------
// Average precision

struct ScoredHit {
  double score = 0.0;
  bool true_positive = false;
};

/// Pooled detections for one threshold (possibly across many scenes).
struct PrCurve {
  std::vector<ScoredHit> hits;
  std::size_t gt_count = 0;

  void add_scene(std::span<const double> scores, std::span<const int> matches,
                 std::size_t scene_gt_count);
};

struct ApValue {
  double value = 0.0;
  bool undefined = false;  // no predictions and no gt: reported as 1.0
};

/// Area under the all-point interpolated precision/recall staircase.
ApValue average_precision(const PrCurve& curve);

struct ApSummary {
  std::vector<double> thresholds;
  std::vector<ApValue> per_threshold;
  double mean = 0.0;
};

inline const std::vector<double> kChamferThresholds = {0.5, 1.0, 1.5};
inline const std::vector<double> kFrechetThresholds = {1.0, 2.0, 3.0};

/// Far-range threshold relaxation used by DET_l: gts whose nearest point is
/// farther than `range_cutoff` from the ego origin use threshold * factor.
struct Relaxation {
  double factor = 1.5;
  double range_cutoff = 35.0;
};

struct LaneMatchConfig {
  std::vector<double> thresholds = kFrechetThresholds;
  Relaxation relaxation;
  Matcher matcher = Matcher::Greedy;
};

struct TrafficMatchConfig {
  double iou_threshold = 0.75;
  Matcher matcher = Matcher::Greedy;
};

std::vector<double> relaxed_limits(std::span<const Polyline> gts, double threshold,
                                   const Relaxation& relaxation);

enum class LaneDistance { Chamfer, FrechetPermuted };

/// preds x gts distance matrix.
DenseMatrix lane_cost(std::span<const Polyline> preds, std::span<const Polyline> gts,
                      LaneDistance distance);

/// Adds one scene's matches to `curves` (one curve per threshold). Pass a
/// relaxation to widen the limit for far-range gts.
void accumulate_lane_curves(const DenseMatrix& cost, std::span<const Polyline> preds,
                            std::span<const Polyline> gts, std::span<const double> thresholds,
                            const std::optional<Relaxation>& relaxation, Matcher matcher,
                            std::vector<PrCurve>& curves);

ApSummary summarize(std::span<const double> thresholds, const std::vector<PrCurve>& curves);

/// Chamfer-distance AP for one scene at each threshold, plus their mean.
ApSummary chamfer_ap(std::span<const Polyline> preds, std::span<const Polyline> gts,
                     std::span<const double> thresholds = kChamferThresholds,
                     Matcher matcher = Matcher::Greedy);

/// Mean AP over the Fréchet (permuted) association thresholds.
ApSummary det_l(std::span<const Polyline> preds, std::span<const Polyline> gts,
                const LaneMatchConfig& config = {});

struct ClassAp {
  std::string cls;
  ApValue ap;
};

struct DetTResult {
  std::vector<ClassAp> per_class;  // classes present in gt, sorted by name
  double value = 0.0;
  bool undefined = false;
};

/// Adds one scene's traffic elements to per-class curves (keyed by class name).
void accumulate_traffic_curves(std::span<const TrafficElement> preds,
                               std::span<const TrafficElement> gts,
                               const TrafficMatchConfig& config,
                               std::map<std::string, PrCurve>& curves);

/// Averages the classes that have at least one gt.
DetTResult summarize_det_t(const std::map<std::string, PrCurve>& curves);

/// Per-class IoU-matched AP averaged over the classes present in gt.
DetTResult det_t(std::span<const TrafficElement> preds, std::span<const TrafficElement> gts,
                 const TrafficMatchConfig& config = {});

// ---------------------------------------------------------------------------
// Topology

enum class TopMode { LaneLane, LaneTraffic };

struct TopConfig {
  LaneMatchConfig lanes;
  TrafficMatchConfig traffic;
  double edge_threshold = 0.5;
};

/// Per-vertex topology precision entries for one scene and one lane threshold.
/// Each entry is sum_k P(n_k) 1(n_k in N(v)) / |N(v)| for one evaluable vertex.
std::vector<double> top_vertex_scores(const SceneAnnotation& pred, const SceneAnnotation& gt,
                                      TopMode mode, double lane_threshold,
                                      const TopConfig& config = {});

struct TopResult {
  std::vector<double> per_threshold;
  double value = 0.0;
  bool undefined = false;  // no gt vertex had neighbours
  std::size_t vertices = 0;
};

/// TOP_ll / TOP_lt for one scene, averaged over the lane thresholds.
TopResult top_score(const SceneAnnotation& pred, const SceneAnnotation& gt, TopMode mode,
                    const TopConfig& config = {});

// ---------------------------------------------------------------------------
// Aggregate

enum class OlsVariant { Sqrt, Mean };

/// Sqrt (default): (DET_l + DET_t + sqrt(TOP_ll) + sqrt(TOP_lt)) / 4.
/// Mean: plain average of the four. Throws OutOfRange outside [0, 1].
double ols(double det_l, double det_t, double top_ll, double top_lt,
           OlsVariant variant = OlsVariant::Sqrt);

}  // namespace sdmapkit::metrics
