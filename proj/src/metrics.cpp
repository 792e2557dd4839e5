#include "sdmapkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sdmapkit/error.hpp"

namespace sdmapkit::metrics {
namespace {

double directed_chamfer(std::span<const Vec3> from, std::span<const Vec3> to) {
  double total = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, distance(p, q));
    total += best;
  }
  return total / static_cast<double>(from.size());
}

std::vector<std::size_t> score_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<double> scores_of(std::span<const Polyline> lines) {
  std::vector<double> s;
  s.reserve(lines.size());
  for (const auto& l : lines) s.push_back(l.score);
  return s;
}

double mean_or(const std::vector<double>& values, double fallback) {
  if (values.empty()) return fallback;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

/// gt index -> matched prediction index (or -1).
std::vector<int> invert_matches(const std::vector<int>& pred_to_gt, std::size_t gt_count) {
  std::vector<int> gt_to_pred(gt_count, -1);
  for (std::size_t p = 0; p < pred_to_gt.size(); ++p) {
    if (pred_to_gt[p] >= 0) gt_to_pred[static_cast<std::size_t>(pred_to_gt[p])] = static_cast<int>(p);
  }
  return gt_to_pred;
}

DenseMatrix traffic_cost(std::span<const TrafficElement> preds,
                         std::span<const TrafficElement> gts) {
  DenseMatrix cost(preds.size(), std::vector<double>(gts.size(), 1.0));
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (preds[p].cls == gts[g].cls) cost[p][g] = -iou(preds[p].box, gts[g].box);
    }
  }
  return cost;
}

std::vector<int> match_traffic(std::span<const TrafficElement> preds,
                               std::span<const TrafficElement> gts,
                               const TrafficMatchConfig& config) {
  std::vector<double> scores;
  for (const auto& t : preds) scores.push_back(t.score);
  const std::vector<double> limits(gts.size(), -config.iou_threshold);
  return match_predictions(traffic_cost(preds, gts), scores, limits, config.matcher);
}

std::vector<int> match_lanes(std::span<const Polyline> preds, std::span<const Polyline> gts,
                             double threshold, const LaneMatchConfig& config) {
  const auto cost = lane_cost(preds, gts, LaneDistance::FrechetPermuted);
  const auto limits = relaxed_limits(gts, threshold, config.relaxation);
  const auto scores = scores_of(preds);
  return match_predictions(cost, scores, limits, config.matcher);
}

/// One vertex's entry: ranked inferred neighbours, precision at each true hit.
std::optional<double> vertex_entry(const std::vector<double>& predicted,
                                   const std::vector<std::uint8_t>& truth,
                                   std::optional<std::size_t> skip, double edge_threshold) {
  std::size_t true_count = 0;
  for (std::size_t u = 0; u < truth.size(); ++u) {
    if (u != skip && truth[u]) ++true_count;
  }
  if (true_count == 0) return std::nullopt;
  std::vector<std::size_t> inferred;
  for (std::size_t u = 0; u < predicted.size(); ++u) {
    if (u != skip && predicted[u] > edge_threshold) inferred.push_back(u);
  }
  std::stable_sort(inferred.begin(), inferred.end(),
                   [&](std::size_t a, std::size_t b) { return predicted[a] > predicted[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < inferred.size(); ++k) {
    if (!truth[inferred[k]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return sum / static_cast<double>(true_count);
}

}  // namespace

void SceneAnnotation::validate() const {
  const std::size_t m = centerlines.size();
  const std::size_t k = traffic_elements.size();
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::SchemaError, "scene " + id + ": " + what);
  };
  if (a_cc.size() != m) fail("A_CC must have one row per centerline");
  for (const auto& row : a_cc) {
    if (row.size() != m) fail("A_CC must be square");
  }
  if (a_ct.size() != m && !(k == 0 && a_ct.empty())) fail("A_CT must have one row per centerline");
  for (const auto& row : a_ct) {
    if (row.size() != k) fail("A_CT must have one column per traffic element");
  }
  for (const auto& line : centerlines) {
    if (line.points.size() < 2) fail("centerlines need at least 2 waypoints");
    if (!(line.score >= 0.0 && line.score <= 1.0)) fail("centerline score outside [0, 1]");
  }
  for (const auto& te : traffic_elements) {
    if (!(te.box.w > 0.0 && te.box.h > 0.0)) fail("traffic element box needs w, h > 0");
    if (!(te.score >= 0.0 && te.score <= 1.0)) fail("traffic element score outside [0, 1]");
  }
  for (const auto* matrix : {&a_cc, &a_ct}) {
    for (const auto& row : *matrix) {
      for (const double v : row) {
        if (!(v >= 0.0 && v <= 1.0)) fail("adjacency entries must be in [0, 1]");
      }
    }
  }
}

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySet, "chamfer of an empty point set");
  return 0.5 * (directed_chamfer(a, b) + directed_chamfer(b, a));
}

double frechet(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySet, "frechet of an empty curve");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = distance(a[i], b[j]);
      double reach;
      if (i == 0 && j == 0) {
        reach = d;
      } else if (i == 0) {
        reach = std::max(cur[j - 1], d);
      } else if (j == 0) {
        reach = std::max(prev[j], d);
      } else {
        reach = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
      }
      cur[j] = reach;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

double frechet_permuted(std::span<const Vec3> a, std::span<const Vec3> b) {
  std::vector<Vec3> reversed(b.rbegin(), b.rend());
  return std::min(frechet(a, b), frechet(a, reversed));
}

double iou(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Assignment hungarian_match(const DenseMatrix& cost) {
  Assignment result;
  const std::size_t rows = cost.size();
  if (rows == 0) return result;
  const std::size_t cols = cost.front().size();
  for (const auto& row : cost) {
    if (row.size() != cols) throw Error(ErrorCode::DimensionMismatch, "cost matrix is ragged");
    for (const double c : row) {
      if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "cost must be finite");
    }
  }
  result.row_to_col.assign(rows, -1);
  if (cols == 0) return result;

  const bool transposed = rows > cols;
  const std::size_t n = transposed ? cols : rows;  // n <= m
  const std::size_t m = transposed ? rows : cols;
  auto at = [&](std::size_t i, std::size_t j) { return transposed ? cost[j][i] : cost[i][j]; };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] == 0) continue;
    const std::size_t i = owner[j] - 1;
    if (transposed) {
      result.row_to_col[j - 1] = static_cast<int>(i);
    } else {
      result.row_to_col[i] = static_cast<int>(j - 1);
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (result.row_to_col[r] >= 0) {
      result.total_cost += cost[r][static_cast<std::size_t>(result.row_to_col[r])];
    }
  }
  return result;
}

std::vector<int> match_predictions(const DenseMatrix& cost, std::span<const double> scores,
                                   std::span<const double> gt_limit, Matcher matcher) {
  const std::size_t preds = cost.size();
  const std::size_t gts = gt_limit.size();
  if (scores.size() != preds) {
    throw Error(ErrorCode::DimensionMismatch, "one score per prediction required");
  }
  for (const auto& row : cost) {
    if (row.size() != gts) throw Error(ErrorCode::DimensionMismatch, "cost matrix is ragged");
  }
  std::vector<int> matched(preds, -1);
  if (preds == 0 || gts == 0) return matched;

  if (matcher == Matcher::Greedy) {
    std::vector<bool> covered(gts, false);
    for (const std::size_t p : score_order(scores)) {
      std::size_t best = 0;
      for (std::size_t g = 1; g < gts; ++g) {
        if (cost[p][g] < cost[p][best]) best = g;
      }
      if (cost[p][best] <= gt_limit[best] && !covered[best]) {
        covered[best] = true;
        matched[p] = static_cast<int>(best);
      }
    }
    return matched;
  }

  double spread = 1.0;
  for (std::size_t p = 0; p < preds; ++p) {
    for (std::size_t g = 0; g < gts; ++g) {
      if (cost[p][g] <= gt_limit[g]) spread += std::abs(cost[p][g]);
    }
  }
  const double penalty = 10.0 * spread;
  DenseMatrix padded(preds, std::vector<double>(gts, penalty));
  for (std::size_t p = 0; p < preds; ++p) {
    for (std::size_t g = 0; g < gts; ++g) {
      if (cost[p][g] <= gt_limit[g]) padded[p][g] = cost[p][g];
    }
  }
  const Assignment a = hungarian_match(padded);
  for (std::size_t p = 0; p < preds; ++p) {
    const int g = a.row_to_col[p];
    if (g >= 0 && cost[p][static_cast<std::size_t>(g)] <= gt_limit[static_cast<std::size_t>(g)]) {
      matched[p] = g;
    }
  }
  return matched;
}

void PrCurve::add_scene(std::span<const double> scores, std::span<const int> matches,
                        std::size_t scene_gt_count) {
  if (scores.size() != matches.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one match per scored prediction required");
  }
  for (const std::size_t p : score_order(scores)) hits.push_back({scores[p], matches[p] >= 0});
  gt_count += scene_gt_count;
}

ApValue average_precision(const PrCurve& curve) {
  if (curve.gt_count == 0) {
    return curve.hits.empty() ? ApValue{1.0, true} : ApValue{0.0, false};
  }
  if (curve.hits.empty()) return {0.0, false};

  std::vector<ScoredHit> hits = curve.hits;
  std::stable_sort(hits.begin(), hits.end(),
                   [](const ScoredHit& a, const ScoredHit& b) { return a.score > b.score; });
  std::vector<double> precision(hits.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    tp += hits[k].true_positive ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  // Precision envelope: best precision at any equal-or-higher recall.
  for (std::size_t k = hits.size() - 1; k > 0; --k) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    if (hits[k].true_positive) ap += precision[k];
  }
  return {ap / static_cast<double>(curve.gt_count), false};
}

std::vector<double> relaxed_limits(std::span<const Polyline> gts, double threshold,
                                   const Relaxation& relaxation) {
  std::vector<double> limits;
  limits.reserve(gts.size());
  for (const auto& gt : gts) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& p : gt.points) nearest = std::min(nearest, std::hypot(p.x, p.y));
    limits.push_back(nearest > relaxation.range_cutoff ? threshold * relaxation.factor : threshold);
  }
  return limits;
}

DenseMatrix lane_cost(std::span<const Polyline> preds, std::span<const Polyline> gts,
                      LaneDistance distance) {
  DenseMatrix cost(preds.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      cost[p][g] = distance == LaneDistance::Chamfer
                       ? chamfer(preds[p].points, gts[g].points)
                       : frechet_permuted(preds[p].points, gts[g].points);
    }
  }
  return cost;
}

void accumulate_lane_curves(const DenseMatrix& cost, std::span<const Polyline> preds,
                            std::span<const Polyline> gts, std::span<const double> thresholds,
                            const std::optional<Relaxation>& relaxation, Matcher matcher,
                            std::vector<PrCurve>& curves) {
  curves.resize(thresholds.size());
  const auto scores = scores_of(preds);
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    const auto limits = relaxation ? relaxed_limits(gts, thresholds[t], *relaxation)
                                   : std::vector<double>(gts.size(), thresholds[t]);
    const auto matches = match_predictions(cost, scores, limits, matcher);
    curves[t].add_scene(scores, matches, gts.size());
  }
}

ApSummary summarize(std::span<const double> thresholds, const std::vector<PrCurve>& curves) {
  ApSummary out;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  std::vector<double> values;
  for (const auto& curve : curves) {
    out.per_threshold.push_back(average_precision(curve));
    values.push_back(out.per_threshold.back().value);
  }
  out.mean = mean_or(values, 0.0);
  return out;
}

ApSummary chamfer_ap(std::span<const Polyline> preds, std::span<const Polyline> gts,
                     std::span<const double> thresholds, Matcher matcher) {
  std::vector<PrCurve> curves;
  accumulate_lane_curves(lane_cost(preds, gts, LaneDistance::Chamfer), preds, gts, thresholds,
                         std::nullopt, matcher, curves);
  return summarize(thresholds, curves);
}

ApSummary det_l(std::span<const Polyline> preds, std::span<const Polyline> gts,
                const LaneMatchConfig& config) {
  std::vector<PrCurve> curves;
  accumulate_lane_curves(lane_cost(preds, gts, LaneDistance::FrechetPermuted), preds, gts,
                         config.thresholds, config.relaxation, config.matcher, curves);
  return summarize(config.thresholds, curves);
}

void accumulate_traffic_curves(std::span<const TrafficElement> preds,
                               std::span<const TrafficElement> gts,
                               const TrafficMatchConfig& config,
                               std::map<std::string, PrCurve>& curves) {
  std::map<std::string, std::pair<std::vector<TrafficElement>, std::vector<TrafficElement>>> by_class;
  for (const auto& t : preds) by_class[t.cls].first.push_back(t);
  for (const auto& t : gts) by_class[t.cls].second.push_back(t);
  for (const auto& [cls, group] : by_class) {
    const auto& [class_preds, class_gts] = group;
    std::vector<double> scores;
    for (const auto& t : class_preds) scores.push_back(t.score);
    const auto matches = match_traffic(class_preds, class_gts, config);
    curves[cls].add_scene(scores, matches, class_gts.size());
  }
}

DetTResult summarize_det_t(const std::map<std::string, PrCurve>& curves) {
  DetTResult out;
  std::vector<double> values;
  for (const auto& [cls, curve] : curves) {
    if (curve.gt_count == 0) continue;
    out.per_class.push_back({cls, average_precision(curve)});
    values.push_back(out.per_class.back().ap.value);
  }
  if (values.empty()) {
    bool any_pred = false;
    for (const auto& [cls, curve] : curves) any_pred = any_pred || !curve.hits.empty();
    out.undefined = !any_pred;
    out.value = any_pred ? 0.0 : 1.0;
    return out;
  }
  out.value = mean_or(values, 0.0);
  return out;
}

DetTResult det_t(std::span<const TrafficElement> preds, std::span<const TrafficElement> gts,
                 const TrafficMatchConfig& config) {
  std::map<std::string, PrCurve> curves;
  accumulate_traffic_curves(preds, gts, config, curves);
  return summarize_det_t(curves);
}

std::vector<double> top_vertex_scores(const SceneAnnotation& pred, const SceneAnnotation& gt,
                                      TopMode mode, double lane_threshold,
                                      const TopConfig& config) {
  const std::size_t m = gt.centerlines.size();
  const auto lane_map = invert_matches(
      match_lanes(pred.centerlines, gt.centerlines, lane_threshold, config.lanes), m);

  std::vector<double> entries;
  auto push = [&](const std::vector<double>& predicted, const std::vector<std::uint8_t>& truth,
                  std::optional<std::size_t> skip) {
    if (auto e = vertex_entry(predicted, truth, skip, config.edge_threshold)) entries.push_back(*e);
  };

  if (mode == TopMode::LaneLane) {
    auto projected = [&](std::size_t v, std::size_t u) {
      const int pv = lane_map[v];
      const int pu = lane_map[u];
      if (pv < 0 || pu < 0) return 0.0;
      return pred.a_cc[static_cast<std::size_t>(pv)][static_cast<std::size_t>(pu)];
    };
    for (int direction = 0; direction < 2; ++direction) {
      for (std::size_t v = 0; v < m; ++v) {
        std::vector<double> predicted(m);
        std::vector<std::uint8_t> truth(m);
        for (std::size_t u = 0; u < m; ++u) {
          const bool out = direction == 0;
          predicted[u] = out ? projected(v, u) : projected(u, v);
          truth[u] = (out ? gt.a_cc[v][u] : gt.a_cc[u][v]) > config.edge_threshold ? 1 : 0;
        }
        push(predicted, truth, v);
      }
    }
    return entries;
  }

  const std::size_t k = gt.traffic_elements.size();
  const auto traffic_map =
      invert_matches(match_traffic(pred.traffic_elements, gt.traffic_elements, config.traffic), k);
  auto projected = [&](std::size_t lane, std::size_t te) {
    const int pl = lane_map[lane];
    const int pt = traffic_map[te];
    if (pl < 0 || pt < 0) return 0.0;
    return pred.a_ct[static_cast<std::size_t>(pl)][static_cast<std::size_t>(pt)];
  };
  for (std::size_t v = 0; v < m; ++v) {
    std::vector<double> predicted(k);
    std::vector<std::uint8_t> truth(k);
    for (std::size_t t = 0; t < k; ++t) {
      predicted[t] = projected(v, t);
      truth[t] = gt.a_ct[v][t] > config.edge_threshold ? 1 : 0;
    }
    push(predicted, truth, std::nullopt);
  }
  for (std::size_t t = 0; t < k; ++t) {
    std::vector<double> predicted(m);
    std::vector<std::uint8_t> truth(m);
    for (std::size_t v = 0; v < m; ++v) {
      predicted[v] = projected(v, t);
      truth[v] = gt.a_ct[v][t] > config.edge_threshold ? 1 : 0;
    }
    push(predicted, truth, std::nullopt);
  }
  return entries;
}

TopResult top_score(const SceneAnnotation& pred, const SceneAnnotation& gt, TopMode mode,
                    const TopConfig& config) {
  pred.validate();
  gt.validate();
  TopResult out;
  for (const double t : config.lanes.thresholds) {
    const auto entries = top_vertex_scores(pred, gt, mode, t, config);
    out.vertices = entries.size();
    out.per_threshold.push_back(mean_or(entries, 1.0));
  }
  out.undefined = out.vertices == 0;
  out.value = mean_or(out.per_threshold, 1.0);
  return out;
}

double ols(double det_l, double det_t, double top_ll, double top_lt, OlsVariant variant) {
  for (const double v : {det_l, det_t, top_ll, top_lt}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::OutOfRange, "OLS components must lie in [0, 1]");
    }
  }
  if (variant == OlsVariant::Mean) return (det_l + det_t + top_ll + top_lt) / 4.0;
  return (det_l + det_t + std::sqrt(top_ll) + std::sqrt(top_lt)) / 4.0;
}

}  // namespace sdmapkit::metrics
