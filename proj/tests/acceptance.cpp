// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sdmapkit/encoder.hpp"
#include "sdmapkit/formats.hpp"
#include "sdmapkit/graph_ops.hpp"
#include "sdmapkit/ingest.hpp"
#include "sdmapkit/metrics.hpp"
#include "sdmapkit/raster.hpp"
#include "sdmapkit/sd_graph.hpp"

using namespace sdmapkit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::vector<Vec3> random_curve(std::mt19937_64& rng, int min_points, int max_points) {
  std::uniform_int_distribution<int> len(min_points, max_points);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Vec3> c(static_cast<std::size_t>(len(rng)));
  for (auto& p : c) p = {u(rng), u(rng), 0.0};
  return c;
}

Outcome frechet_equivalence() {
  std::mt19937_64 rng(101);
  const auto start = Clock::now();
  int mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const auto a = random_curve(rng, 1, 5);
    const auto b = random_curve(rng, 1, 5);
    if (metrics::frechet(a, b) != oracle::frechet_brute(a, b)) ++mismatches;
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && t < 5.0, "200 pairs, mismatches=" + std::to_string(mismatches) + ", " + fmt(t) + " s"};
}

Outcome chamfer_cases() {
  const std::vector<Vec3> tri = {{0, 0, 0}, {1, 2, 0}, {-3, 1, 0}};
  double worst = std::abs(metrics::chamfer(tri, tri) - 0.0);
  worst = std::max(worst, std::abs(metrics::chamfer(std::vector<Vec3>{{0, 0, 0}}, std::vector<Vec3>{{3, 4, 0}}) - 5.0));
  worst = std::max(worst, std::abs(metrics::chamfer(std::vector<Vec3>{{0, 0, 0}, {2, 0, 0}},
                                                    std::vector<Vec3>{{1, 0, 0}}) - 1.0));
  std::mt19937_64 rng(102);
  int asymmetric = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_curve(rng, 1, 8);
    const auto b = random_curve(rng, 1, 8);
    if (metrics::chamfer(a, b) != metrics::chamfer(b, a)) ++asymmetric;
  }
  return {worst <= 1e-12 && asymmetric == 0,
          "hand cases max error " + fmt(worst) + ", asymmetric pairs " + std::to_string(asymmetric) + "/10000"};
}

Outcome hungarian_optimality() {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> dim(1, 7);
  std::uniform_int_distribution<int> small(0, 9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  const auto start = Clock::now();
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const int r = dim(rng), c = dim(rng);
    // Half the instances use small integers so ties are common.
    const bool ties = i % 2 == 0;
    metrics::DenseMatrix m(static_cast<std::size_t>(r), std::vector<double>(static_cast<std::size_t>(c)));
    for (auto& row : m) {
      for (auto& v : row) v = ties ? small(rng) : u(rng);
    }
    const auto got = metrics::hungarian_match(m);
    const double best = oracle::assignment_brute(m);
    // Recompute from the assignment so a wrong map cannot hide behind its reported cost.
    double recomputed = 0.0;
    std::vector<bool> used(static_cast<std::size_t>(c), false);
    bool valid = true;
    std::size_t pairs = 0;
    for (std::size_t k = 0; k < got.row_to_col.size(); ++k) {
      const int j = got.row_to_col[k];
      if (j < 0) continue;
      if (used[static_cast<std::size_t>(j)]) valid = false;
      used[static_cast<std::size_t>(j)] = true;
      recomputed += m[k][static_cast<std::size_t>(j)];
      ++pairs;
    }
    valid = valid && pairs == static_cast<std::size_t>(std::min(r, c));
    if (!valid || std::abs(recomputed - best) > 1e-9 || std::abs(got.total_cost - best) > 1e-9) ++mismatches;
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && t < 10.0, "100 instances, mismatches=" + std::to_string(mismatches) + ", " + fmt(t) + " s"};
}

Outcome top_equivalence() {
  std::mt19937_64 rng(104);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto s = oracle::random_scene(rng, 8, 5);
    const double ll = metrics::top_score(s.pred, s.gt, metrics::TopMode::LaneLane).value;
    const double lt = metrics::top_score(s.pred, s.gt, metrics::TopMode::LaneTraffic).value;
    worst = std::max(worst, std::abs(ll - oracle::top_straight(s.pred, s.gt, false, {1, 2, 3}, 1.5, 35, 0.75, 0.5)));
    worst = std::max(worst, std::abs(lt - oracle::top_straight(s.pred, s.gt, true, {1, 2, 3}, 1.5, 35, 0.75, 0.5)));
  }
  return {worst <= 1e-9, "50 scenes, max |diff| " + fmt(worst)};
}

Outcome ols_adjudication() {
  const double det_l = 0.284, det_t = 0.450, top_ll = 0.0415, top_lt = 0.207, target = 0.348;
  const double sq = metrics::ols(det_l, det_t, top_ll, top_lt, metrics::OlsVariant::Sqrt);
  const double mean = metrics::ols(det_l, det_t, top_ll, top_lt, metrics::OlsVariant::Mean);
  const bool sq_ok = std::abs(sq - target) <= 0.01;
  const bool mean_ok = std::abs(mean - target) <= 0.01;
  const double dflt = metrics::ols(det_l, det_t, top_ll, top_lt);
  const bool default_is_winner = sq_ok ? dflt == sq : dflt == mean;
  return {sq_ok != mean_ok && default_is_winner,
          "sqrt " + fmt(100 * sq) + ", mean " + fmt(100 * mean) + ", default " + fmt(100 * dflt)};
}

SdMapGraph random_graph(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  std::uniform_int_distribution<int> count(2, 12);
  SdMapGraph g;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) g.nodes.push_back({{u(rng), u(rng)}, osm::HighwayClass::primary, 1, std::nullopt});
  std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(n - 1));
  const int m = count(rng);
  for (int e = 0; e < m; ++e) {
    const std::size_t a = pick(rng), b = pick(rng);
    if (a != b) g.edges.push_back({a, b, osm::HighwayClass::primary, 1});
  }
  return g;
}

Outcome resampling() {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> dens(0.3, 4.0);
  int failures = 0;
  double worst_spacing = 0.0, worst_length = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto g = random_graph(rng);
    // Every fourth graph uses the 1 m default.
    const double d = i % 4 == 0 ? 1.0 : dens(rng);
    const auto r = i % 4 == 0 ? osm::resample_graph(g) : osm::resample_graph(g, d);
    const double over = max_edge_length(r) - d;
    const double rel = std::abs(total_edge_length(r) - total_edge_length(g)) / std::max(1.0, total_edge_length(g));
    worst_spacing = std::max(worst_spacing, over);
    worst_length = std::max(worst_length, rel);
    if (over > 1e-9 || rel > 1e-9 || connected_components(r) != connected_components(g)) ++failures;
  }
  const bool default_is_one = osm::kDefaultDensity == 1.0;
  return {failures == 0 && default_is_one,
          "100 graphs, failures=" + std::to_string(failures) + ", max spacing excess " + fmt(worst_spacing) +
              ", max length error " + fmt(worst_length) + ", default density " + fmt(osm::kDefaultDensity)};
}

// Cell whose closed-open extent contains p, by scanning every row and column.
graph_ops::GridIndex containing_cell(Vec2 p, const raster::BevSpec& spec) {
  graph_ops::GridIndex out;
  const auto h = static_cast<std::int64_t>(spec.rows());
  const auto w = static_cast<std::int64_t>(spec.cols());
  bool row_found = false, col_found = false;
  for (std::int64_t r = 0; r < h; ++r) {
    const double lo = static_cast<double>(r - h / 2) * spec.resolution;
    if (lo <= p.x && p.x < lo + spec.resolution) {
      out.x_b = r;
      row_found = true;
    }
  }
  for (std::int64_t c = 0; c < w; ++c) {
    const double lo = static_cast<double>(c - w / 2) * spec.resolution;
    if (lo <= p.y && p.y < lo + spec.resolution) {
      out.y_b = c;
      col_found = true;
    }
  }
  out.in_range = row_found && col_found;
  return out;
}

Outcome grid_alignment() {
  const raster::BevSpec spec;
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> ux(-55.0, 55.0), uy(-28.0, 28.0);
  std::uniform_int_distribution<int> grid(-220, 220);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    // Every other point lies exactly on a cell boundary.
    const Vec2 p = i % 2 == 0 ? Vec2{ux(rng), uy(rng)} : Vec2{grid(rng) * 0.25, grid(rng) * 0.125};
    const auto got = graph_ops::align_to_grid(p, spec);
    const auto want = containing_cell(p, spec);
    if (got.in_range != want.in_range || (want.in_range && (got.x_b != want.x_b || got.y_b != want.y_b))) {
      ++mismatches;
    }
  }
  const auto o = graph_ops::align_to_grid({0.0, 0.0}, spec);
  const bool origin = o.in_range && o.x_b == static_cast<std::int64_t>(spec.rows() / 2) &&
                      o.y_b == static_cast<std::int64_t>(spec.cols() / 2);
  return {mismatches == 0 && origin, "10000 points, mismatches=" + std::to_string(mismatches) + ", origin -> (" +
                                         std::to_string(o.x_b) + ", " + std::to_string(o.y_b) + ")"};
}

using encoder::Matrix;
using encoder::MlpParams;
using encoder::Vector;

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  }
  return m;
}

MlpParams random_mlp(std::mt19937_64& rng, Eigen::Index in, Eigen::Index hidden, Eigen::Index out) {
  MlpParams mlp;
  mlp.layers.push_back({random_matrix(rng, hidden, in), random_matrix(rng, hidden, 1).col(0)});
  mlp.layers.push_back({random_matrix(rng, out, hidden), random_matrix(rng, out, 1).col(0)});
  return mlp;
}

Matrix symmetric_adjacency(std::mt19937_64& rng, Eigen::Index n) {
  std::bernoulli_distribution edge(0.5);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (edge(rng)) a(i, j) = a(j, i) = 1.0;
    }
  }
  return a;
}

double rel_error(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1e-12, std::max(a.norm(), b.norm()));
}

double min_kink(const MlpParams& mlp, const std::vector<Vector>& inputs) {
  double best = 1e300;
  for (const auto& x : inputs) best = std::min(best, (mlp.layers[0].weight * x + mlp.layers[0].bias).cwiseAbs().minCoeff());
  return best;
}

Vector mlp_jvp(const MlpParams& mlp, const Vector& x, const Vector& v) {
  const Vector z = mlp.layers[0].weight * x + mlp.layers[0].bias;
  const Vector mask = (z.array() > 0.0).cast<double>();
  return mlp.layers[1].weight * mask.cwiseProduct(mlp.layers[0].weight * v);
}

Outcome encoder_algebra() {
  std::mt19937_64 rng(107);
  const Eigen::Index n = 5, f = 3, k = 4, classes = 2;
  double worst_algebra = 0.0, worst_fd = 0.0;
  int fd_checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto mlp = random_mlp(rng, 2 * f, 6, 4);
    const Matrix x = random_matrix(rng, n, f);
    const Matrix a = symmetric_adjacency(rng, n);
    encoder::SgnnWeights w;
    for (int l = 0; l < 3; ++l) w.w_cc.push_back(random_matrix(rng, f, f));
    for (Eigen::Index l = 0; l < classes; ++l) w.w_ct.push_back(random_matrix(rng, f, 2));
    w.s_t = random_matrix(rng, classes, k, 0.0, 1.0);
    w.alpha = 0.7;
    w.beta = 1.3;
    const auto proj = random_mlp(rng, 3, 5, 2);
    const Matrix t = random_matrix(rng, k, 3);
    const Matrix acc = random_matrix(rng, n, n, 0.05, 0.95);
    const Matrix act = random_matrix(rng, n, k, 0.05, 0.95);

    // Permutation equivariance.
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
    for (Eigen::Index i = 0; i < n; ++i) perm.indices()(i) = idx[static_cast<std::size_t>(i)];
    const Matrix px = perm * x;
    const Matrix pa = perm * a * perm.transpose();
    const Matrix pacc = perm * acc * perm.transpose();
    worst_algebra = std::max(worst_algebra, rel_error(encoder::edge_conv(px, pa, mlp), perm * encoder::edge_conv(x, a, mlp)));
    worst_algebra = std::max(worst_algebra,
                             rel_error(encoder::sgnn_cc_propagate(px, pacc, w), perm * encoder::sgnn_cc_propagate(x, acc, w)));
    worst_algebra = std::max(worst_algebra, rel_error(encoder::sgnn_ct_propagate(t, perm * act, w, proj),
                                                      perm * encoder::sgnn_ct_propagate(t, act, w, proj)));

    // Linearity: sgnn_cc in the queries, sgnn_ct in the association.
    const Matrix y = random_matrix(rng, n, f);
    worst_algebra = std::max(worst_algebra, rel_error(encoder::sgnn_cc_propagate(2.0 * x - 0.5 * y, acc, w),
                                                      2.0 * encoder::sgnn_cc_propagate(x, acc, w) -
                                                          0.5 * encoder::sgnn_cc_propagate(y, acc, w)));
    const Matrix act2 = random_matrix(rng, n, k, 0.05, 0.95);
    worst_algebra = std::max(worst_algebra, rel_error(encoder::sgnn_ct_propagate(t, act + act2, w, proj),
                                                      encoder::sgnn_ct_propagate(t, act, w, proj) +
                                                          encoder::sgnn_ct_propagate(t, act2, w, proj)));

    // Zero-adjacency reductions.
    const Matrix zero_nn = Matrix::Zero(n, n);
    worst_algebra = std::max(worst_algebra, encoder::edge_conv(x, zero_nn, mlp).cwiseAbs().maxCoeff());
    worst_algebra = std::max(worst_algebra,
                             rel_error(encoder::sgnn_cc_propagate(x, zero_nn, w), w.alpha * x * w.w_cc[2].transpose()));
    worst_algebra = std::max(worst_algebra,
                             encoder::sgnn_ct_propagate(t, Matrix::Zero(n, k), w, proj).cwiseAbs().maxCoeff());

    // Finite differences against the analytic directional derivative.
    const double h = 1e-6;
    const Matrix v = random_matrix(rng, n, f);
    std::vector<Vector> inputs;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (a(i, j) == 0.0) continue;
        Vector p(2 * f);
        p << x.row(i).transpose(), (x.row(j) - x.row(i)).transpose();
        inputs.push_back(p);
      }
    }
    if (inputs.empty() || min_kink(mlp, inputs) < 1e-3) continue;
    Matrix analytic = Matrix::Zero(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
      int count = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (a(i, j) == 0.0) continue;
        Vector p(2 * f), dp(2 * f);
        p << x.row(i).transpose(), (x.row(j) - x.row(i)).transpose();
        dp << v.row(i).transpose(), (v.row(j) - v.row(i)).transpose();
        analytic.row(i) += mlp_jvp(mlp, p, dp).transpose();
        ++count;
      }
      if (count > 0) analytic.row(i) /= count;
    }
    const Matrix numeric = (encoder::edge_conv(x + h * v, a, mlp) - encoder::edge_conv(x - h * v, a, mlp)) / (2 * h);
    worst_fd = std::max(worst_fd, rel_error(numeric, analytic));
    const Matrix cc = (encoder::sgnn_cc_propagate(x + h * v, acc, w) - encoder::sgnn_cc_propagate(x - h * v, acc, w)) / (2 * h);
    worst_fd = std::max(worst_fd, rel_error(cc, encoder::sgnn_cc_propagate(v, acc, w)));
    ++fd_checked;
  }
  return {worst_algebra <= 1e-12 && worst_fd <= 1e-4 && fd_checked >= 10,
          "max algebra error " + fmt(worst_algebra) + ", max FD relative error " + fmt(worst_fd) + " over " +
              std::to_string(fd_checked) + " instances"};
}

Outcome perturbation_grid() {
  std::mt19937_64 rng(108);
  auto g = random_graph(rng);
  g.nodes.insert(g.nodes.begin(), {{0.0, 0.0}, osm::HighwayClass::primary, 1, std::nullopt});
  g.nodes.insert(g.nodes.begin() + 1, {{10.0, 0.0}, osm::HighwayClass::primary, 1, std::nullopt});
  for (auto& e : g.edges) {
    e.a += 2;
    e.b += 2;
  }
  double worst = 0.0;
  bool topology = true;
  for (const double tm : {0.25, 0.5, 1.0, 2.0}) {
    for (const double rm : {0.0, 5.0, 10.0}) {
      const auto out = graph_ops::perturb(g, {tm, rm, 42});
      // Recover the transform from the output geometry alone.
      const Vec2 shift = out.nodes[0].position;
      const Vec2 axis = out.nodes[1].position - shift;
      const double angle = std::atan2(axis.y, axis.x);
      worst = std::max(worst, std::abs(norm(shift) - tm));
      worst = std::max(worst, std::abs(std::abs(angle) - rm * std::numbers::pi / 180.0));
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < g.nodes.size(); ++j) {
          worst = std::max(worst, std::abs(distance(out.nodes[i].position, out.nodes[j].position) -
                                           distance(g.nodes[i].position, g.nodes[j].position)));
        }
      }
      topology = topology && out.edges.size() == g.edges.size() && out.nodes.size() == g.nodes.size();
      for (std::size_t e = 0; topology && e < g.edges.size(); ++e) {
        topology = out.edges[e].a == g.edges[e].a && out.edges[e].b == g.edges[e].b;
      }
    }
  }
  return {worst <= 1e-9 && topology, "12 grid points, max deviation " + fmt(worst)};
}

int run(const std::string& args) {
  const std::string cmd = "\"" SDMAPKIT_CLI "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome end_to_end() {
  const std::string fx = SDMAPKIT_FIXTURES;
  const fs::path root = fs::temp_directory_path() / ("sdmapkit_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const auto start = Clock::now();
  bool ok = true;
  for (const char* tag : {"a", "b"}) {
    const fs::path d = root / tag;
    fs::create_directories(d);
    const std::string p = d.string() + "/";
    ok = ok && run("ingest --osm " + fx + "/tiny.osm --poses " + fx + "/poses.json --origin-lat 48.137 --origin-lon 11.575 --out " + p + "g.sdg.json") == 0;
    ok = ok && run("rasterize --graph " + p + "g.sdg.json --out " + p + "g.bev --png " + p + "g.png") == 0;
    ok = ok && run("evaluate --pred " + fx + "/pred.olann.jsonl --gt " + fx + "/gt.olann.jsonl --out " + p + "r.json --csv " + p + "r.csv") == 0;
  }
  const double t = seconds_since(start);
  std::size_t identical = 0;
  const std::vector<std::string> outputs = {"g.sdg.json", "g.bev", "g.png", "r.json", "r.csv"};
  if (ok) {
    for (const auto& name : outputs) {
      if (formats::read_binary_file(root / "a" / name) == formats::read_binary_file(root / "b" / name)) ++identical;
    }
  }
  fs::remove_all(root);
  return {ok && identical == outputs.size() && t < 30.0,
          std::string(ok ? "" : "a command failed, ") + std::to_string(identical) + "/" + std::to_string(outputs.size()) +
              " outputs byte-identical, " + fmt(t) + " s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"frechet_oracle_equivalence", frechet_equivalence},
      {"chamfer_hand_cases", chamfer_cases},
      {"hungarian_optimality", hungarian_optimality},
      {"top_oracle_equivalence", top_equivalence},
      {"ols_adjudication", ols_adjudication},
      {"resampling", resampling},
      {"grid_alignment", grid_alignment},
      {"edgeconv_sgnn_algebra", encoder_algebra},
      {"perturbation_harness", perturbation_grid},
      {"end_to_end_determinism", end_to_end},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failures;
}
