#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "sdmapkit/encoder.hpp"
#include "sdmapkit/error.hpp"

using namespace sdmapkit;
using namespace sdmapkit::encoder;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
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

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const Matrix& m) {
  Rows r(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return r;
}

// Plain-loop MLP and EdgeConv used as the reference.
std::vector<double> naive_mlp(const MlpParams& mlp, std::vector<double> h) {
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const auto W = to_rows(mlp.layers[l].weight);
    std::vector<double> next(W.size(), 0.0);
    for (std::size_t i = 0; i < W.size(); ++i) {
      double s = mlp.layers[l].bias(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < h.size(); ++j) s += W[i][j] * h[j];
      next[i] = (l + 1 < mlp.layers.size()) ? std::max(s, 0.0) : s;
    }
    h = next;
  }
  return h;
}

Rows naive_edge_conv(const Rows& x, const Rows& adj, const MlpParams& mlp) {
  const std::size_t n = x.size();
  Rows out(n, std::vector<double>(mlp.output_dim(), 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (adj[i][j] == 0.0) continue;
      std::vector<double> in = x[i];
      for (std::size_t k = 0; k < x[i].size(); ++k) in.push_back(x[j][k] - x[i][k]);
      const auto y = naive_mlp(mlp, in);
      for (std::size_t k = 0; k < y.size(); ++k) out[i][k] += y[k];
      ++count;
    }
    if (count > 0) {
      for (auto& v : out[i]) v /= count;
    }
  }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

double rel_error(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1e-12, std::max(a.norm(), b.norm()));
}

Matrix symmetric_adjacency(std::mt19937_64& rng, Eigen::Index n, double p) {
  std::bernoulli_distribution edge(p);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (edge(rng)) a(i, j) = a(j, i) = 1.0;
    }
  }
  return a;
}

// Smallest |pre-activation| of the hidden layer over a set of inputs.
double min_kink_distance(const MlpParams& mlp, const std::vector<Vector>& inputs) {
  double best = 1e300;
  for (const auto& x : inputs) {
    const Vector z = mlp.layers[0].weight * x + mlp.layers[0].bias;
    best = std::min(best, z.cwiseAbs().minCoeff());
  }
  return best;
}

// d/dt MLP(x + t v) at t = 0.
Vector mlp_jvp(const MlpParams& mlp, const Vector& x, const Vector& v) {
  const Vector z = mlp.layers[0].weight * x + mlp.layers[0].bias;
  const Vector mask = (z.array() > 0.0).cast<double>();
  return mlp.layers[1].weight * (mask.cwiseProduct(mlp.layers[0].weight * v));
}

SgnnWeights random_sgnn(std::mt19937_64& rng, Eigen::Index fc, Eigen::Index ft, Eigen::Index classes, Eigen::Index k) {
  SgnnWeights w;
  for (int l = 0; l < 3; ++l) w.w_cc.push_back(random_matrix(rng, fc, fc));
  for (Eigen::Index l = 0; l < classes; ++l) w.w_ct.push_back(random_matrix(rng, fc, ft));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  w.s_t = Matrix(classes, k);
  for (Eigen::Index i = 0; i < classes; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) w.s_t(i, j) = u01(rng);
  }
  w.alpha = 0.7;
  w.beta = 1.3;
  return w;
}

Matrix random_confidences(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  }
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("edge_conv: identical connected nodes through a difference-selecting MLP give zeros") {
  const Eigen::Index f = 3;
  MlpParams mlp;
  Matrix select = Matrix::Zero(2 * f, 2 * f);
  select.bottomRightCorner(f, f) = Matrix::Identity(f, f);
  mlp.layers.push_back({select, Vector::Zero(2 * f)});
  Matrix take = Matrix::Zero(f, 2 * f);
  take.rightCols(f) = Matrix::Identity(f, f);
  mlp.layers.push_back({take, Vector::Zero(f)});
  Matrix x(2, f);
  x << 1, 2, 3, 1, 2, 3;
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  const Matrix out = edge_conv(x, a, mlp);
  CHECK(out.rows() == 2);
  CHECK(out.cols() == f);
  CHECK(out.isZero(0.0));
}

TEST_CASE("edge_conv: isolated node gets a zero row") {
  std::mt19937_64 rng(1);
  const auto mlp = random_mlp(rng, 4, 5, 3);
  const Matrix x = random_matrix(rng, 3, 2);
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  const Matrix out = edge_conv(x, a, mlp);
  CHECK(out.row(2).isZero(0.0));
  CHECK_FALSE(out.row(0).isZero(0.0));
}

TEST_CASE("edge_conv: 3-node path against the plain-loop reference") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mlp = random_mlp(rng, 6, 8, 4);
    const Matrix x = random_matrix(rng, 3, 3);
    Matrix a(3, 3);
    a << 0, 1, 0, 1, 0, 1, 0, 1, 0;
    const Matrix out = edge_conv(x, a, mlp);
    const Rows ref = naive_edge_conv(to_rows(x), to_rows(a), mlp);
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index k = 0; k < 4; ++k) CHECK(std::abs(out(i, k) - ref[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]) < 1e-6);
    }
    // The middle node averages its two neighbours.
    Vector p0(6), p2(6);
    p0 << x.row(1).transpose(), (x.row(0) - x.row(1)).transpose();
    p2 << x.row(1).transpose(), (x.row(2) - x.row(1)).transpose();
    CHECK(max_abs_diff(out.row(1), ((mlp.forward(p0) + mlp.forward(p2)) / 2.0).transpose()) < 1e-12);
  }
}

TEST_CASE("edge_conv is permutation equivariant") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 7;
    const auto mlp = random_mlp(rng, 4, 6, 3);
    const Matrix x = random_matrix(rng, n, 2);
    const Matrix a = symmetric_adjacency(rng, n, 0.4);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> p(n);
    for (Eigen::Index i = 0; i < n; ++i) p.indices()(i) = perm[static_cast<std::size_t>(i)];
    const Matrix lhs = edge_conv(p * x, p * a * p.transpose(), mlp);
    const Matrix rhs = p * edge_conv(x, a, mlp);
    CHECK(max_abs_diff(lhs, rhs) < 1e-6);
  }
}

TEST_CASE("edge_conv shape errors") {
  std::mt19937_64 rng(4);
  const auto mlp = random_mlp(rng, 4, 3, 2);
  const Matrix x = random_matrix(rng, 3, 2);
  CHECK(code_of([&] { edge_conv(x, Matrix::Zero(2, 2), mlp); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { edge_conv(random_matrix(rng, 3, 3), Matrix::Zero(3, 3), mlp); }) == ErrorCode::DimensionMismatch);
  MlpParams three = mlp;
  three.layers.push_back({random_matrix(rng, 2, 2), Vector::Zero(2)});
  CHECK(code_of([&] { edge_conv(x, Matrix::Zero(3, 3), three); }) == ErrorCode::DimensionMismatch);
  MlpParams broken = mlp;
  broken.layers[1].weight = random_matrix(rng, 2, 5);
  CHECK(code_of([&] { edge_conv(x, Matrix::Zero(3, 3), broken); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("sgnn_cc: empty adjacency leaves only the self slice") {
  std::mt19937_64 rng(5);
  auto w = random_sgnn(rng, 3, 2, 2, 1);
  w.alpha = 1.0;
  const Matrix q = random_matrix(rng, 4, 3);
  const Matrix out = sgnn_cc_propagate(q, Matrix::Zero(4, 4), w);
  CHECK(max_abs_diff(out, (w.w_cc[2] * q.transpose()).transpose()) < 1e-15);
  w.alpha = 0.3;
  CHECK(max_abs_diff(sgnn_cc_propagate(q, Matrix::Zero(4, 4), w), 0.3 * (w.w_cc[2] * q.transpose()).transpose()) < 1e-15);
}

TEST_CASE("sgnn_cc: alpha = 0 gives zeros") {
  std::mt19937_64 rng(6);
  auto w = random_sgnn(rng, 3, 2, 2, 1);
  w.alpha = 0.0;
  CHECK(sgnn_cc_propagate(random_matrix(rng, 4, 3), random_confidences(rng, 4, 4), w).isZero(0.0));
}

TEST_CASE("sgnn_cc: two centerlines, hand-expanded slices") {
  std::mt19937_64 rng(7);
  const auto w = random_sgnn(rng, 2, 2, 1, 1);
  const Matrix q = random_matrix(rng, 2, 2);
  Matrix a(2, 2);
  a << 0, 1, 0, 0;
  const Vector q0 = q.row(0).transpose();
  const Vector q1 = q.row(1).transpose();
  // m = 0: successor gate A(0,1) on q1, self on q0.
  const Vector out0 = w.alpha * (w.w_cc[0] * q1 + w.w_cc[2] * q0);
  // m = 1: predecessor gate A(0,1) on q0, self on q1.
  const Vector out1 = w.alpha * (w.w_cc[1] * q0 + w.w_cc[2] * q1);
  const Matrix out = sgnn_cc_propagate(q, a, w);
  CHECK(max_abs_diff(out.row(0), out0.transpose()) < 1e-12);
  CHECK(max_abs_diff(out.row(1), out1.transpose()) < 1e-12);
}

TEST_CASE("sgnn_cc is linear in the queries") {
  std::mt19937_64 rng(8);
  const auto w = random_sgnn(rng, 4, 2, 1, 1);
  const Matrix q = random_matrix(rng, 5, 4);
  const Matrix a = random_confidences(rng, 5, 5);
  CHECK(sgnn_cc_propagate(2.0 * q, a, w) == 2.0 * sgnn_cc_propagate(q, a, w));
}

TEST_CASE("sgnn_cc shape errors") {
  std::mt19937_64 rng(9);
  const auto w = random_sgnn(rng, 3, 2, 1, 1);
  const Matrix q = random_matrix(rng, 2, 3);
  CHECK(code_of([&] { sgnn_cc_propagate(q, Matrix::Zero(2, 3), w); }) == ErrorCode::NonSquareAdjacency);
  CHECK(code_of([&] { sgnn_cc_propagate(q, Matrix::Zero(3, 3), w); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { sgnn_cc_propagate(random_matrix(rng, 2, 4), Matrix::Zero(2, 2), w); }) == ErrorCode::DimensionMismatch);
  auto two = w;
  two.w_cc.pop_back();
  CHECK(code_of([&] { sgnn_cc_propagate(q, Matrix::Zero(2, 2), two); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("sgnn_ct: zero association gives zeros") {
  std::mt19937_64 rng(10);
  const auto w = random_sgnn(rng, 3, 2, 2, 4);
  const auto proj = random_mlp(rng, 5, 4, 2);
  CHECK(sgnn_ct_propagate(random_matrix(rng, 4, 5), Matrix::Zero(3, 4), w, proj).isZero(0.0));
}

TEST_CASE("sgnn_ct: one-hot scores select one class slice per element") {
  std::mt19937_64 rng(11);
  auto w = random_sgnn(rng, 3, 2, 3, 2);
  w.s_t = Matrix::Zero(3, 2);
  w.s_t(2, 0) = 1.0;
  w.s_t(0, 1) = 1.0;
  const auto proj = random_mlp(rng, 4, 5, 2);
  const Matrix t = random_matrix(rng, 2, 4);
  Matrix a(1, 2);
  a << 0.4, 0.9;
  const Vector expected = w.beta * (0.4 * w.w_ct[2] * proj.forward(t.row(0).transpose()) +
                                    0.9 * w.w_ct[0] * proj.forward(t.row(1).transpose()));
  CHECK(max_abs_diff(sgnn_ct_propagate(t, a, w, proj).row(0), expected.transpose()) < 1e-12);
}

TEST_CASE("sgnn_ct: single term by hand") {
  // beta * S * A * W * f_proj(q) with 1-dimensional features.
  SgnnWeights w;
  w.w_ct = {Matrix::Constant(1, 1, 3.0)};
  w.s_t = Matrix::Constant(1, 1, 0.5);
  w.beta = 2.0;
  MlpParams proj;
  proj.layers.push_back({Matrix::Constant(1, 1, 2.0), Vector::Constant(1, 1.0)});
  proj.layers.push_back({Matrix::Constant(1, 1, -1.5), Vector::Constant(1, 0.25)});
  // f_proj(1.5) = -1.5 * relu(2 * 1.5 + 1) + 0.25 = -5.75
  const Matrix out = sgnn_ct_propagate(Matrix::Constant(1, 1, 1.5), Matrix::Constant(1, 1, 0.8), w, proj);
  CHECK(out(0, 0) == doctest::Approx(2.0 * 0.5 * 0.8 * 3.0 * -5.75).epsilon(1e-14));
}

TEST_CASE("sgnn_ct shape errors") {
  std::mt19937_64 rng(12);
  const auto w = random_sgnn(rng, 3, 2, 2, 4);
  const auto proj = random_mlp(rng, 5, 4, 2);
  const Matrix t = random_matrix(rng, 4, 5);
  CHECK(code_of([&] { sgnn_ct_propagate(t, Matrix::Zero(3, 3), w, proj); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { sgnn_ct_propagate(random_matrix(rng, 4, 6), Matrix::Zero(3, 4), w, proj); }) == ErrorCode::DimensionMismatch);
  auto bad_s = w;
  bad_s.s_t = Matrix::Zero(2, 3);
  CHECK(code_of([&] { sgnn_ct_propagate(t, Matrix::Zero(3, 4), bad_s, proj); }) == ErrorCode::DimensionMismatch);
  const auto wide = random_mlp(rng, 5, 4, 3);
  CHECK(code_of([&] { sgnn_ct_propagate(t, Matrix::Zero(3, 4), w, wide); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("finite differences match analytic directional derivatives") {
  std::mt19937_64 rng(13);
  const double h = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 50 && checked < 10; ++trial) {
    const Eigen::Index n = 5, f = 3;
    const auto mlp = random_mlp(rng, 2 * f, 6, 4);
    const Matrix x = random_matrix(rng, n, f);
    const Matrix a = symmetric_adjacency(rng, n, 0.6);
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
    if (inputs.empty() || min_kink_distance(mlp, inputs) < 1e-3) continue;
    ++checked;

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
    const Matrix numeric = (edge_conv(x + h * v, a, mlp) - edge_conv(x - h * v, a, mlp)) / (2 * h);
    CHECK(rel_error(numeric, analytic) < 1e-4);

    // SGNN centerline-centerline: linear in Q, and in A for a dense confidence matrix.
    const auto w = random_sgnn(rng, f, 2, 2, 4);
    const Matrix ac = random_confidences(rng, n, n);
    const Matrix da = random_matrix(rng, n, n, 0.01);
    const Matrix cc_q = (sgnn_cc_propagate(x + h * v, ac, w) - sgnn_cc_propagate(x - h * v, ac, w)) / (2 * h);
    CHECK(rel_error(cc_q, sgnn_cc_propagate(v, ac, w)) < 1e-4);
    Matrix cc_a_analytic = Matrix::Zero(n, f);
    for (Eigen::Index m = 0; m < n; ++m) {
      for (Eigen::Index k = 0; k < n; ++k) {
        const Vector q = x.row(k).transpose();
        cc_a_analytic.row(m) += (w.alpha * (da(m, k) * (w.w_cc[0] * q) + da(k, m) * (w.w_cc[1] * q))).transpose();
      }
    }
    const Matrix cc_a = (sgnn_cc_propagate(x, ac + h * da, w) - sgnn_cc_propagate(x, ac - h * da, w)) / (2 * h);
    CHECK(rel_error(cc_a, cc_a_analytic) < 1e-4);

    // SGNN centerline-traffic: through f_proj with ReLU.
    const auto proj = random_mlp(rng, 3, 5, 2);
    const Matrix t = random_matrix(rng, 4, 3);
    const Matrix vt = random_matrix(rng, 4, 3);
    std::vector<Vector> t_rows;
    for (Eigen::Index k = 0; k < 4; ++k) t_rows.push_back(t.row(k).transpose());
    if (min_kink_distance(proj, t_rows) < 1e-3) continue;
    const Matrix act = random_confidences(rng, n, 4);
    Matrix ct_analytic = Matrix::Zero(n, f);
    for (Eigen::Index m = 0; m < n; ++m) {
      for (Eigen::Index k = 0; k < 4; ++k) {
        const Vector dproj = mlp_jvp(proj, t.row(k).transpose(), vt.row(k).transpose());
        for (std::size_t l = 0; l < w.w_ct.size(); ++l) {
          ct_analytic.row(m) += (w.beta * w.s_t(static_cast<Eigen::Index>(l), k) * act(m, k) * (w.w_ct[l] * dproj)).transpose();
        }
      }
    }
    const Matrix ct = (sgnn_ct_propagate(t + h * vt, act, w, proj) - sgnn_ct_propagate(t - h * vt, act, w, proj)) / (2 * h);
    CHECK(rel_error(ct, ct_analytic) < 1e-4);
  }
  CHECK(checked >= 5);
}

TEST_CASE("outputs stay finite for finite inputs") {
  std::mt19937_64 rng(14);
  const auto mlp = random_mlp(rng, 4, 8, 3);
  const Matrix x = random_matrix(rng, 6, 2, 1e3);
  CHECK(edge_conv(x, symmetric_adjacency(rng, 6, 0.5), mlp).allFinite());
  for (const double p : {0.0, 1.0, 1e-300, 1.0 - 1e-17}) {
    CHECK(std::isfinite(focal_loss(p, 1, 2.0, 0.25)));
    CHECK(std::isfinite(focal_loss(p, 0, 2.0, 0.25)));
  }
}

TEST_CASE("focal loss values") {
  CHECK(focal_loss(0.5, 1, 0.0, 1.0) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(focal_loss(1.0, 1, 2.0, 0.25) < 1e-7);
  CHECK(focal_loss(0.3, 1, 2.0, 0.25) == doctest::Approx(0.25 * 0.49 * -std::log(0.3)).epsilon(1e-14));
  CHECK(focal_loss(0.3, 1, 2.0, 0.25) == doctest::Approx(0.1475).epsilon(1e-3));
  // Target 0 uses 1 - p and 1 - alpha.
  CHECK(focal_loss(0.7, 0, 2.0, 0.75) == doctest::Approx(focal_loss(0.3, 1, 2.0, 0.25)).epsilon(1e-14));
  for (int k = 1; k <= 99; ++k) {
    const double p = k / 100.0;
    CHECK(std::abs(focal_loss(p, 1, 0.0, 1.0) + std::log(p)) < 1e-12);
    CHECK(std::abs(focal_loss(p, 0, 0.0, 0.0) + std::log(1.0 - p)) < 1e-12);
  }
}

TEST_CASE("p2p loss") {
  std::vector<Vec2> pred;
  for (int i = 0; i < 20; ++i) pred.push_back({static_cast<double>(i), 0.5 * i});
  CHECK(p2p_loss(pred, pred) == 0.0);
  std::vector<Vec2> reversed(pred.rbegin(), pred.rend());
  CHECK(p2p_loss(pred, reversed) == 0.0);
  CHECK(prefers_reversed(pred, reversed));
  std::vector<Vec2> shifted = pred;
  for (auto& p : shifted) p = p + Vec2{1, 2};
  CHECK(p2p_loss(shifted, pred) == doctest::Approx(60.0).epsilon(1e-15));
  CHECK(code_of([&] { p2p_loss(pred, {{0, 0}}); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("direction loss") {
  std::vector<Vec2> line;
  for (int i = 0; i < 20; ++i) line.push_back({static_cast<double>(i), 0.0});
  CHECK(dir_loss(line, line).value == doctest::Approx(19.0).epsilon(1e-15));
  std::vector<Vec2> rev(line.rbegin(), line.rend());
  CHECK(dir_loss(line, rev).value == doctest::Approx(19.0).epsilon(1e-15));

  std::vector<Vec2> stair_a, stair_b;
  for (int i = 0; i < 6; ++i) {
    stair_a.push_back({static_cast<double>(i), static_cast<double>(i % 2)});
    stair_b.push_back({static_cast<double>(i % 2), -static_cast<double>(i)});
  }
  // Edge pairs (1,1)/(1,-1) and (1,-1)/(-1,-1) are orthogonal.
  CHECK(std::abs(dir_loss(stair_a, stair_b).value) < 1e-15);

  const std::vector<Vec2> a = {{0, 0}, {1, 0}};
  const std::vector<Vec2> b = {{0, 0}, {std::cos(std::numbers::pi / 3), std::sin(std::numbers::pi / 3)}};
  CHECK(dir_loss(a, b).value == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<Vec2> stuck = {{0, 0}, {0, 0}, {1, 0}};
  const std::vector<Vec2> gt = {{0, 0}, {1, 0}, {2, 0}};
  const auto d = dir_loss(stuck, gt);
  CHECK(d.skipped_edges == 1);
  CHECK(d.value == doctest::Approx(1.0));
  CHECK(code_of([&] { dir_loss({{0, 0}}, {{0, 0}}); }) == ErrorCode::InvalidArgument);
}
