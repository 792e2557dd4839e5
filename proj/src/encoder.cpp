#include "sdmapkit/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdmapkit/error.hpp"

namespace sdmapkit::encoder {
namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) throw Error(code, message);
}

}  // namespace

std::size_t MlpParams::input_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.cols());
}

std::size_t MlpParams::output_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.rows());
}

void MlpParams::validate() const {
  require(!layers.empty(), ErrorCode::DimensionMismatch, "MLP has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    require(layers[i].bias.size() == layers[i].weight.rows(), ErrorCode::DimensionMismatch,
            "MLP layer " + std::to_string(i) + " bias does not match weight rows");
    if (i > 0) {
      require(layers[i].weight.cols() == layers[i - 1].weight.rows(), ErrorCode::DimensionMismatch,
              "MLP layer " + std::to_string(i) + " input does not chain");
    }
  }
}

Vector MlpParams::forward(const Vector& x) const {
  Vector h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i].weight * h + layers[i].bias;
    if (i + 1 < layers.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

Matrix edge_conv(const Matrix& node_features, const Matrix& adjacency, const MlpParams& mlp) {
  mlp.validate();
  const Eigen::Index n = node_features.rows();
  const Eigen::Index f = node_features.cols();
  require(mlp.layers.size() == 2, ErrorCode::DimensionMismatch, "EdgeConv MLP needs two layers");
  require(adjacency.rows() == n && adjacency.cols() == n, ErrorCode::DimensionMismatch,
          "adjacency " + shape(adjacency) + " does not match " + std::to_string(n) + " nodes");
  require(static_cast<Eigen::Index>(mlp.input_dim()) == 2 * f, ErrorCode::DimensionMismatch,
          "EdgeConv MLP input must be 2F = " + std::to_string(2 * f));

  Matrix out = Matrix::Zero(n, static_cast<Eigen::Index>(mlp.output_dim()));
  Vector pair(2 * f);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = node_features.row(i).transpose();
    Vector sum = Vector::Zero(out.cols());
    std::size_t count = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) == 0.0) continue;
      pair.head(f) = xi;
      pair.tail(f) = node_features.row(j).transpose() - xi;
      sum += mlp.forward(pair);
      ++count;
    }
    if (count > 0) out.row(i) = (sum / static_cast<double>(count)).transpose();
  }
  return out;
}

Matrix sgnn_cc_propagate(const Matrix& queries, const Matrix& a_cc, const SgnnWeights& weights) {
  const Eigen::Index m = queries.rows();
  const Eigen::Index fc = queries.cols();
  require(a_cc.rows() == a_cc.cols(), ErrorCode::NonSquareAdjacency,
          "A_CC must be square, got " + shape(a_cc));
  require(a_cc.rows() == m, ErrorCode::DimensionMismatch,
          "A_CC " + shape(a_cc) + " does not match " + std::to_string(m) + " centerlines");
  require(weights.w_cc.size() == 3, ErrorCode::DimensionMismatch,
          "W_CC needs 3 slices (successor, predecessor, self)");
  for (const auto& w : weights.w_cc) {
    require(w.rows() == fc && w.cols() == fc, ErrorCode::DimensionMismatch,
            "W_CC slice " + shape(w) + " does not match F_c = " + std::to_string(fc));
  }

  Matrix out = Matrix::Zero(m, fc);
  for (Eigen::Index row = 0; row < m; ++row) {
    Vector acc = Vector::Zero(fc);
    for (Eigen::Index n = 0; n < m; ++n) {
      const double gates[3] = {a_cc(row, n), a_cc(n, row), row == n ? 1.0 : 0.0};
      if (gates[0] == 0.0 && gates[1] == 0.0 && gates[2] == 0.0) continue;
      const Vector q = queries.row(n).transpose();
      for (std::size_t l = 0; l < 3; ++l) {
        if (gates[l] == 0.0) continue;
        acc += (weights.alpha * gates[l]) * (weights.w_cc[l] * q);
      }
    }
    out.row(row) = acc.transpose();
  }
  return out;
}

Matrix sgnn_ct_propagate(const Matrix& traffic_queries, const Matrix& a_ct,
                         const SgnnWeights& weights, const MlpParams& f_proj) {
  f_proj.validate();
  const Eigen::Index k = traffic_queries.rows();
  const Eigen::Index m = a_ct.rows();
  require(a_ct.cols() == k, ErrorCode::DimensionMismatch,
          "A_CT " + shape(a_ct) + " does not match " + std::to_string(k) + " traffic elements");
  require(static_cast<Eigen::Index>(f_proj.input_dim()) == traffic_queries.cols(),
          ErrorCode::DimensionMismatch, "f_proj input does not match F_t");
  require(!weights.w_ct.empty(), ErrorCode::DimensionMismatch, "W_CT has no class slices");
  const auto classes = static_cast<Eigen::Index>(weights.w_ct.size());
  require(weights.s_t.rows() == classes && weights.s_t.cols() == k, ErrorCode::DimensionMismatch,
          "S_T " + shape(weights.s_t) + " must be " + std::to_string(classes) + "x" +
              std::to_string(k));
  const Eigen::Index fc = weights.w_ct.front().rows();
  for (const auto& w : weights.w_ct) {
    require(w.rows() == fc && w.cols() == static_cast<Eigen::Index>(f_proj.output_dim()),
            ErrorCode::DimensionMismatch, "W_CT slice " + shape(w) + " does not match f_proj");
  }

  std::vector<Vector> projected(static_cast<std::size_t>(k));
  for (Eigen::Index n = 0; n < k; ++n) {
    projected[static_cast<std::size_t>(n)] = f_proj.forward(traffic_queries.row(n).transpose());
  }

  Matrix out = Matrix::Zero(m, fc);
  for (Eigen::Index row = 0; row < m; ++row) {
    Vector acc = Vector::Zero(fc);
    for (Eigen::Index n = 0; n < k; ++n) {
      const double a = a_ct(row, n);
      if (!(a > 0.0)) continue;
      for (Eigen::Index l = 0; l < classes; ++l) {
        const double gate = weights.beta * weights.s_t(l, n) * a;
        if (gate == 0.0) continue;
        acc += gate * (weights.w_ct[static_cast<std::size_t>(l)] *
                       projected[static_cast<std::size_t>(n)]);
      }
    }
    out.row(row) = acc.transpose();
  }
  return out;
}

double focal_loss(double pred_prob, int target, double gamma, double alpha_balance) {
  constexpr double kEps = 1e-7;
  const double p = std::clamp(pred_prob, kEps, 1.0 - kEps);
  const double p_t = target == 1 ? p : 1.0 - p;
  const double alpha_t = target == 1 ? alpha_balance : 1.0 - alpha_balance;
  const double modulating = gamma == 0.0 ? 1.0 : std::pow(1.0 - p_t, gamma);
  return -alpha_t * modulating * std::log(p_t);
}

namespace {

double manhattan_sum(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt, bool reversed) {
  double total = 0.0;
  const std::size_t n = gt.size();
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 g = reversed ? gt[n - 1 - j] : gt[j];
    total += std::abs(pred[j].x - g.x) + std::abs(pred[j].y - g.y);
  }
  return total;
}

void require_same_length(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt) {
  require(pred.size() == gt.size(), ErrorCode::LengthMismatch,
          "prediction has " + std::to_string(pred.size()) + " points, gt has " +
              std::to_string(gt.size()));
}

}  // namespace

bool prefers_reversed(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt) {
  require_same_length(pred, gt);
  return manhattan_sum(pred, gt, true) < manhattan_sum(pred, gt, false);
}

double p2p_loss(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt) {
  require_same_length(pred, gt);
  return std::min(manhattan_sum(pred, gt, false), manhattan_sum(pred, gt, true));
}

DirLoss dir_loss(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt) {
  require_same_length(pred, gt);
  require(pred.size() >= 2, ErrorCode::InvalidArgument, "direction loss needs >= 2 points");
  const bool reversed = prefers_reversed(pred, gt);
  const std::size_t n = gt.size();
  auto gt_at = [&](std::size_t j) { return reversed ? gt[n - 1 - j] : gt[j]; };
  DirLoss out;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const Vec2 e_pred = pred[j + 1] - pred[j];
    const Vec2 e_gt = gt_at(j + 1) - gt_at(j);
    const double norms = norm(e_pred) * norm(e_gt);
    if (norms == 0.0) {
      ++out.skipped_edges;
      continue;
    }
    out.value += dot(e_pred, e_gt) / norms;
  }
  return out;
}

}  // namespace sdmapkit::encoder
