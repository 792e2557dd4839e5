#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "sdmapkit/vec.hpp"

namespace sdmapkit::encoder {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Fully connected layers with ReLU between consecutive layers (not after the last).
struct MlpParams {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  /// Throws DimensionMismatch when layer shapes do not chain.
  void validate() const;
  Vector forward(const Vector& x) const;
};

/// Per-node EdgeConv over a symmetric boolean adjacency:
///   out_i = 1/|N(i)| * sum_{j in N(i)} MLP([x_i, x_j - x_i])
/// Nodes without neighbours get a zero row. The MLP must have exactly two
/// layers and input width 2F. Neighbours are visited in ascending index order.
Matrix edge_conv(const Matrix& node_features, const Matrix& adjacency, const MlpParams& mlp);

/// Weights for the two scene-graph propagation steps.
///   w_cc: one F_c x F_c matrix per connection mode {successor, predecessor, self}.
///   w_ct: one F_c x F_t' matrix per traffic-element class (F_t' = f_proj output width).
///   s_t:  |classes| x K classification scores in [0, 1].
struct SgnnWeights {
  std::vector<Matrix> w_cc;
  std::vector<Matrix> w_ct;
  double alpha = 1.0;
  double beta = 1.0;
  Matrix s_t;
};

/// Centerline-centerline propagation. With T = stack(A, A^T, I):
///   out_m = sum_{n in N(m)} sum_l alpha * T(l, m, n) * W_CC(l) * q_n
/// where N(m) are the n with any nonzero T(., m, n). Rows of `queries` are q_m.
Matrix sgnn_cc_propagate(const Matrix& queries, const Matrix& a_cc, const SgnnWeights& weights);

/// Centerline-traffic propagation:
///   out_m = sum_{n : A_CT(m,n) > 0} sum_l beta * S_T(l, n) * A_CT(m, n) * W_CT(l) * f_proj(t_n)
/// Rows of `traffic_queries` are t_n; the result has one row per centerline.
Matrix sgnn_ct_propagate(const Matrix& traffic_queries, const Matrix& a_ct,
                         const SgnnWeights& weights, const MlpParams& f_proj);

/// Binary focal loss -alpha_t (1 - p_t)^gamma log(p_t); p clamped to [1e-7, 1 - 1e-7].
/// alpha_t is alpha_balance for target 1 and 1 - alpha_balance for target 0.
double focal_loss(double pred_prob, int target, double gamma, double alpha_balance);

/// True when comparing `pred` against reversed `gt` gives the smaller summed
/// Manhattan distance (ties keep the forward order).
bool prefers_reversed(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt);

/// Summed Manhattan distance over corresponding waypoints, taking the better of
/// the forward and reversed gt order. Throws LengthMismatch for unequal counts.
double p2p_loss(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt);

struct DirLoss {
  double value = 0.0;
  std::size_t skipped_edges = 0;  // zero-length edges left out of the sum
};

/// Sum of cosine similarities between corresponding edges, using the gt
/// orientation chosen by p2p_loss. Not negated.
DirLoss dir_loss(const std::vector<Vec2>& pred, const std::vector<Vec2>& gt);

}  // namespace sdmapkit::encoder
