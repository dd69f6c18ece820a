#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "swingest/dynamics.hpp"
#include "swingest/netmodel.hpp"

namespace swingest {

enum class Method { Unconstrained, Constrained, PerNode, Naive };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

/// Stacked regression for the structure-preserving estimator. Block row k
/// (rows k*N .. k*N+N-1, k = 0..T-2) is
///   [Diag(omega[k+1] - omega[k]) | ts Diag(omega[k])],
/// and the matching target block is -ts H delta[k], so that
///   w [m; d] - target = stacked r[k].
struct DataMatrixPair {
  Eigen::MatrixXd w;
  Eigen::VectorXd target;
  Eigen::Index nodes = 0;
  Eigen::Index steps = 0;  // T, number of samples in the source trajectory
  double ts = 0.0;
  std::uint64_t seed = 0;
};

struct Diagnostics {
  double objective = 0.0;  // squared residual norm of the fitted model
  Eigen::Index rank = 0;
  bool full_rank = false;
  std::vector<Eigen::Index> active_lower;  // 0-based d indices held at 0
  std::vector<Eigen::Index> active_upper;  // 0-based d indices held at d_max
  Eigen::VectorXd kkt_gradient;            // constrained only, over [m; d]
  Eigen::VectorXd row_fit_residuals;       // naive only, per generator
};

struct EstimationResult {
  Eigen::VectorXd m_hat;
  Eigen::VectorXd d_hat;
  Method method = Method::Unconstrained;
  Diagnostics diagnostics;
  Eigen::Index steps = 0;
  double ts = 0.0;
  std::uint64_t seed = 0;
};

[[nodiscard]] DataMatrixPair build_data_matrix(const Trajectory& trajectory, const Laplacian& laplacian);

/// Minimum-residual solution of w [m; d] = target by column-pivoted QR.
/// Throws RankDeficient when rank(w) < 2N.
[[nodiscard]] EstimationResult estimate_unconstrained(const DataMatrixPair& pair);

/// Closed-form estimate at one node (0-based), using only that node's
/// frequencies and the angles of its neighbours:
///   m_i = -ts sum_j H_ij sum_k (c2/c3 dw_i[k] - c1/c3 w_i[k]) delta_j[k]
///   d_i =   - sum_j H_ij sum_k (c0/c3 w_i[k] - c1/c3 dw_i[k]) delta_j[k]
/// with c0 = sum dw_i^2, c1 = sum dw_i w_i, c2 = sum w_i^2, c3 = c0 c2 - c1^2
/// and k = 0..T-2. At ts = 1 this is the textbook per-node formula.
[[nodiscard]] std::pair<double, double> estimate_per_node(const Trajectory& trajectory, const Laplacian& laplacian,
                                                          Eigen::Index node);

/// estimate_per_node over every node, packaged as a result.
[[nodiscard]] EstimationResult estimate_per_node_all(const Trajectory& trajectory, const Laplacian& laplacian);

/// Structure-preserving estimate with m_i = 0 for i in `droop_nodes`
/// (0-based; enforced by column elimination) and 0 <= d_i <= d_max.
[[nodiscard]] EstimationResult estimate_constrained(const DataMatrixPair& pair,
                                                    const std::vector<Eigen::Index>& droop_nodes,
                                                    double d_max = std::numeric_limits<double>::infinity());

/// State-space baseline: least-squares A_d on z[k+1] = A_d z[k], then per
/// generator a scalar fit of row i of the bottom-left block against
/// -ts H_{i,.} (slope 1/m_i) and d_i from [A_d]_{N+i,N+i} = 1 - ts d_i / m_i.
[[nodiscard]] EstimationResult estimate_naive(const Trajectory& trajectory, const Laplacian& laplacian);

struct EstimatorSettings {
  Method method = Method::Unconstrained;
  std::vector<Eigen::Index> droop_nodes;  // 0-based
  double d_max = std::numeric_limits<double>::infinity();
};

/// Dispatches on settings.method.
[[nodiscard]] EstimationResult estimate(const Trajectory& trajectory, const Laplacian& laplacian,
                                        const EstimatorSettings& settings);

}  // namespace swingest
