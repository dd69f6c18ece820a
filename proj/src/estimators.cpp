#include "swingest/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "swingest/bounded_lsq.hpp"
#include "swingest/errors.hpp"

namespace swingest {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Unconstrained: return "unconstrained";
    case Method::Constrained: return "constrained";
    case Method::PerNode: return "per-node";
    case Method::Naive: return "naive";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  if (name == "unconstrained") return Method::Unconstrained;
  if (name == "constrained") return Method::Constrained;
  if (name == "per-node" || name == "per_node") return Method::PerNode;
  if (name == "naive") return Method::Naive;
  fail(ErrorCode::ValidationError, "unknown estimator method '" + std::string(name) + "'");
}

namespace {

void check_shapes(const Trajectory& traj, const Laplacian& lap) {
  const Eigen::Index n = traj.nodes();
  require(traj.steps() >= 2, ErrorCode::InvalidArgument, "trajectory needs at least 2 samples");
  require(traj.omega.rows() == traj.steps() && traj.omega.cols() == n, ErrorCode::DimensionMismatch,
          "delta and omega shapes differ");
  require(lap.matrix.rows() == n && lap.matrix.cols() == n, ErrorCode::DimensionMismatch,
          "laplacian does not match trajectory width");
}

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_revealing_qr(const Eigen::MatrixXd& a) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.rows(), a.cols());
  qr.setThreshold(static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon());
  qr.compute(a);
  return qr;
}

EstimationResult make_result(Method method, const DataMatrixPair& pair) {
  EstimationResult r;
  r.method = method;
  r.steps = pair.steps;
  r.ts = pair.ts;
  r.seed = pair.seed;
  return r;
}

}  // namespace

DataMatrixPair build_data_matrix(const Trajectory& trajectory, const Laplacian& laplacian) {
  check_shapes(trajectory, laplacian);
  const Eigen::Index n = trajectory.nodes();
  const Eigen::Index rows = trajectory.steps() - 1;
  const double ts = trajectory.ts;

  DataMatrixPair pair;
  pair.nodes = n;
  pair.steps = trajectory.steps();
  pair.ts = ts;
  pair.seed = trajectory.seed;
  pair.w = Eigen::MatrixXd::Zero(rows * n, 2 * n);
  pair.target.resize(rows * n);

  const Eigen::MatrixXd flow = trajectory.delta.topRows(rows) * laplacian.matrix.transpose();
  for (Eigen::Index k = 0; k < rows; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index row = k * n + i;
      pair.w(row, i) = trajectory.omega(k + 1, i) - trajectory.omega(k, i);
      pair.w(row, n + i) = ts * trajectory.omega(k, i);
      pair.target(row) = -ts * flow(k, i);
    }
  }
  return pair;
}

EstimationResult estimate_unconstrained(const DataMatrixPair& pair) {
  const Eigen::Index n = pair.nodes;
  require(pair.w.cols() == 2 * n && pair.w.rows() == pair.target.size(), ErrorCode::DimensionMismatch,
          "malformed data matrix");
  const auto qr = rank_revealing_qr(pair.w);
  EstimationResult r = make_result(Method::Unconstrained, pair);
  r.diagnostics.rank = qr.rank();
  r.diagnostics.full_rank = qr.rank() == 2 * n;
  require(pair.w.rows() >= 2 * n && r.diagnostics.full_rank, ErrorCode::RankDeficient,
          "data matrix has numerical rank " + std::to_string(qr.rank()) + " < " + std::to_string(2 * n) +
              "; the trajectory does not excite every generator");
  const Eigen::VectorXd x = qr.solve(pair.target);
  r.m_hat = x.head(n);
  r.d_hat = x.tail(n);
  r.diagnostics.objective = (pair.w * x - pair.target).squaredNorm();
  return r;
}

std::pair<double, double> estimate_per_node(const Trajectory& trajectory, const Laplacian& laplacian,
                                            Eigen::Index node) {
  check_shapes(trajectory, laplacian);
  const Eigen::Index n = trajectory.nodes();
  require(node >= 0 && node < n, ErrorCode::InvalidArgument, "node index out of range");
  const Eigen::Index rows = trajectory.steps() - 1;
  const double ts = trajectory.ts;

  const Eigen::VectorXd w = trajectory.omega.col(node).head(rows);
  const Eigen::VectorXd dw = trajectory.omega.col(node).tail(rows) - w;

  const double c0 = dw.squaredNorm();
  const double c1 = dw.dot(w);
  const double c2 = w.squaredNorm();
  const double c3 = c0 * c2 - c1 * c1;
  if (!(std::abs(c3) >= 1e-14 * c0 * c2) || c3 == 0.0)
    fail(ErrorCode::DegenerateNode, "generator " + std::to_string(node + 1) +
                                        ": frequency and its increment are collinear (c3 = " + std::to_string(c3) +
                                        ")");

  const Eigen::VectorXd inertia_weight = (c2 / c3) * dw - (c1 / c3) * w;
  const Eigen::VectorXd damping_weight = (c0 / c3) * w - (c1 / c3) * dw;

  double m_hat = 0.0;
  double d_hat = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = laplacian.matrix(node, j);
    if (h == 0.0) continue;
    const auto angle = trajectory.delta.col(j).head(rows);
    m_hat -= h * inertia_weight.dot(angle);
    d_hat -= h * damping_weight.dot(angle);
  }
  return {ts * m_hat, d_hat};
}

EstimationResult estimate_per_node_all(const Trajectory& trajectory, const Laplacian& laplacian) {
  check_shapes(trajectory, laplacian);
  const Eigen::Index n = trajectory.nodes();
  EstimationResult r;
  r.method = Method::PerNode;
  r.steps = trajectory.steps();
  r.ts = trajectory.ts;
  r.seed = trajectory.seed;
  r.m_hat.resize(n);
  r.d_hat.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) std::tie(r.m_hat(i), r.d_hat(i)) = estimate_per_node(trajectory, laplacian, i);
  r.diagnostics.rank = 2 * n;
  r.diagnostics.full_rank = true;
  return r;
}

EstimationResult estimate_constrained(const DataMatrixPair& pair, const std::vector<Eigen::Index>& droop_nodes,
                                      double d_max) {
  const Eigen::Index n = pair.nodes;
  require(pair.w.cols() == 2 * n && pair.w.rows() == pair.target.size(), ErrorCode::DimensionMismatch,
          "malformed data matrix");
  require(d_max > 0.0, ErrorCode::InvalidArgument, "d_max must be positive");

  std::vector<bool> pinned(static_cast<std::size_t>(n), false);
  for (Eigen::Index i : droop_nodes) {
    require(i >= 0 && i < n, ErrorCode::InvalidArgument, "droop node index out of range");
    pinned[static_cast<std::size_t>(i)] = true;
  }

  // Columns kept after eliminating m_i, i in the droop set: free m's first,
  // then every d.
  std::vector<Eigen::Index> columns;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!pinned[static_cast<std::size_t>(i)]) columns.push_back(i);
  const auto n_free_m = static_cast<Eigen::Index>(columns.size());
  for (Eigen::Index i = 0; i < n; ++i) columns.push_back(n + i);
  const auto cols = static_cast<Eigen::Index>(columns.size());

  Eigen::VectorXd lower(cols);
  Eigen::VectorXd upper(cols);
  const double inf = std::numeric_limits<double>::infinity();
  lower.head(n_free_m).setConstant(-inf);
  upper.head(n_free_m).setConstant(inf);
  lower.tail(n).setZero();
  upper.tail(n).setConstant(d_max);

  const Eigen::MatrixXd reduced = pair.w(Eigen::all, columns);
  const BoundedLsqResult sol = solve_bounded_least_squares(reduced, pair.target, lower, upper);

  EstimationResult r = make_result(Method::Constrained, pair);
  r.m_hat = Eigen::VectorXd::Zero(n);
  r.d_hat = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const Eigen::Index j = columns[static_cast<std::size_t>(c)];
    if (j < n) r.m_hat(j) = sol.x(c);
    else r.d_hat(j - n) = sol.x(c);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const BoundState s = sol.state[static_cast<std::size_t>(n_free_m + i)];
    if (s == BoundState::AtLower) r.diagnostics.active_lower.push_back(i);
    if (s == BoundState::AtUpper) r.diagnostics.active_upper.push_back(i);
  }
  const Eigen::VectorXd x = (Eigen::VectorXd(2 * n) << r.m_hat, r.d_hat).finished();
  r.diagnostics.kkt_gradient = pair.w.transpose() * (pair.w * x - pair.target);
  r.diagnostics.objective = sol.objective;
  r.diagnostics.rank = cols;
  r.diagnostics.full_rank = true;
  return r;
}

EstimationResult estimate_naive(const Trajectory& trajectory, const Laplacian& laplacian) {
  check_shapes(trajectory, laplacian);
  const Eigen::Index n = trajectory.nodes();
  const Eigen::Index rows = trajectory.steps() - 1;
  const double ts = trajectory.ts;
  require(rows >= 2 * n, ErrorCode::RankDeficient,
          std::to_string(rows) + " transitions cannot determine a " + std::to_string(2 * n) + "-state transition matrix");

  Eigen::MatrixXd z(trajectory.steps(), 2 * n);
  z << trajectory.delta, trajectory.omega;
  const auto qr = rank_revealing_qr(z.topRows(rows));
  require(qr.rank() == 2 * n, ErrorCode::RankDeficient,
          "state regression has numerical rank " + std::to_string(qr.rank()) + " < " + std::to_string(2 * n));
  // Solves z[0..T-2] A_d^T = z[1..T-1].
  const Eigen::MatrixXd transition = qr.solve(z.bottomRows(rows)).transpose();

  EstimationResult r;
  r.method = Method::Naive;
  r.steps = trajectory.steps();
  r.ts = ts;
  r.seed = trajectory.seed;
  r.m_hat.resize(n);
  r.d_hat.resize(n);
  r.diagnostics.rank = qr.rank();
  r.diagnostics.full_rank = true;
  r.diagnostics.row_fit_residuals.resize(n);
  r.diagnostics.objective = (z.topRows(rows) * transition.transpose() - z.bottomRows(rows)).squaredNorm();

  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd coupling = -ts * laplacian.matrix.row(i).transpose();
    const Eigen::VectorXd fitted_row = transition.block(n + i, 0, 1, n).transpose();
    const double norm2 = coupling.squaredNorm();
    require(norm2 > 0.0, ErrorCode::ExtractionUnstable,
            "generator " + std::to_string(i + 1) + " has no network coupling to fit against");
    const double slope = coupling.dot(fitted_row) / norm2;  // estimates 1 / m_i
    require(std::abs(slope) > 1e-12, ErrorCode::ExtractionUnstable,
            "generator " + std::to_string(i + 1) + ": fitted inverse inertia is zero");
    r.m_hat(i) = 1.0 / slope;
    r.d_hat(i) = (1.0 - transition(n + i, n + i)) * r.m_hat(i) / ts;
    r.diagnostics.row_fit_residuals(i) = (fitted_row - slope * coupling).norm();
  }
  return r;
}

EstimationResult estimate(const Trajectory& trajectory, const Laplacian& laplacian,
                          const EstimatorSettings& settings) {
  switch (settings.method) {
    case Method::Unconstrained: return estimate_unconstrained(build_data_matrix(trajectory, laplacian));
    case Method::Constrained:
      return estimate_constrained(build_data_matrix(trajectory, laplacian), settings.droop_nodes, settings.d_max);
    case Method::PerNode: return estimate_per_node_all(trajectory, laplacian);
    case Method::Naive: return estimate_naive(trajectory, laplacian);
  }
  fail(ErrorCode::InvalidArgument, "unknown method");
}

}  // namespace swingest
