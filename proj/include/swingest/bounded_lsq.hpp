#pragma once

#include <vector>

#include <Eigen/Dense>

namespace swingest {

enum class BoundState { Free, AtLower, AtUpper };

struct BoundedLsqResult {
  Eigen::VectorXd x;
  std::vector<BoundState> state;
  Eigen::VectorXd gradient;  // A^T (A x - b) at the solution
  double objective = 0.0;    // ||A x - b||^2
  int iterations = 0;
};

/// Minimizes ||A x - b||^2 subject to lower <= x <= upper by a primal
/// active-set method. Bounds may be infinite. Every subproblem is an
/// unconstrained least-squares solve over the free columns by column-pivoted
/// Householder QR.
///
/// Throws RankDeficient if a subproblem's free columns are numerically rank
/// deficient (threshold max(rows, cols) * eps * |R_00|).
[[nodiscard]] BoundedLsqResult solve_bounded_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                                           const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// Least-squares solution of A x = b by column-pivoted QR with the same rank
/// threshold. Throws RankDeficient when rank(A) < cols(A).
[[nodiscard]] Eigen::VectorXd solve_full_rank_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace swingest
