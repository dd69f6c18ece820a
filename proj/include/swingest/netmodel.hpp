#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace swingest {

/// A transmission line between two buses. Bus numbers are 1-based.
struct Edge {
  int from = 0;
  int to = 0;
  double beta = 0.0;  // susceptance weight, per-unit
};

/// Undirected weighted network with an ordered set of generator buses.
struct NetworkTopology {
  int n_buses = 0;
  std::vector<Edge> edges;
  std::vector<int> generator_buses;
};

/// Weighted graph Laplacian with the bus number of every row/column.
struct Laplacian {
  Eigen::MatrixXd matrix;
  std::vector<int> node_labels;

  [[nodiscard]] Eigen::Index size() const { return matrix.rows(); }
};

/// Throws InvalidTopology naming the first offending edge or bus.
void validate(const NetworkTopology& topology);

/// [H]_ij = -beta_ij on edges, [H]_ii = sum_j beta_ij. Labels are 1..n_buses.
[[nodiscard]] Laplacian build_laplacian(const NetworkTopology& topology);

/// Schur complement H_kk - H_ke H_ee^-1 H_ek onto the buses in `keep`, in
/// the order given. Throws SingularInteriorBlock when the eliminated block
/// is numerically singular (reciprocal condition below 1e-12), which
/// happens when some eliminated buses form a component of their own.
[[nodiscard]] Laplacian kron_reduce(const Laplacian& lap, std::span<const int> keep);

struct LaplacianCheck {
  double max_asymmetry = 0.0;
  double max_row_sum = 0.0;
  double max_off_diagonal = 0.0;  // most positive off-diagonal entry
  double min_eigenvalue = 0.0;

  [[nodiscard]] bool valid(double tol = 1e-9) const {
    return max_asymmetry <= tol && max_row_sum <= tol && max_off_diagonal <= 1e-12 && min_eigenvalue >= -tol;
  }
};

[[nodiscard]] LaplacianCheck check_laplacian(const Eigen::MatrixXd& matrix);

}  // namespace swingest
