#include "swingest/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>

#include "swingest/errors.hpp"

namespace swingest {

namespace {

std::string describe(const Edge& e, std::size_t index) {
  return "edge #" + std::to_string(index + 1) + " (" + std::to_string(e.from) + ", " + std::to_string(e.to) +
         ", beta=" + std::to_string(e.beta) + ")";
}

}  // namespace

void validate(const NetworkTopology& topology) {
  require(topology.n_buses > 0, ErrorCode::InvalidTopology, "n_buses must be positive");

  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < topology.edges.size(); ++k) {
    const Edge& e = topology.edges[k];
    const auto in_range = [&](int bus) { return bus >= 1 && bus <= topology.n_buses; };
    require(in_range(e.from) && in_range(e.to), ErrorCode::InvalidTopology, describe(e, k) + ": bus index out of range");
    require(e.from != e.to, ErrorCode::InvalidTopology, describe(e, k) + ": self-loop");
    require(std::isfinite(e.beta) && e.beta > 0.0, ErrorCode::InvalidTopology,
            describe(e, k) + ": susceptance must be positive");
    const auto key = std::minmax(e.from, e.to);
    require(seen.insert(key).second, ErrorCode::InvalidTopology, describe(e, k) + ": duplicate edge");
  }

  require(!topology.generator_buses.empty(), ErrorCode::InvalidTopology, "generator_buses is empty");
  std::set<int> gens;
  for (int bus : topology.generator_buses) {
    require(bus >= 1 && bus <= topology.n_buses, ErrorCode::InvalidTopology,
            "generator bus " + std::to_string(bus) + " out of range");
    require(gens.insert(bus).second, ErrorCode::InvalidTopology,
            "generator bus " + std::to_string(bus) + " listed twice");
  }
}

Laplacian build_laplacian(const NetworkTopology& topology) {
  validate(topology);
  const Eigen::Index n = topology.n_buses;
  Laplacian lap;
  lap.matrix = Eigen::MatrixXd::Zero(n, n);
  lap.node_labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) lap.node_labels[static_cast<std::size_t>(i)] = static_cast<int>(i + 1);

  for (const Edge& e : topology.edges) {
    const Eigen::Index i = e.from - 1;
    const Eigen::Index j = e.to - 1;
    lap.matrix(i, j) -= e.beta;
    lap.matrix(j, i) -= e.beta;
    lap.matrix(i, i) += e.beta;
    lap.matrix(j, j) += e.beta;
  }
  return lap;
}

Laplacian kron_reduce(const Laplacian& lap, std::span<const int> keep) {
  const Eigen::Index n = lap.size();
  require(lap.matrix.cols() == n && static_cast<Eigen::Index>(lap.node_labels.size()) == n,
          ErrorCode::DimensionMismatch, "laplacian labels do not match matrix size");
  require(!keep.empty(), ErrorCode::InvalidArgument, "keep set is empty");

  std::vector<Eigen::Index> kept;
  std::vector<bool> is_kept(static_cast<std::size_t>(n), false);
  for (int label : keep) {
    const auto it = std::find(lap.node_labels.begin(), lap.node_labels.end(), label);
    require(it != lap.node_labels.end(), ErrorCode::InvalidArgument,
            "bus " + std::to_string(label) + " is not a node of the laplacian");
    const auto idx = static_cast<Eigen::Index>(it - lap.node_labels.begin());
    require(!is_kept[static_cast<std::size_t>(idx)], ErrorCode::InvalidArgument,
            "bus " + std::to_string(label) + " listed twice in keep set");
    is_kept[static_cast<std::size_t>(idx)] = true;
    kept.push_back(idx);
  }

  std::vector<Eigen::Index> eliminated;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!is_kept[static_cast<std::size_t>(i)]) eliminated.push_back(i);

  Laplacian out;
  out.node_labels.assign(keep.begin(), keep.end());
  const Eigen::MatrixXd h_kk = lap.matrix(kept, kept);
  if (eliminated.empty()) {
    out.matrix = h_kk;
    return out;
  }

  const Eigen::MatrixXd h_ee = lap.matrix(eliminated, eliminated);
  const Eigen::MatrixXd h_ek = lap.matrix(eliminated, kept);
  const Eigen::LLT<Eigen::MatrixXd> llt(h_ee);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12))
    fail(ErrorCode::SingularInteriorBlock,
         "eliminated block is singular; some eliminated buses are disconnected from the kept set");

  out.matrix = h_kk - h_ek.transpose() * llt.solve(h_ek);
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();

  const LaplacianCheck check = check_laplacian(out.matrix);
  if (!(check.max_row_sum < 1e-9 && check.max_off_diagonal <= 1e-12 && check.min_eigenvalue >= -1e-9))
    fail(ErrorCode::SingularInteriorBlock, "reduced matrix is not a valid Laplacian (row sum " +
                                               std::to_string(check.max_row_sum) + ")");
  return out;
}

LaplacianCheck check_laplacian(const Eigen::MatrixXd& matrix) {
  LaplacianCheck c;
  const Eigen::Index n = matrix.rows();
  if (n == 0) return c;
  c.max_asymmetry = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  c.max_row_sum = matrix.rowwise().sum().cwiseAbs().maxCoeff();
  c.max_off_diagonal = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) c.max_off_diagonal = std::max(c.max_off_diagonal, matrix(i, j));
  if (n == 1) c.max_off_diagonal = 0.0;
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  c.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return c;
}

}  // namespace swingest
