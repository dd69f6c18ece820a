#include "swingest/bounded_lsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swingest/errors.hpp"

namespace swingest {

namespace {

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& a) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.rows(), a.cols());
  const auto dim = static_cast<double>(std::max(a.rows(), a.cols()));
  qr.setThreshold(dim * std::numeric_limits<double>::epsilon());
  qr.compute(a);
  return qr;
}

}  // namespace

Eigen::VectorXd solve_full_rank_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  require(a.rows() == b.size(), ErrorCode::DimensionMismatch, "rhs length does not match matrix rows");
  if (a.cols() == 0) return Eigen::VectorXd(0);
  require(a.rows() >= a.cols(), ErrorCode::RankDeficient,
          std::to_string(a.rows()) + " equations for " + std::to_string(a.cols()) + " unknowns");
  const auto qr = factorize(a);
  require(qr.rank() == a.cols(), ErrorCode::RankDeficient,
          "numerical rank " + std::to_string(qr.rank()) + " < " + std::to_string(a.cols()));
  return qr.solve(b);
}

BoundedLsqResult solve_bounded_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const Eigen::Index n = a.cols();
  require(a.rows() == b.size() && lower.size() == n && upper.size() == n, ErrorCode::DimensionMismatch,
          "bounded least squares dimensions disagree");
  for (Eigen::Index j = 0; j < n; ++j)
    require(lower(j) <= upper(j), ErrorCode::InvalidArgument, "empty bound interval for variable " + std::to_string(j));

  BoundedLsqResult res;
  res.state.assign(static_cast<std::size_t>(n), BoundState::Free);
  res.x = Eigen::VectorXd::Zero(n);
  // Feasible start: the point of each box closest to the origin.
  for (Eigen::Index j = 0; j < n; ++j) res.x(j) = std::clamp(0.0, lower(j), upper(j));

  const auto state = [&](Eigen::Index j) -> BoundState& { return res.state[static_cast<std::size_t>(j)]; };
  const int max_iterations = 10 * static_cast<int>(n) + 100;
  // Multiplier tolerance, relative to a bound on |A^T b|.
  const double scale = std::max(a.norm() * b.norm(), std::numeric_limits<double>::min());

  for (res.iterations = 1; res.iterations <= max_iterations; ++res.iterations) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < n; ++j)
      if (state(j) == BoundState::Free) free.push_back(j);

    Eigen::VectorXd rhs = b;
    for (Eigen::Index j = 0; j < n; ++j)
      if (state(j) != BoundState::Free) rhs -= a.col(j) * res.x(j);
    const Eigen::VectorXd z = solve_full_rank_least_squares(a(Eigen::all, free), rhs);

    // Longest step from x_free toward z that stays inside the box.
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (std::size_t f = 0; f < free.size(); ++f) {
      const Eigen::Index j = free[f];
      const double from = res.x(j);
      const double to = z(static_cast<Eigen::Index>(f));
      double step = 1.0;
      if (to < lower(j)) step = (lower(j) - from) / (to - from);
      else if (to > upper(j)) step = (upper(j) - from) / (to - from);
      else continue;
      if (step < alpha) {
        alpha = step;
        blocking = j;
      }
    }

    for (std::size_t f = 0; f < free.size(); ++f) {
      const Eigen::Index j = free[f];
      res.x(j) += alpha * (z(static_cast<Eigen::Index>(f)) - res.x(j));
    }

    if (blocking >= 0) {
      // Pin every variable that reached a bound at this step.
      for (Eigen::Index j : free) {
        const double span = std::max(1.0, std::abs(res.x(j)));
        if (res.x(j) <= lower(j) + 1e-14 * span) {
          res.x(j) = lower(j);
          state(j) = BoundState::AtLower;
        } else if (res.x(j) >= upper(j) - 1e-14 * span) {
          res.x(j) = upper(j);
          state(j) = BoundState::AtUpper;
        }
      }
      if (state(blocking) == BoundState::Free) {
        const double mid = 0.5 * (lower(blocking) + upper(blocking));
        state(blocking) = res.x(blocking) < mid ? BoundState::AtLower : BoundState::AtUpper;
        res.x(blocking) = state(blocking) == BoundState::AtLower ? lower(blocking) : upper(blocking);
      }
      continue;
    }

    // Subproblem optimum is feasible. Check multiplier signs on the bound
    // set: at a lower bound the gradient must be >= 0, at an upper <= 0.
    res.gradient = a.transpose() * (a * res.x - b);
    Eigen::Index release = -1;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double violation = 0.0;
      if (state(j) == BoundState::AtLower) violation = -res.gradient(j);
      else if (state(j) == BoundState::AtUpper) violation = res.gradient(j);
      if (violation > 1e-12 * scale && violation > worst) {
        worst = violation;
        release = j;
      }
    }
    if (release < 0) {
      res.objective = (a * res.x - b).squaredNorm();
      return res;
    }
    state(release) = BoundState::Free;
  }
  fail(ErrorCode::RankDeficient, "active-set iteration did not terminate");
}

}  // namespace swingest
