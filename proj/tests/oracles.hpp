#pragma once

// Reference computations used only by tests. Each one takes a different
// numerical route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "swingest/dynamics.hpp"
#include "swingest/netmodel.hpp"

namespace oracle {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline Eigen::VectorXd uniform_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

// Random connected graph: a random spanning tree plus extra edges.
inline swingest::NetworkTopology random_connected_graph(std::mt19937_64& rng, int n, double extra_prob = 0.3) {
  swingest::NetworkTopology topo;
  topo.n_buses = n;
  std::vector<std::vector<bool>> used(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
  auto add = [&](int a, int b) {
    if (a == b || used[a][b]) return;
    used[a][b] = used[b][a] = true;
    topo.edges.push_back({a + 1, b + 1, uniform(rng, 0.2, 5.0)});
  };
  for (int i = 1; i < n; ++i) add(i, static_cast<int>(rng() % static_cast<std::uint64_t>(i)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uniform(rng, 0.0, 1.0) < extra_prob) add(i, j);
  for (int i = 1; i <= n; ++i) topo.generator_buses.push_back(i);
  return topo;
}

// Schur complement through an explicit LU inverse, indices 0-based.
inline Eigen::MatrixXd schur(const Eigen::MatrixXd& h, const std::vector<int>& keep) {
  std::vector<int> drop;
  for (int i = 0; i < h.rows(); ++i)
    if (std::find(keep.begin(), keep.end(), i) == keep.end()) drop.push_back(i);
  const auto k = static_cast<Eigen::Index>(keep.size());
  const auto e = static_cast<Eigen::Index>(drop.size());
  Eigen::MatrixXd hkk(k, k), hke(k, e), hee(e, e);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) hkk(a, b) = h(keep[a], keep[b]);
    for (Eigen::Index b = 0; b < e; ++b) hke(a, b) = h(keep[a], drop[b]);
  }
  for (Eigen::Index a = 0; a < e; ++a)
    for (Eigen::Index b = 0; b < e; ++b) hee(a, b) = h(drop[a], drop[b]);
  if (e == 0) return hkk;
  return hkk - hke * hee.fullPivLu().inverse() * hke.transpose();
}

// z[k+1] = (I + ts E^-1 A) z[k] by repeated dense products.
inline Eigen::MatrixXd dense_recurrence(const swingest::DescriptorSystem& sys, const Eigen::VectorXd& z0,
                                        Eigen::Index steps) {
  const Eigen::Index n2 = z0.size();
  const Eigen::MatrixXd ad =
      Eigen::MatrixXd::Identity(n2, n2) + sys.ts * sys.E().fullPivLu().solve(sys.A());
  Eigen::MatrixXd out(steps, n2);
  Eigen::VectorXd z = z0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    out.row(k) = z.transpose();
    z = ad * z;
  }
  return out;
}

inline Eigen::VectorXd svd_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  return a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
}

// min ||W x - t||^2 with x = [m; d], m_i = 0 on `droop`, 0 <= d <= d_max.
// Enumerates every lower/free/upper pattern on d, solves each through the
// normal equations, keeps the best feasible point.
inline Eigen::VectorXd brute_force_qp(const Eigen::MatrixXd& w, const Eigen::VectorXd& t,
                                      const std::vector<Eigen::Index>& droop, double d_max) {
  const Eigen::Index n = w.cols() / 2;
  const bool bounded = std::isfinite(d_max);
  const int states = bounded ? 3 : 2;
  long long patterns = 1;
  for (Eigen::Index i = 0; i < n; ++i) patterns *= states;

  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = Eigen::VectorXd::Zero(2 * n);
  for (long long p = 0; p < patterns; ++p) {
    Eigen::VectorXd fixed = Eigen::VectorXd::Constant(2 * n, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index i : droop) fixed(i) = 0.0;
    long long code = p;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int s = static_cast<int>(code % states);
      code /= states;
      if (s == 1) fixed(n + i) = 0.0;
      if (s == 2) fixed(n + i) = d_max;
    }
    std::vector<Eigen::Index> free_cols;
    Eigen::VectorXd rhs = t;
    for (Eigen::Index c = 0; c < 2 * n; ++c) {
      if (std::isnan(fixed(c))) free_cols.push_back(c);
      else rhs -= w.col(c) * fixed(c);
    }
    Eigen::VectorXd x = fixed;
    if (!free_cols.empty()) {
      Eigen::MatrixXd wf(w.rows(), static_cast<Eigen::Index>(free_cols.size()));
      for (std::size_t j = 0; j < free_cols.size(); ++j) wf.col(static_cast<Eigen::Index>(j)) = w.col(free_cols[j]);
      const Eigen::VectorXd xf = (wf.transpose() * wf).ldlt().solve(wf.transpose() * rhs);
      for (std::size_t j = 0; j < free_cols.size(); ++j) x(free_cols[j]) = xf(static_cast<Eigen::Index>(j));
    }
    bool feasible = true;
    for (Eigen::Index i = 0; i < n; ++i)
      if (x(n + i) < -1e-12 || (bounded && x(n + i) > d_max + 1e-12)) feasible = false;
    if (!feasible) continue;
    const double obj = (w * x - t).squaredNorm();
    if (obj < best) {
      best = obj;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace oracle
