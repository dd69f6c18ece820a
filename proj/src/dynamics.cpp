#include "swingest/dynamics.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "swingest/errors.hpp"
#include "swingest/random.hpp"

namespace swingest {

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Synchronous: return "synchronous";
    case GeneratorKind::Vsm: return "vsm";
    case GeneratorKind::Droop: return "droop";
  }
  return "unknown";
}

GeneratorKind generator_kind_from_string(std::string_view name) {
  if (name == "synchronous") return GeneratorKind::Synchronous;
  if (name == "vsm") return GeneratorKind::Vsm;
  if (name == "droop") return GeneratorKind::Droop;
  fail(ErrorCode::ValidationError, "unknown generator kind '" + std::string(name) + "'");
}

std::vector<Eigen::Index> GeneratorParams::droop_nodes() const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < kind.size(); ++i)
    if (kind[i] == GeneratorKind::Droop) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

void validate(const GeneratorParams& params) {
  const Eigen::Index n = params.m.size();
  require(params.d.size() == n && static_cast<Eigen::Index>(params.kind.size()) == n, ErrorCode::DimensionMismatch,
          "m, d and kind must have the same length");
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string node = "generator " + std::to_string(i + 1);
    require(std::isfinite(params.d(i)) && params.d(i) > 0.0, ErrorCode::NonpositiveDamping,
            node + ": damping must be positive");
    require(std::isfinite(params.m(i)) && params.m(i) >= 0.0, ErrorCode::ValidationError,
            node + ": inertia must be nonnegative");
    const bool droop = params.kind[static_cast<std::size_t>(i)] == GeneratorKind::Droop;
    require(droop == (params.m(i) == 0.0), ErrorCode::ValidationError,
            node + ": inertia must be zero exactly for droop generators");
  }
}

Eigen::MatrixXd DescriptorSystem::E() const {
  const Eigen::Index n = size();
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  e.topLeftCorner(n, n).setIdentity();
  e.bottomRightCorner(n, n) = params.m.asDiagonal();
  return e;
}

Eigen::MatrixXd DescriptorSystem::A() const {
  const Eigen::Index n = size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n).setIdentity();
  a.bottomLeftCorner(n, n) = -laplacian.matrix;
  a.bottomRightCorner(n, n) = -params.d.asDiagonal().toDenseMatrix();
  return a;
}

Eigen::MatrixXd DescriptorSystem::noise_covariance() const {
  return (ts * sigma.array().square()).matrix().asDiagonal();
}

bool DescriptorSystem::singular() const { return (params.m.array() == 0.0).any(); }

DescriptorSystem assemble_descriptor(Laplacian laplacian, GeneratorParams params, Eigen::VectorXd sigma, double ts) {
  validate(params);
  const Eigen::Index n = params.size();
  require(laplacian.matrix.rows() == n && laplacian.matrix.cols() == n, ErrorCode::DimensionMismatch,
          "laplacian is " + std::to_string(laplacian.matrix.rows()) + "x" + std::to_string(laplacian.matrix.cols()) +
              " but there are " + std::to_string(n) + " generators");
  require(sigma.size() == n, ErrorCode::DimensionMismatch, "sigma has wrong length");
  require((sigma.array() >= 0.0).all() && sigma.allFinite(), ErrorCode::ValidationError, "sigma must be >= 0");
  require(std::isfinite(ts) && ts > 0.0, ErrorCode::ValidationError, "ts must be > 0");
  return DescriptorSystem{std::move(laplacian), std::move(params), std::move(sigma), ts};
}

Trajectory simulate(const DescriptorSystem& system, const Eigen::VectorXd& delta0, const Eigen::VectorXd& omega0,
                    Eigen::Index steps, std::uint64_t seed) {
  const Eigen::Index n = system.size();
  require(steps >= 2, ErrorCode::InvalidArgument, "need at least 2 steps");
  require(delta0.size() == n && omega0.size() == n, ErrorCode::DimensionMismatch, "initial state has wrong length");

  const double ts = system.ts;
  const Eigen::MatrixXd& h = system.laplacian.matrix;
  const Eigen::VectorXd& m = system.params.m;
  const Eigen::VectorXd& d = system.params.d;
  const Eigen::ArrayXd noise_scale = std::sqrt(ts) * system.sigma.array();
  const std::vector<Eigen::Index> droop = system.params.droop_nodes();

  Trajectory traj;
  traj.ts = ts;
  traj.seed = seed;
  traj.delta.resize(steps, n);
  traj.omega.resize(steps, n);
  traj.noise.resize(steps - 1, n);
  traj.delta.row(0) = delta0.transpose();
  traj.omega.row(0) = omega0.transpose();

  GaussianStream rng(seed);
  Eigen::VectorXd r(n);
  Eigen::VectorXd flow(n);
  const auto draw = [&] {
    for (Eigen::Index i = 0; i < n; ++i) r(i) = noise_scale(i) * rng.next();
  };
  const auto solve_algebraic = [&](Eigen::Index k) {
    if (droop.empty()) return;
    flow.noalias() = h * traj.delta.row(k).transpose();
    for (Eigen::Index i : droop) traj.omega(k, i) = (r(i) / ts - flow(i)) / d(i);
  };

  for (Eigen::Index k = 0; k + 1 < steps; ++k) {
    draw();
    solve_algebraic(k);
    traj.noise.row(k) = r.transpose();
    flow.noalias() = h * traj.delta.row(k).transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = traj.omega(k, i);
      traj.delta(k + 1, i) = traj.delta(k, i) + ts * w;
      if (m(i) > 0.0) traj.omega(k + 1, i) = w + (ts * (-flow(i) - d(i) * w) + r(i)) / m(i);
    }
  }
  // The last sample's algebraic rows use one extra draw that is not part of
  // the recorded noise.
  draw();
  solve_algebraic(steps - 1);
  return traj;
}

Eigen::MatrixXd residual(const DescriptorSystem& system, const Trajectory& trajectory) {
  const Eigen::Index n = system.size();
  const Eigen::Index steps = trajectory.steps();
  require(trajectory.nodes() == n && trajectory.omega.rows() == steps && trajectory.omega.cols() == n && steps >= 2,
          ErrorCode::DimensionMismatch, "trajectory does not match system dimension");
  const double ts = system.ts;
  const auto omega_now = trajectory.omega.topRows(steps - 1);
  const auto omega_next = trajectory.omega.bottomRows(steps - 1);
  const auto delta_now = trajectory.delta.topRows(steps - 1);

  Eigen::MatrixXd out = (omega_next - omega_now) * system.params.m.asDiagonal();
  out.noalias() += ts * delta_now * system.laplacian.matrix.transpose();
  out += ts * omega_now * system.params.d.asDiagonal();
  return out;
}

}  // namespace swingest
