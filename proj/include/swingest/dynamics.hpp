#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "swingest/netmodel.hpp"

namespace swingest {

enum class GeneratorKind { Synchronous, Vsm, Droop };

std::string_view to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(std::string_view name);

/// Per-generator inertia m_i (>= 0, zero exactly for droop units) and
/// damping d_i (> 0), per-unit.
struct GeneratorParams {
  Eigen::VectorXd m;
  Eigen::VectorXd d;
  std::vector<GeneratorKind> kind;

  [[nodiscard]] Eigen::Index size() const { return m.size(); }
  /// 0-based indices of droop generators.
  [[nodiscard]] std::vector<Eigen::Index> droop_nodes() const;
};

void validate(const GeneratorParams& params);

/// Swing dynamics in descriptor form
///   E z' = A z + [0; eps],  E = blockdiag(I, M),  A = [[0, I], [-H, -D]]
/// with z = [delta; omega]. E and A are built on demand from the stored
/// Laplacian and parameters.
struct DescriptorSystem {
  Laplacian laplacian;
  GeneratorParams params;
  Eigen::VectorXd sigma;  // per-bus process noise standard deviation
  double ts = 0.0;        // sampling period, seconds

  [[nodiscard]] Eigen::Index size() const { return params.size(); }
  [[nodiscard]] Eigen::MatrixXd E() const;
  [[nodiscard]] Eigen::MatrixXd A() const;
  /// Covariance of the discrete noise r[k]: ts * diag(sigma^2).
  [[nodiscard]] Eigen::MatrixXd noise_covariance() const;
  [[nodiscard]] bool singular() const;
};

[[nodiscard]] DescriptorSystem assemble_descriptor(Laplacian laplacian, GeneratorParams params, Eigen::VectorXd sigma,
                                                   double ts);

/// Sampled angle/frequency deviations. Row k of `delta`/`omega` is z[k];
/// row k of `noise` is the realized r[k] for k = 0..T-2.
struct Trajectory {
  Eigen::MatrixXd delta;
  Eigen::MatrixXd omega;
  Eigen::MatrixXd noise;
  double ts = 0.0;
  std::uint64_t seed = 0;

  [[nodiscard]] Eigen::Index steps() const { return delta.rows(); }
  [[nodiscard]] Eigen::Index nodes() const { return delta.cols(); }
};

/// Euler-Maruyama stepping of E(z[k+1] - z[k]) = ts A z[k] + [0; r[k]],
/// r[k] ~ N(0, ts diag(sigma^2)).
///
/// Inertial rows advance explicitly. Droop rows (m_i = 0) are algebraic and
/// are solved for omega_i[k] from delta[k] and r[k] before the angles move:
///   omega_i[k] = (r_i[k] / ts - (H delta[k])_i) / d_i.
/// omega0 is ignored at droop nodes.
[[nodiscard]] Trajectory simulate(const DescriptorSystem& system, const Eigen::VectorXd& delta0,
                                  const Eigen::VectorXd& omega0, Eigen::Index steps, std::uint64_t seed);

/// Bottom block of E(z[k+1] - z[k]) - ts A z[k] for k = 0..T-2:
///   M (omega[k+1] - omega[k]) + ts H delta[k] + ts D omega[k].
[[nodiscard]] Eigen::MatrixXd residual(const DescriptorSystem& system, const Trajectory& trajectory);

}  // namespace swingest
