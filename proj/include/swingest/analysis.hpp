#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swingest/dynamics.hpp"
#include "swingest/estimators.hpp"

namespace swingest {

/// Everything needed to run simulate -> estimate repeatedly.
struct Scenario {
  DescriptorSystem system;
  Eigen::VectorXd delta0;
  Eigen::VectorXd omega0;
  EstimatorSettings estimator;
  std::string fingerprint;
};

enum class Execution { Serial, Parallel };

struct ErrorMetrics {
  double e_int = 0.0;  // mean squared inertia error over generators
  double d_int = 0.0;  // mean squared damping error over generators
};

[[nodiscard]] ErrorMetrics error_metrics(const EstimationResult& result, const GeneratorParams& truth);

/// (m_hat_i - m_i) / m_i. Throws ZeroTruth if some m_i is zero.
[[nodiscard]] Eigen::VectorXd relative_errors(const EstimationResult& result, const GeneratorParams& truth);

/// ts^2 W+ Sigma_zeta (W+)^T for the regression model
///   -ts (I x H) delta = W [m; d] + zeta,
/// treating W as deterministic. Throws RankDeficient or NotPSD.
[[nodiscard]] Eigen::MatrixXd predicted_covariance(const DataMatrixPair& pair, const Eigen::MatrixXd& sigma_zeta,
                                                   double ts);

/// True when the symmetric part of `m` has smallest eigenvalue >= -tol * max(trace, 1e-300)
/// and the matrix is symmetric to within the same tolerance.
[[nodiscard]] bool is_symmetric_psd(const Eigen::MatrixXd& m, double tol = 1e-10);

struct EstimatorMoments {
  Eigen::VectorXd mean;        // over [m_hat; d_hat]
  Eigen::MatrixXd covariance;  // sample covariance (n - 1 denominator)
  Eigen::MatrixXd samples;     // successful trials x 2N
  int trials = 0;
  int failed = 0;
};

/// Sample mean and covariance of [m_hat; d_hat] over independent
/// simulate -> estimate runs with trial seeds derive_trial_seed(seed, horizon, i).
/// Failed trials are counted and excluded. Throws InsufficientTrials if
/// trials < 2 or fewer than 2 trials succeed.
[[nodiscard]] EstimatorMoments empirical_estimator_covariance(const Scenario& scenario, Eigen::Index horizon,
                                                              int trials, std::uint64_t seed,
                                                              Execution execution = Execution::Parallel);

struct HorizonSummary {
  Eigen::Index horizon = 0;
  double e_int_mean = 0.0;
  double e_int_std = 0.0;
  double d_int_mean = 0.0;
  double d_int_std = 0.0;
  int succeeded = 0;
  int failed = 0;
  // trials x N signed errors m_hat - m*, d_hat - d*; rows of failed trials are NaN.
  Eigen::MatrixXd m_errors;
  Eigen::MatrixXd d_errors;
};

struct MonteCarloReport {
  int trials = 0;
  std::vector<Eigen::Index> horizon_grid;
  std::vector<HorizonSummary> summaries;  // one per grid point, same order
  std::string config_fingerprint;
  std::uint64_t master_seed = 0;
};

[[nodiscard]] MonteCarloReport run_monte_carlo(const Scenario& scenario, std::span<const Eigen::Index> horizon_grid,
                                               int trials, std::uint64_t master_seed,
                                               Execution execution = Execution::Parallel);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<int> counts;
};

/// ceil(sqrt(n)) equal-width bins spanning [min, max] of the finite samples.
[[nodiscard]] Histogram histogram(std::span<const double> samples);

/// Sample standard deviation (n - 1 denominator) of the finite entries.
[[nodiscard]] double sample_std(std::span<const double> samples);

}  // namespace swingest
