#include "swingest/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "swingest/errors.hpp"
#include "swingest/random.hpp"

namespace swingest {

ErrorMetrics error_metrics(const EstimationResult& result, const GeneratorParams& truth) {
  const Eigen::Index n = truth.size();
  require(result.m_hat.size() == n && result.d_hat.size() == n && truth.d.size() == n && n > 0,
          ErrorCode::DimensionMismatch, "estimate and truth have different sizes");
  return {(result.m_hat - truth.m).squaredNorm() / static_cast<double>(n),
          (result.d_hat - truth.d).squaredNorm() / static_cast<double>(n)};
}

Eigen::VectorXd relative_errors(const EstimationResult& result, const GeneratorParams& truth) {
  const Eigen::Index n = truth.size();
  require(result.m_hat.size() == n, ErrorCode::DimensionMismatch, "estimate and truth have different sizes");
  for (Eigen::Index i = 0; i < n; ++i)
    require(truth.m(i) != 0.0, ErrorCode::ZeroTruth,
            "generator " + std::to_string(i + 1) + " has zero true inertia; relative error undefined");
  return ((result.m_hat - truth.m).array() / truth.m.array()).matrix();
}

bool is_symmetric_psd(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(std::abs(m.trace()), std::numeric_limits<double>::min());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  const double lowest =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lowest >= -tol * scale;
}

Eigen::MatrixXd predicted_covariance(const DataMatrixPair& pair, const Eigen::MatrixXd& sigma_zeta, double ts) {
  const Eigen::Index rows = pair.w.rows();
  require(sigma_zeta.rows() == rows && sigma_zeta.cols() == rows, ErrorCode::DimensionMismatch,
          "Sigma_zeta must be " + std::to_string(rows) + "x" + std::to_string(rows));
  require(is_symmetric_psd(sigma_zeta), ErrorCode::NotPSD, "Sigma_zeta is not symmetric positive semidefinite");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(pair.w.rows(), pair.w.cols());
  qr.setThreshold(static_cast<double>(std::max(pair.w.rows(), pair.w.cols())) *
                  std::numeric_limits<double>::epsilon());
  qr.compute(pair.w);
  require(qr.rank() == pair.w.cols(), ErrorCode::RankDeficient, "data matrix is rank deficient");

  // W+ = R^-1 Q^T P^T restricted to the leading columns; computed as the
  // least-squares solve against the identity.
  const Eigen::MatrixXd pinv = qr.solve(Eigen::MatrixXd::Identity(rows, rows));
  Eigen::MatrixXd cov = ts * ts * pinv * sigma_zeta * pinv.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  require(is_symmetric_psd(cov), ErrorCode::NotPSD, "predicted covariance lost positive semidefiniteness");
  return cov;
}

namespace {

struct TrialOutcome {
  std::optional<EstimationResult> result;
};

TrialOutcome run_trial(const Scenario& scenario, Eigen::Index horizon, std::uint64_t seed) {
  TrialOutcome out;
  try {
    const Trajectory traj = simulate(scenario.system, scenario.delta0, scenario.omega0, horizon, seed);
    out.result = estimate(traj, scenario.system.laplacian, scenario.estimator);
  } catch (const Error&) {
    out.result.reset();
  }
  return out;
}

// Runs trials 0..count-1 at `horizon`; slot i always holds trial i so the
// outcome does not depend on scheduling.
std::vector<TrialOutcome> run_trials(const Scenario& scenario, Eigen::Index horizon, int count, std::uint64_t master,
                                     Execution execution) {
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(count));
  const auto h = static_cast<std::uint64_t>(horizon);
  if (execution == Execution::Serial) {
    for (int i = 0; i < count; ++i)
      outcomes[static_cast<std::size_t>(i)] =
          run_trial(scenario, horizon, derive_trial_seed(master, h, static_cast<std::uint64_t>(i)));
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i)
      outcomes[static_cast<std::size_t>(i)] =
          run_trial(scenario, horizon, derive_trial_seed(master, h, static_cast<std::uint64_t>(i)));
  }
  return outcomes;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double sample_std(std::span<const double> samples) {
  std::vector<double> finite;
  for (double x : samples)
    if (std::isfinite(x)) finite.push_back(x);
  if (finite.size() < 2) return 0.0;
  const double mu = mean_of(finite);
  double ss = 0.0;
  for (double x : finite) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(finite.size() - 1));
}

EstimatorMoments empirical_estimator_covariance(const Scenario& scenario, Eigen::Index horizon, int trials,
                                                std::uint64_t seed, Execution execution) {
  require(trials >= 2, ErrorCode::InsufficientTrials, "need at least 2 trials to form a covariance");
  const Eigen::Index n = scenario.system.size();
  const std::vector<TrialOutcome> outcomes = run_trials(scenario, horizon, trials, seed, execution);

  EstimatorMoments moments;
  moments.trials = trials;
  std::vector<Eigen::VectorXd> rows;
  for (const TrialOutcome& o : outcomes) {
    if (!o.result) {
      ++moments.failed;
      continue;
    }
    rows.push_back((Eigen::VectorXd(2 * n) << o.result->m_hat, o.result->d_hat).finished());
  }
  require(rows.size() >= 2, ErrorCode::InsufficientTrials,
          std::to_string(moments.failed) + " of " + std::to_string(trials) + " trials failed");

  moments.samples.resize(static_cast<Eigen::Index>(rows.size()), 2 * n);
  for (std::size_t r = 0; r < rows.size(); ++r) moments.samples.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  moments.mean = moments.samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = moments.samples.rowwise() - moments.mean.transpose();
  moments.covariance = centered.transpose() * centered / static_cast<double>(rows.size() - 1);
  return moments;
}

MonteCarloReport run_monte_carlo(const Scenario& scenario, std::span<const Eigen::Index> horizon_grid, int trials,
                                 std::uint64_t master_seed, Execution execution) {
  require(trials >= 1, ErrorCode::InsufficientTrials, "need at least one trial");
  require(!horizon_grid.empty(), ErrorCode::InvalidArgument, "horizon grid is empty");
  for (Eigen::Index t : horizon_grid) require(t >= 2, ErrorCode::InvalidArgument, "horizons must be >= 2");

  const GeneratorParams& truth = scenario.system.params;
  const Eigen::Index n = truth.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  MonteCarloReport report;
  report.trials = trials;
  report.horizon_grid.assign(horizon_grid.begin(), horizon_grid.end());
  report.config_fingerprint = scenario.fingerprint;
  report.master_seed = master_seed;

  for (Eigen::Index horizon : horizon_grid) {
    const std::vector<TrialOutcome> outcomes = run_trials(scenario, horizon, trials, master_seed, execution);
    HorizonSummary s;
    s.horizon = horizon;
    s.m_errors = Eigen::MatrixXd::Constant(trials, n, nan);
    s.d_errors = Eigen::MatrixXd::Constant(trials, n, nan);
    std::vector<double> e_int;
    std::vector<double> d_int;
    for (int i = 0; i < trials; ++i) {
      const TrialOutcome& o = outcomes[static_cast<std::size_t>(i)];
      if (!o.result) {
        ++s.failed;
        continue;
      }
      ++s.succeeded;
      const ErrorMetrics metrics = error_metrics(*o.result, truth);
      e_int.push_back(metrics.e_int);
      d_int.push_back(metrics.d_int);
      s.m_errors.row(i) = (o.result->m_hat - truth.m).transpose();
      s.d_errors.row(i) = (o.result->d_hat - truth.d).transpose();
    }
    s.e_int_mean = mean_of(e_int);
    s.d_int_mean = mean_of(d_int);
    s.e_int_std = sample_std(e_int);
    s.d_int_std = sample_std(d_int);
    report.summaries.push_back(std::move(s));
  }
  return report;
}

Histogram histogram(std::span<const double> samples) {
  std::vector<double> finite;
  for (double x : samples)
    if (std::isfinite(x)) finite.push_back(x);
  Histogram h;
  if (finite.empty()) return h;
  const auto bins = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(finite.size()))));
  const auto [lo_it, hi_it] = std::minmax_element(finite.begin(), finite.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = lo + width * b;
  h.edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double x : finite) {
    auto b = static_cast<int>((x - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

}  // namespace swingest
