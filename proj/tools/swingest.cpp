#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "swingest/analysis.hpp"
#include "swingest/config.hpp"
#include "swingest/errors.hpp"
#include "swingest/estimators.hpp"
#include "swingest/io.hpp"

using nlohmann::json;
using namespace swingest;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load(const Common& c) { return load_config(resolve_config(c.config)); }

std::uint64_t seed_of(const Common& c, const ExperimentConfig& cfg) { return c.seed.value_or(cfg.seed); }

FileMeta meta_for(const std::string& command, const ExperimentConfig& cfg, std::uint64_t seed) {
  return {command, cfg.name, cfg.fingerprint, seed, cfg.ts};
}

json to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json indices(const std::vector<Eigen::Index>& v) {
  json out = json::array();
  for (Eigen::Index i : v) out.push_back(i + 1);
  return out;
}

// Relative errors against the config truth; null where the truth is zero.
json relative(const Eigen::VectorXd& est, const Eigen::VectorXd& truth) {
  json out = json::array();
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (truth(i) == 0.0) out.push_back(nullptr);
    else out.push_back((est(i) - truth(i)) / truth(i));
  }
  return out;
}

json result_json(const EstimationResult& r, const GeneratorParams& truth) {
  json diag = {{"objective", r.diagnostics.objective},
               {"rank", r.diagnostics.rank},
               {"full_rank", r.diagnostics.full_rank},
               {"active_lower", indices(r.diagnostics.active_lower)},
               {"active_upper", indices(r.diagnostics.active_upper)}};
  if (r.diagnostics.kkt_gradient.size() > 0) diag["kkt_gradient"] = to_json(r.diagnostics.kkt_gradient);
  if (r.diagnostics.row_fit_residuals.size() > 0)
    diag["row_fit_residuals"] = to_json(r.diagnostics.row_fit_residuals);
  return {{"method", std::string(to_string(r.method))},
          {"m_hat", to_json(r.m_hat)},
          {"d_hat", to_json(r.d_hat)},
          {"relative_error", {{"m", relative(r.m_hat, truth.m)}, {"d", relative(r.d_hat, truth.d)}}},
          {"diagnostics", diag},
          {"trajectory", {{"steps", r.steps}, {"ts", r.ts}, {"seed", r.seed}}}};
}

std::string cell(double value, double truth) {
  char buf[64];
  if (truth == 0.0) std::snprintf(buf, sizeof buf, "%.5g", value);
  else std::snprintf(buf, sizeof buf, "%.5g (%+.2e)", value, (value - truth) / truth);
  return buf;
}

// One row per generator: true inertia, then "estimate (relative error)" per method.
std::string comparison_table(const GeneratorParams& truth, const std::vector<std::string>& names,
                             const std::vector<std::optional<EstimationResult>>& results) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-4s %-11s %-8s", "gen", "kind", "m_true");
  out << buf;
  for (const std::string& n : names) {
    std::snprintf(buf, sizeof buf, " | %-20s", n.c_str());
    out << buf;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-4lld %-11s %-8.5g", static_cast<long long>(i + 1),
                  std::string(to_string(truth.kind[static_cast<std::size_t>(i)])).c_str(), truth.m(i));
    out << buf;
    for (const auto& r : results) {
      const std::string c = r ? cell(r->m_hat(i), truth.m(i)) : std::string("failed");
      std::snprintf(buf, sizeof buf, " | %-20s", c.c_str());
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

int cmd_scenarios() {
  for (const ScenarioInfo& s : list_scenarios()) std::cout << s.name << "\t" << s.description << "\n";
  return 0;
}

int cmd_simulate(const Common& c, std::optional<Eigen::Index> horizon) {
  const ExperimentConfig cfg = load(c);
  const std::uint64_t seed = seed_of(c, cfg);
  const Trajectory traj = simulate(cfg.system(), cfg.delta0, cfg.omega0, horizon.value_or(cfg.horizon), seed);
  const std::string csv = trajectory_csv(traj);
  if (c.out.empty()) std::cout << csv;
  else write_with_sidecar(c.out, csv, meta_for("simulate", cfg, seed));
  return 0;
}

int cmd_estimate(const Common& c, const std::string& method, const std::string& trajectory_path,
                 std::optional<Eigen::Index> horizon) {
  const ExperimentConfig cfg = load(c);
  Trajectory traj;
  std::uint64_t seed = seed_of(c, cfg);
  if (!trajectory_path.empty()) {
    FileMeta meta;
    traj = load_trajectory(trajectory_path, &meta);
    seed = meta.seed;
    require(traj.nodes() == cfg.laplacian.size(), ErrorCode::DimensionMismatch,
            "trajectory has " + std::to_string(traj.nodes()) + " nodes, config has " +
                std::to_string(cfg.laplacian.size()));
  } else {
    traj = simulate(cfg.system(), cfg.delta0, cfg.omega0, horizon.value_or(cfg.horizon), seed);
  }

  std::vector<Method> methods;
  if (method == "all") methods = {Method::Unconstrained, Method::Constrained, Method::PerNode, Method::Naive};
  else methods = {method_from_string(method)};

  json doc = {{"command", "estimate"},
              {"scenario", cfg.name},
              {"fingerprint", cfg.fingerprint},
              {"seed", seed},
              {"ts", traj.ts},
              {"steps", traj.steps()},
              {"results", json::array()}};
  std::vector<std::string> names;
  std::vector<std::optional<EstimationResult>> results;
  std::optional<Error> first_error;
  for (Method m : methods) {
    EstimatorSettings settings = cfg.estimator;
    settings.method = m;
    names.emplace_back(to_string(m));
    try {
      results.emplace_back(estimate(traj, cfg.laplacian, settings));
      doc["results"].push_back(result_json(*results.back(), cfg.generators));
    } catch (const Error& e) {
      results.emplace_back(std::nullopt);
      doc["results"].push_back({{"method", std::string(to_string(m))}, {"error", e.what()}});
      if (!first_error) first_error = e;
    }
  }

  const std::string table = comparison_table(cfg.generators, names, results);
  if (method == "all") doc["comparison_table"] = table;
  if (c.out.empty()) std::cout << doc.dump(2) << "\n";
  else write_with_sidecar(c.out, doc.dump(2) + "\n", meta_for("estimate", cfg, seed));
  if (method == "all" || !c.out.empty()) std::cerr << table;

  if (first_error) {
    std::cerr << "error: " << first_error->what() << "\n";
    return exit_code(first_error->code());
  }
  return 0;
}

std::string csv_number(double x) { return std::isfinite(x) ? format_double(x) : std::string("nan"); }

int cmd_montecarlo(const Common& c, std::vector<Eigen::Index> grid, std::optional<int> trials_opt, bool serial) {
  const ExperimentConfig cfg = load(c);
  const std::uint64_t seed = seed_of(c, cfg);
  if (grid.empty()) grid = cfg.montecarlo_grid;
  const int trials = trials_opt.value_or(cfg.montecarlo_trials);
  const MonteCarloReport report = run_monte_carlo(cfg.scenario(), grid, trials, seed,
                                                  serial ? Execution::Serial : Execution::Parallel);
  const Eigen::Index n = cfg.laplacian.size();
  const std::string prefix = c.out.empty() ? cfg.name : c.out;
  const FileMeta meta = meta_for("montecarlo", cfg, seed);

  std::string summary = "T,e_int_mean,e_int_std,d_int_mean,d_int_std,succeeded,failed\n";
  std::string errors = "T,trial";
  for (Eigen::Index i = 1; i <= n; ++i) errors += ",m_err_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= n; ++i) errors += ",d_err_" + std::to_string(i);
  errors += '\n';
  std::string hist = "T,quantity,node,bin,lower,upper,count\n";

  for (const HorizonSummary& s : report.summaries) {
    const std::string t = std::to_string(s.horizon);
    summary += t + ',' + csv_number(s.e_int_mean) + ',' + csv_number(s.e_int_std) + ',' + csv_number(s.d_int_mean) +
               ',' + csv_number(s.d_int_std) + ',' + std::to_string(s.succeeded) + ',' + std::to_string(s.failed) +
               '\n';
    for (Eigen::Index k = 0; k < s.m_errors.rows(); ++k) {
      errors += t + ',' + std::to_string(k);
      for (Eigen::Index i = 0; i < n; ++i) errors += ',' + csv_number(s.m_errors(k, i));
      for (Eigen::Index i = 0; i < n; ++i) errors += ',' + csv_number(s.d_errors(k, i));
      errors += '\n';
    }
    for (const auto& [name, mat] : {std::pair{"m", &s.m_errors}, std::pair{"d", &s.d_errors}}) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd col = mat->col(i);
        const Histogram h = histogram(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
        for (std::size_t b = 0; b < h.counts.size(); ++b)
          hist += t + ',' + name + ',' + std::to_string(i + 1) + ',' + std::to_string(b) + ',' +
                  format_double(h.edges[b]) + ',' + format_double(h.edges[b + 1]) + ',' +
                  std::to_string(h.counts[b]) + '\n';
      }
    }
    std::cerr << "T=" << s.horizon << "  e_int=" << s.e_int_mean << "  d_int=" << s.d_int_mean
              << "  failed=" << s.failed << "/" << trials << "\n";
  }
  write_with_sidecar(prefix + "_summary.csv", summary, meta);
  write_with_sidecar(prefix + "_errors.csv", errors, meta);
  write_with_sidecar(prefix + "_histogram.csv", hist, meta);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inertia and damping identification for networked swing dynamics"};
  app.require_subcommand(1);

  Common common;
  std::string method = "unconstrained";
  std::string trajectory;
  std::optional<Eigen::Index> horizon;
  std::vector<Eigen::Index> grid;
  std::optional<int> trials;
  bool serial = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "config file or bundled scenario name")->required();
    sub->add_option("--out", common.out, "output path (prefix for montecarlo)");
    sub->add_option("--seed", common.seed, "override the config seed");
  };

  app.add_subcommand("scenarios", "list bundled scenarios");

  CLI::App* sim = app.add_subcommand("simulate", "simulate a trajectory to CSV");
  add_common(sim);
  sim->add_option("--horizon", horizon, "number of samples T")->check(CLI::Range(2, 100000000));

  CLI::App* est = app.add_subcommand("estimate", "estimate inertia and damping");
  add_common(est);
  est->add_option("--method", method, "estimator")
      ->check(CLI::IsMember({"unconstrained", "constrained", "per-node", "naive", "all"}));
  est->add_option("--trajectory", trajectory, "trajectory CSV written by simulate");
  est->add_option("--horizon", horizon, "number of samples T when simulating")->check(CLI::Range(2, 100000000));

  CLI::App* mc = app.add_subcommand("montecarlo", "Monte Carlo error study over a horizon grid");
  add_common(mc);
  mc->add_option("--grid", grid, "horizons, e.g. 50,100,200,400")->delimiter(',')->check(CLI::Range(2, 100000000));
  mc->add_option("--trials", trials, "trials per horizon")->check(CLI::Range(1, 10000000));
  mc->add_flag("--serial", serial, "run trials on one thread");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("scenarios")) return cmd_scenarios();
    if (sim->parsed()) return cmd_simulate(common, horizon);
    if (est->parsed()) return cmd_estimate(common, method, trajectory, horizon);
    if (mc->parsed()) return cmd_montecarlo(common, grid, trials, serial);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
