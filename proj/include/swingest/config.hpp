#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "swingest/analysis.hpp"
#include "swingest/dynamics.hpp"
#include "swingest/estimators.hpp"
#include "swingest/netmodel.hpp"

namespace swingest {

inline constexpr int kConfigSchemaVersion = 1;

/// A fully validated experiment description with every default resolved.
/// The JSON grammar is documented in docs/config-schema.md.
struct ExperimentConfig {
  std::string name;
  std::string description;

  std::optional<NetworkTopology> topology;  // present when the file gives an edge list
  Laplacian laplacian;                      // generator-only, in generator order
  GeneratorParams generators;

  Eigen::VectorXd sigma;
  double ts = 0.0;
  Eigen::Index horizon = 0;
  std::uint64_t seed = 0;
  EstimatorSettings estimator;
  Eigen::VectorXd delta0;
  Eigen::VectorXd omega0;

  std::vector<Eigen::Index> montecarlo_grid;
  int montecarlo_trials = 0;

  std::string resolved_json;  // canonical JSON of the resolved config
  std::string fingerprint;    // fingerprint(resolved_json)

  [[nodiscard]] DescriptorSystem system() const;
  [[nodiscard]] Scenario scenario() const;
};

[[nodiscard]] ExperimentConfig parse_config(std::string_view text, std::string_view source = "<memory>");
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
[[nodiscard]] std::string fingerprint(std::string_view bytes);

/// Directory holding the bundled scenario files (compile-time default,
/// overridable with the SWINGEST_SCENARIO_DIR environment variable).
[[nodiscard]] std::filesystem::path scenario_directory();

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::filesystem::path path;
};

/// Bundled configs (every *.json in scenario_directory() with a "generators" section), sorted by name.
[[nodiscard]] std::vector<ScenarioInfo> list_scenarios();

/// `name_or_path` is a path to a config file or the name of a bundled scenario.
[[nodiscard]] std::filesystem::path resolve_config(std::string_view name_or_path);

}  // namespace swingest
