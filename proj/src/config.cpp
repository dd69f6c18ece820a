#include "swingest/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "swingest/errors.hpp"

#ifndef SWINGEST_DEFAULT_SCENARIO_DIR
#define SWINGEST_DEFAULT_SCENARIO_DIR "scenarios"
#endif

namespace swingest {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  fail(ErrorCode::ValidationError, path + ": " + what);
}

std::string join(const std::string& parent, const std::string& key) { return parent.empty() ? key : parent + "." + key; }
std::string index(const std::string& parent, std::size_t i) { return parent + "[" + std::to_string(i) + "]"; }

void only_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) invalid(join(path, key), "unknown field");
  }
}

const json& field(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) invalid(join(path, key), "required field is missing");
  return obj.at(key);
}

const json& object_at(const json& obj, const std::string& path, const char* key) {
  const json& v = field(obj, path, key);
  if (!v.is_object()) invalid(join(path, key), "expected an object");
  return v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) invalid(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid(path, "expected a finite number");
  return x;
}

std::int64_t as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) invalid(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) invalid(path, "expected a string");
  return v.get<std::string>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& path, Eigen::Index expected) {
  if (!v.is_array()) invalid(path, "expected an array of numbers");
  if (expected >= 0 && static_cast<Eigen::Index>(v.size()) != expected)
    invalid(path, "expected " + std::to_string(expected) + " entries, found " + std::to_string(v.size()));
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = as_number(v[i], index(path, i));
  return out;
}

std::vector<int> as_int_list(const json& v, const std::string& path) {
  if (!v.is_array()) invalid(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::int64_t x = as_integer(v[i], index(path, i));
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
      invalid(index(path, i), "out of range");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

std::string parse_error_location(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

Laplacian parse_explicit_laplacian(const json& node, const std::string& path) {
  only_keys(node, path, {"labels", "matrix"});
  const json& rows = field(node, path, "matrix");
  const std::string mpath = join(path, "matrix");
  if (!rows.is_array() || rows.empty()) invalid(mpath, "expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Laplacian lap;
  lap.matrix.resize(n, n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    lap.matrix.row(static_cast<Eigen::Index>(i)) = as_vector(rows[i], index(mpath, i), n).transpose();

  if (node.contains("labels")) {
    lap.node_labels = as_int_list(node.at("labels"), join(path, "labels"));
    if (static_cast<Eigen::Index>(lap.node_labels.size()) != n) invalid(join(path, "labels"), "length differs from matrix");
    if (std::set<int>(lap.node_labels.begin(), lap.node_labels.end()).size() != lap.node_labels.size())
      invalid(join(path, "labels"), "duplicate label");
  } else {
    for (Eigen::Index i = 0; i < n; ++i) lap.node_labels.push_back(static_cast<int>(i + 1));
  }

  const LaplacianCheck check = check_laplacian(lap.matrix);
  const double scale = std::max(1.0, lap.matrix.cwiseAbs().maxCoeff());
  if (check.max_asymmetry > 1e-12 * scale) invalid(mpath, "matrix is not symmetric");
  if (check.max_row_sum > 1e-9 * scale) invalid(mpath, "rows must sum to zero");
  if (check.max_off_diagonal > 0.0) invalid(mpath, "off-diagonal entries must be <= 0");
  return lap;
}

NetworkTopology parse_topology(const json& node, const std::string& path, double& scale) {
  only_keys(node, path, {"n_buses", "edges", "generator_buses", "susceptance_scale", "notes"});
  NetworkTopology topo;
  const std::int64_t n = as_integer(field(node, path, "n_buses"), join(path, "n_buses"));
  if (n <= 0 || n > 100000) invalid(join(path, "n_buses"), "must be a positive bus count");
  topo.n_buses = static_cast<int>(n);

  const json& edges = field(node, path, "edges");
  const std::string epath = join(path, "edges");
  if (!edges.is_array()) invalid(epath, "expected an array of [from, to, beta] triples");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const json& e = edges[k];
    const std::string p = index(epath, k);
    if (!e.is_array() || e.size() != 3) invalid(p, "expected [from, to, beta]");
    const std::int64_t from = as_integer(e[0], index(p, 0));
    const std::int64_t to = as_integer(e[1], index(p, 1));
    if (from < 1 || from > n || to < 1 || to > n) invalid(p, "bus index out of range");
    topo.edges.push_back({static_cast<int>(from), static_cast<int>(to), as_number(e[2], index(p, 2))});
  }
  topo.generator_buses = as_int_list(field(node, path, "generator_buses"), join(path, "generator_buses"));

  scale = 1.0;
  if (node.contains("susceptance_scale")) {
    scale = as_number(node.at("susceptance_scale"), join(path, "susceptance_scale"));
    if (scale <= 0.0) invalid(join(path, "susceptance_scale"), "must be > 0");
  }
  return topo;
}

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

}  // namespace

std::string fingerprint(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

DescriptorSystem ExperimentConfig::system() const { return assemble_descriptor(laplacian, generators, sigma, ts); }

Scenario ExperimentConfig::scenario() const { return Scenario{system(), delta0, omega0, estimator, fingerprint}; }

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError,
         std::string(source) + ": " + parse_error_location(text, e.byte) + ": malformed JSON (" + e.what() + ")");
  }
  if (!root.is_object()) fail(ErrorCode::ParseError, std::string(source) + ": top level must be a JSON object");

  only_keys(root, "", {"schema_version", "name", "description", "notes", "network", "generators", "sigma", "ts",
                       "horizon", "seed", "estimator", "initial_state", "montecarlo"});

  ExperimentConfig cfg;
  if (root.contains("schema_version") &&
      as_integer(root.at("schema_version"), "schema_version") != kConfigSchemaVersion)
    invalid("schema_version", "unsupported version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  cfg.name = root.contains("name") ? as_string(root.at("name"), "name") : std::string("unnamed");
  cfg.description = root.contains("description") ? as_string(root.at("description"), "description") : std::string();

  // Network
  const json& network = object_at(root, "", "network");
  json resolved_network = json::object();
  if (network.contains("laplacian")) {
    only_keys(network, "network", {"laplacian", "notes"});
    const json& lap = network.at("laplacian");
    if (!lap.is_object()) invalid("network.laplacian", "expected an object");
    cfg.laplacian = parse_explicit_laplacian(lap, "network.laplacian");
  } else {
    double scale = 1.0;
    NetworkTopology topo = parse_topology(network, "network", scale);
    for (Edge& e : topo.edges) e.beta *= scale;
    const Laplacian full = build_laplacian(topo);
    cfg.laplacian = kron_reduce(full, topo.generator_buses);
    resolved_network["source"] = network;
    cfg.topology = std::move(topo);
  }
  resolved_network["laplacian"] = {{"labels", cfg.laplacian.node_labels}, {"matrix", matrix_json(cfg.laplacian.matrix)}};
  const Eigen::Index n = cfg.laplacian.size();

  // Generators
  const json& gens = field(root, "", "generators");
  if (!gens.is_array()) invalid("generators", "expected an array");
  if (static_cast<Eigen::Index>(gens.size()) != n)
    invalid("generators", "expected " + std::to_string(n) + " generators to match the network, found " +
                              std::to_string(gens.size()));
  cfg.generators.m.resize(n);
  cfg.generators.d.resize(n);
  json resolved_gens = json::array();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string p = index("generators", i);
    const json& g = gens[i];
    if (!g.is_object()) invalid(p, "expected an object");
    only_keys(g, p, {"bus", "kind", "m", "d"});
    const int label = cfg.laplacian.node_labels[i];
    if (g.contains("bus") && as_integer(g.at("bus"), join(p, "bus")) != label)
      invalid(join(p, "bus"), "expected bus " + std::to_string(label) + " to follow the network node order");
    const std::string kind = g.contains("kind") ? as_string(g.at("kind"), join(p, "kind")) : "synchronous";
    try {
      cfg.generators.kind.push_back(generator_kind_from_string(kind));
    } catch (const Error&) {
      invalid(join(p, "kind"), "must be one of synchronous, vsm, droop");
    }
    const auto ei = static_cast<Eigen::Index>(i);
    cfg.generators.m(ei) = as_number(field(g, p, "m"), join(p, "m"));
    cfg.generators.d(ei) = as_number(field(g, p, "d"), join(p, "d"));
    if (cfg.generators.m(ei) < 0.0) invalid(join(p, "m"), "inertia must be >= 0");
    if (cfg.generators.d(ei) <= 0.0) invalid(join(p, "d"), "damping must be > 0");
    const bool droop = cfg.generators.kind.back() == GeneratorKind::Droop;
    if (droop && cfg.generators.m(ei) != 0.0) invalid(join(p, "m"), "droop generators must have m = 0");
    if (!droop && cfg.generators.m(ei) == 0.0) invalid(join(p, "m"), "m = 0 is only allowed for kind droop");
    resolved_gens.push_back(
        {{"bus", label}, {"kind", kind}, {"m", cfg.generators.m(ei)}, {"d", cfg.generators.d(ei)}});
  }

  // Noise and sampling
  const json& sigma = field(root, "", "sigma");
  if (sigma.is_number()) cfg.sigma = Eigen::VectorXd::Constant(n, as_number(sigma, "sigma"));
  else cfg.sigma = as_vector(sigma, "sigma", n);
  if ((cfg.sigma.array() < 0.0).any()) invalid("sigma", "must be >= 0");

  cfg.ts = as_number(field(root, "", "ts"), "ts");
  if (cfg.ts <= 0.0) invalid("ts", "sampling period must be > 0");

  const std::int64_t horizon = root.contains("horizon") ? as_integer(root.at("horizon"), "horizon") : 1000;
  if (horizon < 2) invalid("horizon", "must be >= 2");
  cfg.horizon = static_cast<Eigen::Index>(horizon);

  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
      invalid("seed", "expected a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  } else {
    cfg.seed = 1;
  }

  // Estimator
  const std::vector<Eigen::Index> declared_droop = cfg.generators.droop_nodes();
  json resolved_est = json::object();
  cfg.estimator.droop_nodes = declared_droop;
  std::string method = "unconstrained";
  json d_max_json = nullptr;
  if (root.contains("estimator")) {
    const json& est = object_at(root, "", "estimator");
    only_keys(est, "estimator", {"method", "droop_set", "d_max"});
    if (est.contains("method")) method = as_string(est.at("method"), "estimator.method");
    if (est.contains("droop_set")) {
      const std::vector<int> listed = as_int_list(est.at("droop_set"), "estimator.droop_set");
      std::set<Eigen::Index> given;
      for (int one_based : listed) {
        if (one_based < 1 || one_based > n) invalid("estimator.droop_set", "generator index out of range");
        given.insert(one_based - 1);
      }
      if (given != std::set<Eigen::Index>(declared_droop.begin(), declared_droop.end()))
        invalid("estimator.droop_set", "must list exactly the generators of kind droop");
    }
    if (est.contains("d_max") && !est.at("d_max").is_null()) {
      cfg.estimator.d_max = as_number(est.at("d_max"), "estimator.d_max");
      if (cfg.estimator.d_max <= 0.0) invalid("estimator.d_max", "must be > 0");
      d_max_json = cfg.estimator.d_max;
    }
  }
  try {
    cfg.estimator.method = method_from_string(method);
  } catch (const Error&) {
    invalid("estimator.method", "must be one of unconstrained, constrained, per-node, naive");
  }
  {
    std::vector<int> droop_one_based;
    for (Eigen::Index i : declared_droop) droop_one_based.push_back(static_cast<int>(i + 1));
    resolved_est = {{"method", std::string(to_string(cfg.estimator.method))},
                    {"droop_set", droop_one_based},
                    {"d_max", d_max_json}};
  }

  // Initial state
  cfg.delta0 = Eigen::VectorXd::Zero(n);
  cfg.omega0 = Eigen::VectorXd::Zero(n);
  if (root.contains("initial_state")) {
    const json& init = object_at(root, "", "initial_state");
    only_keys(init, "initial_state", {"delta", "omega"});
    if (init.contains("delta")) cfg.delta0 = as_vector(init.at("delta"), "initial_state.delta", n);
    if (init.contains("omega")) cfg.omega0 = as_vector(init.at("omega"), "initial_state.omega", n);
  }

  // Monte Carlo defaults
  cfg.montecarlo_grid = {50, 100, 200, 400};
  cfg.montecarlo_trials = 100;
  if (root.contains("montecarlo")) {
    const json& mc = object_at(root, "", "montecarlo");
    only_keys(mc, "montecarlo", {"grid", "trials"});
    if (mc.contains("grid")) {
      cfg.montecarlo_grid.clear();
      for (int t : as_int_list(mc.at("grid"), "montecarlo.grid")) {
        if (t < 2) invalid("montecarlo.grid", "horizons must be >= 2");
        cfg.montecarlo_grid.push_back(t);
      }
      if (cfg.montecarlo_grid.empty()) invalid("montecarlo.grid", "must not be empty");
    }
    if (mc.contains("trials")) {
      const std::int64_t t = as_integer(mc.at("trials"), "montecarlo.trials");
      if (t < 1 || t > 10'000'000) invalid("montecarlo.trials", "must be >= 1");
      cfg.montecarlo_trials = static_cast<int>(t);
    }
  }

  // Cross-checks that need the assembled system.
  try {
    (void)cfg.system();
  } catch (const Error& e) {
    fail(ErrorCode::ValidationError, std::string("generators: ") + e.what());
  }

  json resolved = {{"schema_version", kConfigSchemaVersion},
                   {"name", cfg.name},
                   {"description", cfg.description},
                   {"network", resolved_network},
                   {"generators", resolved_gens},
                   {"sigma", vector_json(cfg.sigma)},
                   {"ts", cfg.ts},
                   {"horizon", horizon},
                   {"seed", cfg.seed},
                   {"estimator", resolved_est},
                   {"initial_state", {{"delta", vector_json(cfg.delta0)}, {"omega", vector_json(cfg.omega0)}}},
                   {"montecarlo", {{"grid", cfg.montecarlo_grid}, {"trials", cfg.montecarlo_trials}}}};
  cfg.resolved_json = resolved.dump();
  cfg.fingerprint = fingerprint(cfg.resolved_json);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = parse_config(buf.str(), path.string());
  if (cfg.name == "unnamed") cfg.name = path.stem().string();
  return cfg;
}

std::filesystem::path scenario_directory() {
  if (const char* env = std::getenv("SWINGEST_SCENARIO_DIR"); env != nullptr && *env != '\0') return env;
  return SWINGEST_DEFAULT_SCENARIO_DIR;
}

std::vector<ScenarioInfo> list_scenarios() {
  std::vector<ScenarioInfo> out;
  const std::filesystem::path dir = scenario_directory();
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("generators")) continue;
    out.push_back({j.value("name", entry.path().stem().string()), j.value("description", std::string()),
                   entry.path()});
  }
  std::sort(out.begin(), out.end(), [](const ScenarioInfo& a, const ScenarioInfo& b) { return a.name < b.name; });
  return out;
}

std::filesystem::path resolve_config(std::string_view name_or_path) {
  const std::filesystem::path as_path(name_or_path);
  std::error_code ec;
  if (std::filesystem::is_regular_file(as_path, ec)) return as_path;
  for (const ScenarioInfo& s : list_scenarios())
    if (s.name == name_or_path || s.path.stem() == as_path) return s.path;
  fail(ErrorCode::IoError, "no config file or bundled scenario named '" + std::string(name_or_path) + "'");
}

}  // namespace swingest
