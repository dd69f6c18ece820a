#include "swingest/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "swingest/errors.hpp"

namespace swingest {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

std::filesystem::path sidecar_path(const std::filesystem::path& file) {
  std::filesystem::path p = file;
  p += ".meta.json";
  return p;
}

std::string meta_json(const FileMeta& meta) {
  const json j = {{"command", meta.command},
                  {"scenario", meta.scenario},
                  {"fingerprint", meta.fingerprint},
                  {"seed", meta.seed},
                  {"ts", meta.ts}};
  return j.dump(2) + "\n";
}

FileMeta parse_meta_json(std::string_view text, std::string_view source) {
  const json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(ErrorCode::ParseError, std::string(source) + ": malformed metadata");
  FileMeta meta;
  try {
    meta.command = j.value("command", std::string());
    meta.scenario = j.value("scenario", std::string());
    meta.fingerprint = j.value("fingerprint", std::string());
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.ts = j.at("ts").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string(source) + ": " + e.what());
  }
  return meta;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

void write_with_sidecar(const std::filesystem::path& path, std::string_view contents, const FileMeta& meta) {
  write_file(path, contents);
  write_file(sidecar_path(path), meta_json(meta));
}

std::string trajectory_csv(const Trajectory& trajectory) {
  const Eigen::Index n = trajectory.nodes();
  std::string out = "k";
  for (Eigen::Index i = 1; i <= n; ++i) out += ",delta_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= n; ++i) out += ",omega_" + std::to_string(i);
  out += '\n';
  for (Eigen::Index k = 0; k < trajectory.steps(); ++k) {
    out += std::to_string(k);
    for (Eigen::Index i = 0; i < n; ++i) out += ',' + format_double(trajectory.delta(k, i));
    for (Eigen::Index i = 0; i < n; ++i) out += ',' + format_double(trajectory.omega(k, i));
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::string_view line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

Trajectory parse_trajectory_csv(std::string_view text, double ts, std::uint64_t seed, std::string_view source) {
  const std::string where(source);
  const std::vector<std::string_view> lines = lines_of(text);
  if (lines.empty()) fail(ErrorCode::ParseError, where + ": empty trajectory file");
  const std::vector<std::string_view> header = split(lines[0], ',');
  if (header.size() < 3 || header.size() % 2 == 0 || header[0] != "k")
    fail(ErrorCode::ParseError, where + ": line 1: expected header k,delta_1..delta_N,omega_1..omega_N");
  const auto n = static_cast<Eigen::Index>((header.size() - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string id = std::to_string(i + 1);
    if (header[static_cast<std::size_t>(1 + i)] != "delta_" + id ||
        header[static_cast<std::size_t>(1 + n + i)] != "omega_" + id)
      fail(ErrorCode::ParseError, where + ": line 1: unexpected column names");
  }

  const auto steps = static_cast<Eigen::Index>(lines.size() - 1);
  Trajectory traj;
  traj.delta.resize(steps, n);
  traj.omega.resize(steps, n);
  traj.noise.resize(0, n);
  traj.ts = ts;
  traj.seed = seed;
  for (Eigen::Index k = 0; k < steps; ++k) {
    const std::string line_ref = where + ": line " + std::to_string(k + 2);
    const std::vector<std::string_view> cells = split(lines[static_cast<std::size_t>(k + 1)], ',');
    if (cells.size() != header.size()) fail(ErrorCode::ParseError, line_ref + ": wrong number of columns");
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (ec != std::errc() || ptr != cells[c].data() + cells[c].size())
        fail(ErrorCode::ParseError, line_ref + ": bad number '" + std::string(cells[c]) + "'");
      const auto col = static_cast<Eigen::Index>(c - 1);
      if (col < n) traj.delta(k, col) = v;
      else traj.omega(k, col - n) = v;
    }
  }
  return traj;
}

Trajectory load_trajectory(const std::filesystem::path& path, FileMeta* meta) {
  const std::filesystem::path side = sidecar_path(path);
  const FileMeta m = parse_meta_json(read_file(side), side.string());
  if (meta != nullptr) *meta = m;
  return parse_trajectory_csv(read_file(path), m.ts, m.seed, path.string());
}

}  // namespace swingest
