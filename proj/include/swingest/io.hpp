#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "swingest/dynamics.hpp"

namespace swingest {

/// Shortest-safe decimal form: 17 significant digits, round-trips any double.
[[nodiscard]] std::string format_double(double x);

/// Provenance written next to every output file as `<file>.meta.json`.
struct FileMeta {
  std::string command;
  std::string scenario;
  std::string fingerprint;
  std::uint64_t seed = 0;
  double ts = 0.0;
};

[[nodiscard]] std::filesystem::path sidecar_path(const std::filesystem::path& file);
[[nodiscard]] std::string meta_json(const FileMeta& meta);
[[nodiscard]] FileMeta parse_meta_json(std::string_view text, std::string_view source = "<memory>");

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
void write_with_sidecar(const std::filesystem::path& path, std::string_view contents, const FileMeta& meta);

/// Header `k,delta_1..delta_N,omega_1..omega_N`, one row per sample.
[[nodiscard]] std::string trajectory_csv(const Trajectory& trajectory);

/// Inverse of trajectory_csv. The noise record is not stored and comes back empty.
[[nodiscard]] Trajectory parse_trajectory_csv(std::string_view text, double ts, std::uint64_t seed,
                                              std::string_view source = "<memory>");

/// Reads a trajectory CSV and takes ts and seed from its sidecar.
[[nodiscard]] Trajectory load_trajectory(const std::filesystem::path& path, FileMeta* meta = nullptr);

}  // namespace swingest
