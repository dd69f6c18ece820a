#pragma once

#include <cstdint>
#include <random>

namespace swingest {

/// SplitMix64 finalizer. Platform-stable 64-bit mixing used for seed derivation.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of trial `trial` at horizon `horizon` under `master`:
/// mix64(mix64(mix64(master) ^ horizon) ^ trial). Adding grid points or
/// trials never changes the seed of an existing (horizon, trial) pair.
[[nodiscard]] constexpr std::uint64_t derive_trial_seed(std::uint64_t master, std::uint64_t horizon,
                                                        std::uint64_t trial) noexcept {
  return mix64(mix64(mix64(master) ^ horizon) ^ trial);
}

/// Standard normal draws that reproduce bit-for-bit across standard libraries.
/// std::mt19937_64 is fully specified by the standard; the distributions are
/// not, so uniforms and the Box-Muller transform are done here.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next();

 private:
  double uniform_open();  // (0, 1), 53-bit resolution

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace swingest
