#pragma once

// Portable random draws. The standard distributions are implementation
// defined, so anything that must be reproducible goes through these helpers
// on top of std::mt19937_64 (whose output sequence is fully specified).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace degroot::rng {

using Engine = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  return Engine(mix_seed(seed, stream));
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

// Uniform integer in [lo, hi] by rejection.
inline std::int64_t uniform_int(Engine& eng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(eng());
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t r = eng();
  while (r >= limit) r = eng();
  return lo + static_cast<std::int64_t>(r % span);
}

inline double exponential(Engine& eng) { return -std::log1p(-uniform01(eng)); }

// Box-Muller, one variate per call.
inline double normal(Engine& eng, double mu = 0.0, double sigma = 1.0) {
  double u1 = uniform01(eng);
  while (u1 == 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace degroot::rng
