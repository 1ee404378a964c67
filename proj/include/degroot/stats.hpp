#pragma once

// Population-moment helpers. Every variance in the library divides by n.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "degroot/error.hpp"

namespace degroot::stats {

inline double mean(std::span<const double> a) {
  if (a.empty()) throw PreconditionError("mean of empty vector");
  return std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
}

inline double covariance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("covariance: length mismatch");
  const double ma = mean(a);
  const double mb = mean(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - ma) * (b[i] - mb);
  return acc / static_cast<double>(a.size());
}

inline double variance(std::span<const double> a) { return covariance(a, a); }

inline double stddev(std::span<const double> a) { return std::sqrt(variance(a)); }

// Pearson correlation with population moments. Returns 0 when either vector
// is constant; see std_times_correlation for the form used in the identities.
inline double correlation(std::span<const double> a, std::span<const double> b) {
  const double sa = stddev(a);
  const double sb = stddev(b);
  if (sa == 0.0 || sb == 0.0) return 0.0;
  const double r = covariance(a, b) / (sa * sb);
  return std::fmax(-1.0, std::fmin(1.0, r));
}

// s(b) * r(a, b) evaluated as cov(a, b) / s(a). Well defined when b is
// constant (the product is then 0); requires s(a) > 0.
inline double std_times_correlation(std::span<const double> a, std::span<const double> b) {
  const double sa = stddev(a);
  if (sa == 0.0) return 0.0;
  return covariance(a, b) / sa;
}

inline std::vector<double> squared(std::span<const double> a) {
  std::vector<double> out(a.begin(), a.end());
  for (double& x : out) x *= x;
  return out;
}

inline std::vector<double> centered(std::span<const double> a) {
  const double m = mean(a);
  std::vector<double> out(a.begin(), a.end());
  for (double& x : out) x -= m;
  return out;
}

// Percentile with linear interpolation between order statistics (type 7).
// `sorted` must be ascending and nonempty.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw PreconditionError("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace degroot::stats
