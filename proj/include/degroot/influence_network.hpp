#pragma once

// Influence networks for DeGroot updating: a row-stochastic matrix W where
// w_ij is the weight agent i places on agent j's opinion, the stationary
// (left leading) eigenvector v of W, and influence centralization c_v.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "degroot/csv.hpp"
#include "degroot/error.hpp"
#include "degroot/random.hpp"

namespace degroot {

inline constexpr double kRowSumTolerance = 1e-9;

class InfluenceMatrix {
 public:
  // Throws PreconditionError unless rows form an n x n (n >= 2) matrix of
  // finite, non-negative weights whose rows sum to 1 within kRowSumTolerance.
  static InfluenceMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    if (n < 2) throw PreconditionError("influence matrix needs at least 2 agents, got " + std::to_string(n));
    std::vector<double> w;
    w.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) {
        throw PreconditionError("influence matrix row " + std::to_string(i) + " has " +
                                std::to_string(rows[i].size()) + " entries, expected " + std::to_string(n));
      }
      w.insert(w.end(), rows[i].begin(), rows[i].end());
    }
    return InfluenceMatrix(n, std::move(w));
  }

  // Row-major weights, n*n entries.
  static InfluenceMatrix from_row_major(std::size_t n, std::vector<double> weights) {
    if (n < 2) throw PreconditionError("influence matrix needs at least 2 agents, got " + std::to_string(n));
    if (weights.size() != n * n) throw PreconditionError("influence matrix: expected n*n weights");
    return InfluenceMatrix(n, std::move(weights));
  }

  static InfluenceMatrix identity(std::size_t n) {
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 1.0;
    return from_row_major(n, std::move(w));
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return weights_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {weights_.data() + i * n_, n_}; }
  std::span<const double> data() const noexcept { return weights_; }

  friend bool operator==(const InfluenceMatrix&, const InfluenceMatrix&) = default;

 private:
  InfluenceMatrix(std::size_t n, std::vector<double> w) : n_(n), weights_(std::move(w)) {
    for (std::size_t i = 0; i < n_; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        const double x = weights_[i * n_ + j];
        if (!std::isfinite(x) || x < 0.0) {
          throw PreconditionError("influence weight (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") must be finite and non-negative");
        }
        sum += x;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw PreconditionError("influence matrix row " + std::to_string(i) + " sums to " +
                                csv::format_double(sum) + ", expected 1");
      }
    }
  }

  std::size_t n_;
  std::vector<double> weights_;
};

// Normalized influence shares; entries are non-negative and sum to 1.
class CentralityVector {
 public:
  explicit CentralityVector(std::vector<double> v) : v_(std::move(v)) {
    if (v_.size() < 2) throw PreconditionError("centrality vector needs at least 2 entries");
    double sum = 0.0;
    for (double x : v_) {
      if (!std::isfinite(x) || x < 0.0) throw PreconditionError("centrality entries must be finite and non-negative");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw PreconditionError("centrality vector sums to " + csv::format_double(sum) + ", expected 1");
    }
  }

  std::size_t size() const noexcept { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> values() const noexcept { return v_; }

 private:
  std::vector<double> v_;
};

inline CentralityVector uniform_centrality(std::size_t n) {
  return CentralityVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

// Full-centralization limit: one agent holds all influence. No strongly
// connected network attains this exactly; the dictator generator approaches it.
inline CentralityVector dictator_limit_centrality(std::size_t n, std::size_t leader = 0) {
  if (leader >= n) throw PreconditionError("leader index out of range");
  std::vector<double> v(n, 0.0);
  v[leader] = 1.0;
  return CentralityVector(std::move(v));
}

struct NetworkDiagnostics {
  bool row_stochastic = false;
  bool strongly_connected = false;
  bool aperiodic = false;
  double max_row_sum_error = 0.0;

  bool ok() const noexcept { return row_stochastic && strongly_connected && aperiodic; }
};

namespace detail {

// Vertices reachable from 0 following either influence direction.
inline std::vector<bool> reachable_from_zero(std::span<const double> w, std::size_t n, bool forward) {
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> q;
  seen[0] = true;
  q.push(0);
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t k = 0; k < n; ++k) {
      // Edge j -> i exists when w_ij > 0 (j influences i).
      const double weight = forward ? w[k * n + u] : w[u * n + k];
      if (weight > 0.0 && !seen[k]) {
        seen[k] = true;
        q.push(k);
      }
    }
  }
  return seen;
}

// Period of the component containing vertex 0: gcd over edges u->v of
// level(u) + 1 - level(v), with BFS levels from 0.
inline std::size_t period_from_zero(std::span<const double> w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i * n + i] > 0.0) return 1;
  }
  std::vector<long> level(n, -1);
  std::queue<std::size_t> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (std::size_t v = 0; v < n; ++v) {
      if (w[v * n + u] > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  long g = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (level[u] < 0) continue;
    for (std::size_t v = 0; v < n; ++v) {
      if (w[v * n + u] > 0.0 && level[v] >= 0) g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    }
  }
  return static_cast<std::size_t>(g);
}

}  // namespace detail

// Diagnostics on raw row-major weights; never throws for consistent sizes.
inline NetworkDiagnostics diagnose(std::span<const double> w, std::size_t n) {
  NetworkDiagnostics d;
  if (n == 0 || w.size() != n * n) return d;
  d.row_stochastic = true;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = w[i * n + j];
      if (!std::isfinite(x) || x < 0.0) d.row_stochastic = false;
      sum += x;
    }
    const double err = std::abs(sum - 1.0);
    d.max_row_sum_error = std::max(d.max_row_sum_error, std::isfinite(err) ? err : HUGE_VAL);
  }
  if (d.max_row_sum_error > kRowSumTolerance) d.row_stochastic = false;

  const auto fwd = detail::reachable_from_zero(w, n, true);
  const auto bwd = detail::reachable_from_zero(w, n, false);
  d.strongly_connected = std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
                         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
  d.aperiodic = detail::period_from_zero(w, n) == 1;
  return d;
}

inline NetworkDiagnostics validate(const InfluenceMatrix& m) { return diagnose(m.data(), m.size()); }

inline void require_ergodic(const InfluenceMatrix& m) {
  const auto d = validate(m);
  if (!d.row_stochastic) throw PreconditionError("influence network is not row-stochastic");
  if (!d.strongly_connected) throw PreconditionError("influence network is not strongly connected");
  if (!d.aperiodic) throw PreconditionError("influence network is periodic");
}

// Stationary distribution v = v W by power iteration, renormalized each step.
inline CentralityVector leading_influence_vector(const InfluenceMatrix& m, double tol = 1e-12,
                                                 std::size_t max_iter = 1'000'000) {
  if (!(tol > 0.0)) throw PreconditionError("tolerance must be positive");
  require_ergodic(m);
  const std::size_t n = m.size();
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = m.row(i);
      for (std::size_t j = 0; j < n; ++j) next[j] += v[i] * r[j];
    }
    const double sum = std::accumulate(next.begin(), next.end(), 0.0);
    double delta = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= sum;
      delta = std::max(delta, std::abs(next[j] - v[j]));
    }
    v.swap(next);
    if (delta < tol) return CentralityVector(std::move(v));
  }
  throw ConvergenceError("leading influence vector did not converge", max_iter);
}

// Coefficient of variation s_v / E(v) with the population standard deviation.
inline double influence_centralization(const CentralityVector& v) {
  const auto n = static_cast<double>(v.size());
  const auto vals = v.values();
  const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : vals) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / n) / mean;
}

// ---------------------------------------------------------------------------
// Generators

enum class GeneratorKind { uniform, dictator, star, random_row_stochastic };

struct GeneratorParams {
  // dictator: every agent puts `dominance` on the leader and spreads the rest
  // uniformly over everyone. Must lie in [0, 1).
  double dominance = 0.9;
  std::size_t leader = 0;
  // star: leaves put `hub_weight` on the hub and the rest on themselves; the
  // hub listens to everyone equally. Must lie in (0, 1).
  double hub_weight = 0.5;
  // random_row_stochastic: rows are min_self_weight * e_i plus
  // (1 - min_self_weight) * (a uniform draw from the simplex).
  double min_self_weight = 0.05;
};

inline GeneratorKind parse_generator_kind(const std::string& s) {
  if (s == "uniform") return GeneratorKind::uniform;
  if (s == "dictator") return GeneratorKind::dictator;
  if (s == "star") return GeneratorKind::star;
  if (s == "random" || s == "random_row_stochastic") return GeneratorKind::random_row_stochastic;
  throw PreconditionError("unknown generator kind '" + s + "'");
}

inline InfluenceMatrix generate(GeneratorKind kind, std::size_t n, std::uint64_t seed = 0,
                                const GeneratorParams& params = {}) {
  if (n < 2) throw PreconditionError("generator needs n >= 2");
  const double nd = static_cast<double>(n);
  std::vector<double> w(n * n, 0.0);
  switch (kind) {
    case GeneratorKind::uniform:
      std::fill(w.begin(), w.end(), 1.0 / nd);
      break;
    case GeneratorKind::dictator: {
      const double d = params.dominance;
      if (!(d >= 0.0 && d < 1.0)) {
        throw PreconditionError("dictator dominance must lie in [0, 1); use dictator_limit_centrality for the limit");
      }
      if (params.leader >= n) throw PreconditionError("leader index out of range");
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) w[i * n + j] = (1.0 - d) / nd;
        w[i * n + params.leader] += d;
      }
      break;
    }
    case GeneratorKind::star: {
      const double h = params.hub_weight;
      if (!(h > 0.0 && h < 1.0)) throw PreconditionError("star hub_weight must lie in (0, 1)");
      if (params.leader >= n) throw PreconditionError("hub index out of range");
      const std::size_t hub = params.leader;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == hub) {
          for (std::size_t j = 0; j < n; ++j) w[i * n + j] = 1.0 / nd;
        } else {
          w[i * n + hub] = h;
          w[i * n + i] = 1.0 - h;
        }
      }
      break;
    }
    case GeneratorKind::random_row_stochastic: {
      const double m = params.min_self_weight;
      if (!(m > 0.0 && m < 1.0)) throw PreconditionError("min_self_weight must lie in (0, 1)");
      auto eng = rng::make_engine(seed);
      std::vector<double> draw(n);
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (auto& x : draw) {
          do {
            x = rng::exponential(eng);
          } while (x == 0.0);
          sum += x;
        }
        for (std::size_t j = 0; j < n; ++j) w[i * n + j] = (1.0 - m) * draw[j] / sum;
        w[i * n + i] += m;
      }
      break;
    }
  }
  return InfluenceMatrix::from_row_major(n, std::move(w));
}

// ---------------------------------------------------------------------------
// CSV: n rows of n comma-separated weights, no header.

inline InfluenceMatrix load_influence_matrix(const std::filesystem::path& path) {
  return InfluenceMatrix::from_rows(csv::read_numeric_table(path));
}

inline std::string to_csv(const InfluenceMatrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j) out += ',';
      out += csv::format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace degroot
