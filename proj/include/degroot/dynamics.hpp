#pragma once

// DeGroot belief updating x_{t+1} = W x_t and its asymptotic consensus.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "degroot/csv.hpp"
#include "degroot/error.hpp"
#include "degroot/influence_network.hpp"
#include "degroot/stats.hpp"

namespace degroot {

using Opinions = std::vector<double>;

// Opinions with an optional ground truth. Bias e = x - truth, distance
// d = x - E(x).
class BeliefState {
 public:
  explicit BeliefState(Opinions x, std::optional<double> truth = std::nullopt)
      : x_(std::move(x)), truth_(truth) {
    if (x_.empty()) throw PreconditionError("belief state needs at least one opinion");
    for (double xi : x_) {
      if (!std::isfinite(xi)) throw PreconditionError("opinions must be finite");
    }
    if (truth_ && !std::isfinite(*truth_)) throw PreconditionError("truth must be finite");
  }

  std::span<const double> opinions() const noexcept { return x_; }
  std::optional<double> truth() const noexcept { return truth_; }

  std::vector<double> bias() const {
    if (!truth_) throw PreconditionError("bias requires a truth value");
    std::vector<double> e(x_);
    for (double& v : e) v -= *truth_;
    return e;
  }

  std::vector<double> distance() const { return stats::centered(x_); }

 private:
  Opinions x_;
  std::optional<double> truth_;
};

struct Trajectory {
  // All states when recorded, otherwise just the initial and final state.
  std::vector<Opinions> states;
  bool converged = false;
  std::size_t steps = 0;
  double spread_final = 0.0;

  const Opinions& initial() const { return states.front(); }
  const Opinions& final_state() const { return states.back(); }
};

inline double spread(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

inline void degroot_step_into(const InfluenceMatrix& m, std::span<const double> x, std::span<double> out) {
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += r[j] * x[j];
    out[i] = acc;
  }
}

inline Opinions degroot_step(const InfluenceMatrix& m, std::span<const double> x) {
  if (x.size() != m.size()) {
    throw PreconditionError("opinion vector has " + std::to_string(x.size()) + " entries, network has " +
                            std::to_string(m.size()) + " agents");
  }
  Opinions out(x.size());
  degroot_step_into(m, x, out);
  return out;
}

struct IterationOptions {
  double tol = 1e-10;
  std::size_t max_steps = 100'000;
  bool record = false;
};

// Steps until both the step change and the spread of opinions fall below
// tol, or max_steps is reached. Non-convergence is reported, not thrown, so
// periodic or reducible networks can be studied deliberately.
inline Trajectory iterate_to_convergence(const InfluenceMatrix& m, std::span<const double> x0,
                                         const IterationOptions& opt = {}) {
  if (x0.size() != m.size()) throw PreconditionError("opinion vector length does not match network size");
  if (!(opt.tol > 0.0)) throw PreconditionError("tolerance must be positive");
  Trajectory traj;
  traj.states.emplace_back(x0.begin(), x0.end());
  Opinions cur(x0.begin(), x0.end());
  Opinions next(cur.size());
  traj.spread_final = spread(cur);
  while (traj.steps < opt.max_steps) {
    degroot_step_into(m, cur, next);
    ++traj.steps;
    double delta = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) delta = std::max(delta, std::abs(next[i] - cur[i]));
    cur.swap(next);
    traj.spread_final = spread(cur);
    if (opt.record) traj.states.push_back(cur);
    if (delta < opt.tol && traj.spread_final < opt.tol) {
      traj.converged = true;
      break;
    }
  }
  if (!opt.record || traj.steps == 0) traj.states.push_back(cur);
  return traj;
}

inline double asymptotic_consensus(const CentralityVector& v, std::span<const double> x0) {
  if (v.size() != x0.size()) throw PreconditionError("centrality and opinion lengths differ");
  double acc = 0.0;
  for (std::size_t j = 0; j < x0.size(); ++j) acc += v[j] * x0[j];
  return acc;
}

inline std::vector<double> bias_transform(std::span<const double> x, double truth) {
  if (!std::isfinite(truth)) throw PreconditionError("truth must be finite");
  std::vector<double> e(x.begin(), x.end());
  for (double& v : e) v -= truth;
  return e;
}

// ---------------------------------------------------------------------------
// CSV

inline Opinions load_opinions(const std::filesystem::path& path) {
  Opinions x;
  for (const auto& row : csv::read_numeric_table(path)) {
    if (row.size() != 1) throw PreconditionError(path.string() + ": opinions file must have one column");
    x.push_back(row[0]);
  }
  if (x.empty()) throw PreconditionError(path.string() + ": no opinions");
  return x;
}

inline std::string opinions_to_csv(std::span<const double> x) {
  std::string out;
  for (double v : x) out += csv::format_double(v) + '\n';
  return out;
}

// One row per retained state: step index then the n opinions.
inline std::string trajectory_to_csv(const Trajectory& t) {
  std::string out = "step";
  const std::size_t n = t.states.front().size();
  for (std::size_t i = 0; i < n; ++i) out += ",x" + std::to_string(i);
  out += '\n';
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    const std::size_t step = (t.states.size() == t.steps + 1) ? k : (k == 0 ? 0 : t.steps);
    out += std::to_string(step);
    for (double v : t.states[k]) out += ',' + csv::format_double(v);
    out += '\n';
  }
  return out;
}

}  // namespace degroot
