#pragma once

// Monte Carlo check of the closed-form asymptotic error changes against
// direct DeGroot simulation on random row-stochastic networks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "degroot/accuracy_metrics.hpp"
#include "degroot/dynamics.hpp"
#include "degroot/influence_network.hpp"
#include "degroot/random.hpp"

namespace degroot {

struct VerifyOptions {
  std::size_t trials = 1000;
  std::size_t n_min = 2;
  std::size_t n_max = 20;
  std::uint64_t seed = 7;
  double sim_tol = 1e-10;
  std::size_t max_steps = 100'000;
  double tolerance = 1e-6;  // on relative deviation
};

struct VerifySample {
  std::size_t n = 0;
  CrowdStats stats;
  double alpha_decomposed = 0.0;
  double consensus_predicted = 0.0;
  double consensus_simulated = 0.0;
  double delta_z_predicted = 0.0;
  double delta_z_simulated = 0.0;
  ErrorChange predicted;
  ErrorChange simulated;
  bool converged = false;
  std::size_t steps = 0;
};

struct VerifyReport {
  VerifyOptions options;
  std::vector<VerifySample> samples;
  double max_crowd_deviation = 0.0;       // relative
  double max_individual_deviation = 0.0;  // relative
  double max_consensus_deviation = 0.0;   // absolute, task units
  double max_alpha_identity_deviation = 0.0;
  double max_offset_deviation = 0.0;      // |(crowd - individual) - 1| on simulation
  std::size_t non_converged = 0;

  bool passed() const {
    return non_converged == 0 && max_crowd_deviation <= options.tolerance &&
           max_individual_deviation <= options.tolerance;
  }
};

// |a - b| / max(1, |b|): relative for large values, absolute near zero where
// a pure relative measure is meaningless.
inline double relative_deviation(double actual, double expected) {
  return std::abs(actual - expected) / std::max(1.0, std::abs(expected));
}

inline VerifySample verify_one(const InfluenceMatrix& w, std::span<const double> x0, double truth,
                               const VerifyOptions& opt) {
  VerifySample s;
  s.n = w.size();
  const auto v = leading_influence_vector(w);
  const auto e = bias_transform(x0, truth);
  const auto pred = predict(v, e);
  s.stats = pred.stats;
  s.alpha_decomposed = pred.alpha_decomposed;
  s.predicted = {pred.crowd_change, pred.individual_change};
  s.delta_z_predicted = pred.delta_z;
  s.consensus_predicted = asymptotic_consensus(v, x0);

  IterationOptions it;
  it.tol = opt.sim_tol;
  it.max_steps = opt.max_steps;
  const auto traj = iterate_to_convergence(w, x0, it);
  s.converged = traj.converged;
  s.steps = traj.steps;
  const auto& xf = traj.final_state();
  s.consensus_simulated = stats::mean(xf);
  const auto e_final = bias_transform(xf, truth);
  s.simulated = standardized_error_changes(e, e_final);
  s.delta_z_simulated = (stats::mean(e_final) - stats::mean(e)) / stats::stddev(e);
  return s;
}

inline VerifyReport run_verification(const VerifyOptions& opt) {
  if (opt.n_min < 2 || opt.n_max < opt.n_min) throw PreconditionError("verify needs 2 <= n_min <= n_max");
  VerifyReport rep;
  rep.options = opt;
  rep.samples.reserve(opt.trials);
  for (std::size_t t = 0; t < opt.trials; ++t) {
    auto eng = rng::make_engine(opt.seed, t);
    const auto n = static_cast<std::size_t>(
        rng::uniform_int(eng, static_cast<std::int64_t>(opt.n_min), static_cast<std::int64_t>(opt.n_max)));
    const auto w = generate(GeneratorKind::random_row_stochastic, n, eng());
    std::vector<double> x(n);
    for (auto& xi : x) xi = rng::normal(eng);
    const double truth = rng::normal(eng);
    auto s = verify_one(w, x, truth, opt);

    rep.max_crowd_deviation = std::max(rep.max_crowd_deviation, relative_deviation(s.simulated.crowd, s.predicted.crowd));
    rep.max_individual_deviation =
        std::max(rep.max_individual_deviation, relative_deviation(s.simulated.individual, s.predicted.individual));
    rep.max_consensus_deviation =
        std::max(rep.max_consensus_deviation, std::abs(s.consensus_simulated - s.consensus_predicted));
    rep.max_alpha_identity_deviation =
        std::max(rep.max_alpha_identity_deviation, std::abs(s.stats.alpha - s.alpha_decomposed));
    rep.max_offset_deviation =
        std::max(rep.max_offset_deviation, std::abs(s.simulated.crowd - s.simulated.individual - 1.0));
    if (!s.converged) ++rep.non_converged;
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

}  // namespace degroot
