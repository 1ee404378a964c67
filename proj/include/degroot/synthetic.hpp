#pragma once

// Synthetic trial data in the estimate / communicate / re-estimate schema,
// produced by running DeGroot dynamics on generated networks. Stands in for
// the original experimental datasets in tests and fixtures.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "degroot/dynamics.hpp"
#include "degroot/empirical.hpp"
#include "degroot/influence_network.hpp"
#include "degroot/random.hpp"

namespace degroot::empirical {

enum class PostMode {
  converged,    // post = DeGroot dynamics iterated to convergence
  interpolate,  // post = pre + lambda * (consensus - pre)
  steps,        // post = opinions after `steps` DeGroot updates
};

struct SyntheticOptions {
  std::size_t experiments = 2;
  std::size_t groups_per_experiment = 20;
  std::size_t questions_per_group = 1;
  std::size_t n_min = 3;
  std::size_t n_max = 12;
  PostMode mode = PostMode::converged;
  double lambda = 0.5;
  std::size_t steps = 2;
  std::uint64_t seed = 1;
  // Cycle trial conditions through decentralized, centralized, discussion,
  // control. Control groups keep their estimates unless `control_noise` > 0,
  // in which case about half the subjects revise by that much noise.
  bool mixed_conditions = false;
  double control_noise = 0.0;
};

namespace detail {

inline InfluenceMatrix network_for(Condition c, std::size_t n, rng::Engine& eng) {
  switch (c) {
    case Condition::centralized: {
      GeneratorParams p;
      p.hub_weight = rng::uniform(eng, 0.3, 0.8);
      p.leader = static_cast<std::size_t>(rng::uniform_int(eng, 0, static_cast<std::int64_t>(n) - 1));
      return generate(GeneratorKind::star, n, 0, p);
    }
    case Condition::decentralized:
    case Condition::discussion:
    case Condition::control:
      return generate(GeneratorKind::random_row_stochastic, n, eng());
  }
  return generate(GeneratorKind::uniform, n);
}

}  // namespace detail

inline std::vector<TrialRecord> make_synthetic_trials(const SyntheticOptions& opt) {
  if (opt.n_min < 2 || opt.n_max < opt.n_min) throw PreconditionError("synthetic trials need 2 <= n_min <= n_max");
  std::vector<TrialRecord> out;
  static constexpr Condition kCycle[] = {Condition::decentralized, Condition::centralized, Condition::discussion,
                                         Condition::control};
  std::size_t group_counter = 0;
  for (std::size_t ex = 0; ex < opt.experiments; ++ex) {
    for (std::size_t g = 0; g < opt.groups_per_experiment; ++g, ++group_counter) {
      auto eng = rng::make_engine(opt.seed, group_counter);
      const auto n = static_cast<std::size_t>(
          rng::uniform_int(eng, static_cast<std::int64_t>(opt.n_min), static_cast<std::int64_t>(opt.n_max)));
      const Condition cond = opt.mixed_conditions ? kCycle[group_counter % 4] : Condition::decentralized;
      // Persistent per-subject noise level so accuracy carries across questions.
      std::vector<double> skill(n);
      for (auto& s : skill) s = rng::uniform(eng, 0.3, 2.0);
      for (std::size_t q = 0; q < opt.questions_per_group; ++q) {
        TrialRecord t;
        t.experiment_id = "exp" + std::to_string(ex + 1);
        t.trial_id = "g" + std::to_string(g + 1);
        t.question_id = "q" + std::to_string(q + 1);
        t.condition = cond;
        t.truth = std::round(rng::uniform(eng, 10.0, 100.0));
        const double shared_bias = rng::normal(eng, 0.0, 1.0);
        Opinions pre(n);
        for (std::size_t i = 0; i < n; ++i) pre[i] = t.truth + shared_bias + skill[i] * rng::normal(eng);
        const auto w = detail::network_for(cond, n, eng);
        Opinions post;
        if (cond == Condition::control && opt.mixed_conditions) {
          post = pre;
          if (opt.control_noise > 0.0) {
            for (auto& x : post) {
              const double u = rng::uniform01(eng);
              const double noise = rng::normal(eng, 0.0, opt.control_noise);
              if (u < 0.5) x += noise;
            }
          }
        } else {
          switch (opt.mode) {
            case PostMode::converged:
              post = iterate_to_convergence(w, pre).final_state();
              break;
            case PostMode::interpolate: {
              const double consensus = asymptotic_consensus(leading_influence_vector(w), pre);
              post = pre;
              for (auto& x : post) x += opt.lambda * (consensus - x);
              break;
            }
            case PostMode::steps: {
              post = pre;
              for (std::size_t k = 0; k < opt.steps; ++k) post = degroot_step(w, post);
              break;
            }
          }
        }
        for (std::size_t i = 0; i < n; ++i) {
          t.subjects.push_back({t.trial_id + "-s" + std::to_string(i + 1), pre[i], post[i]});
        }
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

}  // namespace degroot::empirical
