#pragma once

// JSON and CSV reports for the command-line tool. Non-finite numbers are
// written as JSON null.

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "degroot/accuracy_metrics.hpp"
#include "degroot/dynamics.hpp"
#include "degroot/empirical.hpp"
#include "degroot/verify.hpp"

namespace degroot::report {

using nlohmann::ordered_json;

inline ordered_json number(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

inline ordered_json to_json(const CrowdStats& s) {
  return {{"z", number(s.z)},
          {"s_e", number(s.s_e)},
          {"c_v", number(s.c_v)},
          {"r_ve", number(s.r_ve)},
          {"alpha", number(s.alpha)},
          {"calibration", number(s.calibration)},
          {"herding", number(s.herding)},
          {"s_e2", number(s.s_e2)},
          {"s_d2", number(s.s_d2)}};
}

inline ordered_json to_json(const Prediction& p) {
  ordered_json j;
  j["crowd_stats"] = to_json(p.stats);
  j["delta_z"] = number(p.delta_z);
  j["alpha"] = number(p.stats.alpha);
  j["alpha_decomposed"] = number(p.alpha_decomposed);
  j["crowd_change"] = number(p.crowd_change);
  j["individual_change"] = number(p.individual_change);
  j["crowd_change_raw"] = number(p.crowd_change_raw);
  j["individual_change_raw"] = number(p.individual_change_raw);
  if (p.regions_defined) {
    j["crowd_improves"] = p.regions.crowd_improves;
    j["individual_improves"] = p.regions.individual_improves;
  } else {
    j["crowd_improves"] = nullptr;
    j["individual_improves"] = nullptr;
  }
  return j;
}

inline ordered_json to_json(std::span<const double> v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

inline ordered_json trajectory_summary(const Trajectory& t) {
  return {{"converged", t.converged},
          {"steps", t.steps},
          {"spread_final", number(t.spread_final)},
          {"final", to_json(t.final_state())}};
}

inline ordered_json to_json(const VerifyReport& r) {
  return {{"trials", r.options.trials},
          {"n_min", r.options.n_min},
          {"n_max", r.options.n_max},
          {"seed", r.options.seed},
          {"sim_tol", r.options.sim_tol},
          {"tolerance", r.options.tolerance},
          {"max_crowd_deviation", number(r.max_crowd_deviation)},
          {"max_individual_deviation", number(r.max_individual_deviation)},
          {"max_consensus_deviation", number(r.max_consensus_deviation)},
          {"max_alpha_identity_deviation", number(r.max_alpha_identity_deviation)},
          {"max_offset_deviation", number(r.max_offset_deviation)},
          {"non_converged", r.non_converged},
          {"passed", r.passed()}};
}

inline ordered_json to_json(const empirical::Interval& i) { return ordered_json::array({number(i.lo), number(i.hi)}); }

inline ordered_json to_json(const empirical::RegressionResult& r) {
  return {{"slope", number(r.slope)},
          {"intercept", number(r.intercept)},
          {"slope_ci", to_json(r.slope_ci)},
          {"intercept_ci", to_json(r.intercept_ci)},
          {"slope_ci_bootstrap", to_json(r.slope_ci_bootstrap)},
          {"intercept_ci_bootstrap", to_json(r.intercept_ci_bootstrap)},
          {"n_included", r.n_included},
          {"n_excluded", r.n_excluded},
          {"threshold", number(r.threshold_used)},
          {"filter", empirical::to_string(r.filter)}};
}

inline ordered_json to_json(const empirical::CellEstimate& c) {
  return {{"probability", c.probability ? number(*c.probability) : ordered_json(nullptr)},
          {"ci", to_json(c.ci)},
          {"trials", c.units},
          {"trials_defined", c.defined_units},
          {"subjects", c.subjects},
          {"revised", c.revised},
          {"improved", c.improved},
          {"worsened", c.worsened},
          {"unrevised", c.unchanged}};
}

inline ordered_json to_json(const empirical::ImprovementTable& t) {
  ordered_json cells = ordered_json::array();
  for (const auto& c : t.cells) {
    ordered_json j = {{"condition", empirical::to_string(c.condition)}, {"group_improved", c.group_improved}};
    j.update(to_json(c.estimate));
    cells.push_back(j);
  }
  return {{"metric", empirical::to_string(t.metric)},
          {"group_rule", empirical::to_string(t.group_rule)},
          {"cells", cells}};
}

inline ordered_json to_json(const empirical::QuartileReport& r, const std::vector<empirical::ImprovementMetric>& metrics) {
  ordered_json j;
  j["skipped"] = r.skipped;
  if (r.skipped) {
    j["reason"] = r.reason;
    return j;
  }
  j["assigned"] = r.assignments.size();
  ordered_json per = ordered_json::array();
  for (int q = 1; q <= 4; ++q) {
    ordered_json row = {{"quartile", q}};
    for (auto m : metrics) row[empirical::to_string(m)] = to_json(r.at(m, q));
    per.push_back(row);
  }
  j["quartiles"] = per;
  return j;
}

inline std::string improvement_tables_csv(const std::vector<empirical::ImprovementTable>& tables) {
  std::string out = "metric,group_rule,condition,group_improved,probability,ci_lo,ci_hi,trials,subjects,revised,improved,worsened\n";
  for (const auto& t : tables) {
    for (const auto& c : t.cells) {
      const auto& e = c.estimate;
      out += std::string(empirical::to_string(t.metric)) + ',' + empirical::to_string(t.group_rule) + ',' +
             empirical::to_string(c.condition) + ',' + (c.group_improved ? "1" : "0") + ',' +
             (e.probability ? csv::format_double(*e.probability) : "") + ',' +
             (std::isfinite(e.ci.lo) ? csv::format_double(e.ci.lo) : "") + ',' +
             (std::isfinite(e.ci.hi) ? csv::format_double(e.ci.hi) : "") + ',' + std::to_string(e.units) + ',' +
             std::to_string(e.subjects) + ',' + std::to_string(e.revised) + ',' + std::to_string(e.improved) + ',' +
             std::to_string(e.worsened) + '\n';
    }
  }
  return out;
}

inline std::string trial_changes_csv(const std::vector<empirical::LabeledChange>& changes) {
  std::string out = "experiment_id,trial_id,question_id,condition,x_individual,y_crowd,offset,in_unit_band\n";
  for (const auto& c : changes) {
    out += c.experiment_id + ',' + c.trial_id + ',' + c.question_id + ',' + empirical::to_string(c.condition) + ',' +
           csv::format_double(c.change.x_individual) + ',' + csv::format_double(c.change.y_crowd) + ',' +
           csv::format_double(c.change.offset) + ',' + (c.change.in_unit_band() ? "1" : "0") + '\n';
  }
  return out;
}

inline std::string quartiles_csv(const empirical::QuartileReport& r) {
  std::string out = "experiment_id,trial_id,question_id,subject_id,other_question_error,quartile\n";
  for (const auto& a : r.assignments) {
    out += a.experiment_id + ',' + a.trial_id + ',' + a.question_id + ',' + a.subject_id + ',' +
           csv::format_double(a.other_question_error) + ',' + std::to_string(a.quartile) + '\n';
  }
  return out;
}

}  // namespace degroot::report
