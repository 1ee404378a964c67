#pragma once

// Reanalysis of estimate / communicate / re-estimate experiments: per-trial
// standardized error changes, the crowd-vs-individual regression, the share
// of trials inside the theoretical band, improvement probabilities split by
// condition and group outcome, and the accuracy-quartile effect. Every
// aggregate weights experiments equally and carries a percentile bootstrap
// interval over trials.

#include <algorithm>
#include <array>
#include <concepts>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "degroot/accuracy_metrics.hpp"
#include "degroot/csv.hpp"
#include "degroot/error.hpp"
#include "degroot/random.hpp"
#include "degroot/stats.hpp"

namespace degroot::empirical {

enum class Condition { decentralized, centralized, discussion, control };

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::decentralized: return "decentralized";
    case Condition::centralized: return "centralized";
    case Condition::discussion: return "discussion";
    case Condition::control: return "control";
  }
  return "?";
}

inline std::optional<Condition> parse_condition(std::string_view s) {
  if (s == "decentralized" || s == "decentralised") return Condition::decentralized;
  if (s == "centralized" || s == "centralised") return Condition::centralized;
  if (s == "discussion") return Condition::discussion;
  if (s == "control") return Condition::control;
  return std::nullopt;
}

struct SubjectEstimate {
  std::string subject_id;
  double pre = 0.0;
  double post = 0.0;
};

// One group answering one question.
struct TrialRecord {
  std::string experiment_id;
  std::string trial_id;
  Condition condition = Condition::decentralized;
  std::string question_id;
  double truth = 0.0;
  std::vector<SubjectEstimate> subjects;

  std::vector<double> bias_pre() const {
    std::vector<double> e;
    e.reserve(subjects.size());
    for (const auto& s : subjects) e.push_back(s.pre - truth);
    return e;
  }
  std::vector<double> bias_post() const {
    std::vector<double> e;
    e.reserve(subjects.size());
    for (const auto& s : subjects) e.push_back(s.post - truth);
    return e;
  }
  double s_e() const { return stats::stddev(bias_pre()); }
  // Zero initial diversity excludes a trial from standardized analyses.
  bool standardizable() const { return s_e() > 0.0; }
};

struct Rejection {
  std::size_t line = 0;  // 0 for trial-level rejections
  std::string trial_key;
  std::string reason;
};

struct LoadResult {
  std::vector<TrialRecord> trials;
  std::vector<Rejection> rejections;

  std::size_t non_standardizable() const {
    return static_cast<std::size_t>(
        std::count_if(trials.begin(), trials.end(), [](const TrialRecord& t) { return !t.standardizable(); }));
  }
};

inline constexpr std::array<const char*, 8> kTrialColumns = {
    "experiment_id", "trial_id", "condition", "question_id", "subject_id", "truth", "estimate_pre", "estimate_post"};

// Parses trial CSV text given as lines (header first). Rows are grouped into
// trials by (experiment_id, trial_id, question_id) in order of first
// appearance. Row-level problems and invalid trials end up in `rejections`;
// only a missing or malformed header is fatal.
inline LoadResult parse_trials(const std::vector<std::string>& lines, const std::string& source = "<input>") {
  std::size_t header_line = 0;
  while (header_line < lines.size() && csv::trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) throw PreconditionError(source + ": missing header");
  std::string header_text = lines[header_line];
  if (header_text.rfind("\xEF\xBB\xBF", 0) == 0) header_text.erase(0, 3);
  const auto header = csv::split_line(header_text);
  std::array<std::size_t, kTrialColumns.size()> col{};
  for (std::size_t k = 0; k < kTrialColumns.size(); ++k) {
    const auto it = std::find(header.begin(), header.end(), kTrialColumns[k]);
    if (it == header.end()) {
      throw PreconditionError(source + ": malformed header, missing column '" + kTrialColumns[k] + "'");
    }
    col[k] = static_cast<std::size_t>(it - header.begin());
  }

  struct Pending {
    TrialRecord record;
    std::vector<std::string> problems;
  };
  LoadResult result;
  std::vector<Pending> pending;
  std::unordered_map<std::string, std::size_t> index;

  for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
    const std::size_t lineno = li + 1;
    if (csv::trim(lines[li]).empty()) continue;
    const auto f = csv::split_line(lines[li]);
    if (f.size() != header.size()) {
      result.rejections.push_back({lineno, "", "expected " + std::to_string(header.size()) + " fields, got " +
                                                  std::to_string(f.size())});
      continue;
    }
    const auto& exp = f[col[0]];
    const auto& trial = f[col[1]];
    const auto& question = f[col[3]];
    const auto& subject = f[col[4]];
    const std::string key = exp + "/" + trial + "/" + question;
    const auto cond = parse_condition(f[col[2]]);
    const auto truth = csv::parse_double(f[col[5]]);
    const auto pre = csv::parse_double(f[col[6]]);
    const auto post = csv::parse_double(f[col[7]]);
    std::string reason;
    if (exp.empty() || trial.empty() || question.empty() || subject.empty()) reason = "empty identifier";
    else if (!cond) reason = "unknown condition '" + f[col[2]] + "'";
    else if (!truth) reason = "truth is not a finite number: '" + f[col[5]] + "'";
    else if (!pre) reason = "estimate_pre is not a finite number: '" + f[col[6]] + "'";
    else if (!post) reason = "estimate_post is not a finite number: '" + f[col[7]] + "'";
    if (!reason.empty()) {
      result.rejections.push_back({lineno, key, reason});
      continue;
    }

    auto [it, inserted] = index.try_emplace(key, pending.size());
    if (inserted) {
      Pending p;
      p.record.experiment_id = exp;
      p.record.trial_id = trial;
      p.record.question_id = question;
      p.record.condition = *cond;
      p.record.truth = *truth;
      pending.push_back(std::move(p));
    }
    auto& p = pending[it->second];
    if (p.record.condition != *cond) {
      p.problems.push_back("line " + std::to_string(lineno) + ": condition differs within trial");
    } else if (p.record.truth != *truth) {
      p.problems.push_back("line " + std::to_string(lineno) + ": truth differs within trial");
    } else if (std::any_of(p.record.subjects.begin(), p.record.subjects.end(),
                           [&](const SubjectEstimate& s) { return s.subject_id == subject; })) {
      result.rejections.push_back({lineno, key, "duplicate subject '" + subject + "' in trial"});
    } else {
      p.record.subjects.push_back({subject, *pre, *post});
    }
  }

  for (auto& p : pending) {
    const std::string key = p.record.experiment_id + "/" + p.record.trial_id + "/" + p.record.question_id;
    if (!p.problems.empty()) {
      std::string reason;
      for (const auto& s : p.problems) reason += (reason.empty() ? "" : "; ") + s;
      result.rejections.push_back({0, key, reason});
    } else if (p.record.subjects.size() < 2) {
      result.rejections.push_back({0, key, "fewer than 2 subjects"});
    } else {
      result.trials.push_back(std::move(p.record));
    }
  }
  return result;
}

inline LoadResult load_trials(const std::filesystem::path& path) {
  return parse_trials(csv::read_lines(path), path.string());
}

inline std::string trials_to_csv(std::span<const TrialRecord> trials) {
  std::string out = "experiment_id,trial_id,condition,question_id,subject_id,truth,estimate_pre,estimate_post\n";
  for (const auto& t : trials) {
    for (const auto& s : t.subjects) {
      out += t.experiment_id + ',' + t.trial_id + ',' + to_string(t.condition) + ',' + t.question_id + ',' +
             s.subject_id + ',' + csv::format_double(t.truth) + ',' + csv::format_double(s.pre) + ',' +
             csv::format_double(s.post) + '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Standardized error change per trial

struct TrialErrorChange {
  double x_individual = 0.0;  // Delta E(e^2) / s_e^2
  double y_crowd = 0.0;       // Delta E(e)^2 / s_e^2
  double offset = 0.0;        // y_crowd - x_individual

  bool in_unit_band(double slack = 1e-9) const { return offset >= -slack && offset <= 1.0 + slack; }
};

inline TrialErrorChange trial_error_changes(const TrialRecord& t) {
  const auto ch = standardized_error_changes(t.bias_pre(), t.bias_post());
  return {ch.individual, ch.crowd, ch.crowd - ch.individual};
}

struct LabeledChange {
  std::string experiment_id;
  std::string trial_id;
  std::string question_id;
  Condition condition = Condition::decentralized;
  TrialErrorChange change;
};

// Changes for every standardizable trial, in input order.
inline std::vector<LabeledChange> all_error_changes(std::span<const TrialRecord> trials) {
  std::vector<LabeledChange> out;
  for (const auto& t : trials) {
    if (!t.standardizable()) continue;
    out.push_back({t.experiment_id, t.trial_id, t.question_id, t.condition, trial_error_changes(t)});
  }
  return out;
}

// Fraction of trials whose offset lies in [0, 1] (with `slack` for rounding).
inline double fraction_in_unit_band(std::span<const TrialErrorChange> points, double slack = 1e-9) {
  if (points.empty()) throw PreconditionError("band fraction of an empty set");
  const auto inside = std::count_if(points.begin(), points.end(),
                                    [&](const TrialErrorChange& p) { return p.in_unit_band(slack); });
  return static_cast<double>(inside) / static_cast<double>(points.size());
}

// ---------------------------------------------------------------------------
// Bootstrap

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

struct BootstrapOptions {
  std::size_t resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = 1;
};

// Percentile bootstrap over the elements of `data`. Resample b draws from its
// own engine derived from (seed, b), so results do not depend on evaluation
// order. Resamples whose statistic is not finite are dropped; if none remain
// the interval is NaN.
template <class T, class Stat>
Interval bootstrap_ci(std::span<const T> data, Stat&& stat, const BootstrapOptions& opt) {
  if (opt.resamples < 100) throw PreconditionError("bootstrap needs at least 100 resamples");
  if (!(opt.level > 0.0 && opt.level < 1.0)) throw PreconditionError("confidence level must lie in (0, 1)");
  if (data.empty()) throw PreconditionError("bootstrap of empty data");
  if constexpr (std::equality_comparable<T>) {
    if (std::all_of(data.begin(), data.end(), [&](const T& x) { return x == data.front(); })) {
      const double c = stat(data);
      return {c, c};
    }
  }
  std::vector<double> values;
  values.reserve(opt.resamples);
  std::vector<T> sample(data.size());
  const auto n = static_cast<std::int64_t>(data.size());
  for (std::size_t b = 0; b < opt.resamples; ++b) {
    auto eng = rng::make_engine(opt.seed, b);
    for (auto& s : sample) s = data[static_cast<std::size_t>(rng::uniform_int(eng, 0, n - 1))];
    const double v = stat(std::span<const T>(sample));
    if (std::isfinite(v)) values.push_back(v);
  }
  if (values.empty()) return {std::nan(""), std::nan("")};
  std::sort(values.begin(), values.end());
  const double tail = (1.0 - opt.level) / 2.0;
  return {stats::quantile_sorted(values, tail), stats::quantile_sorted(values, 1.0 - tail)};
}

// ---------------------------------------------------------------------------
// Crowd-vs-individual regression

enum class RegressionFilter {
  none,
  threshold,        // drop trials with |Delta| > threshold on either axis
  offset_positive,  // keep only trials with offset > 0
  both,
};

inline const char* to_string(RegressionFilter f) {
  switch (f) {
    case RegressionFilter::none: return "none";
    case RegressionFilter::threshold: return "threshold";
    case RegressionFilter::offset_positive: return "offset_positive";
    case RegressionFilter::both: return "both";
  }
  return "?";
}

inline std::optional<RegressionFilter> parse_regression_filter(std::string_view s) {
  if (s == "none") return RegressionFilter::none;
  if (s == "threshold") return RegressionFilter::threshold;
  if (s == "offset_positive") return RegressionFilter::offset_positive;
  if (s == "both") return RegressionFilter::both;
  return std::nullopt;
}

struct RegressionResult {
  double slope = 0.0;      // B1
  double intercept = 0.0;  // B0; equals the offset when the slope is 1
  Interval slope_ci;       // OLS, Student t
  Interval intercept_ci;
  Interval slope_ci_bootstrap;
  Interval intercept_ci_bootstrap;
  std::size_t n_included = 0;
  std::size_t n_excluded = 0;
  double threshold_used = 0.0;
  RegressionFilter filter = RegressionFilter::threshold;
};

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

// Ordinary least squares of y_crowd on x_individual. Throws when x has no
// spread.
inline OlsFit ols(std::span<const TrialErrorChange> pts) {
  const auto n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x_individual;
    my += p.y_crowd;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.x_individual - mx) * (p.x_individual - mx);
    sxy += (p.x_individual - mx) * (p.y_crowd - my);
  }
  if (!(sxx > 0.0)) throw DegenerateInputError("regression: individual error changes have no spread");
  OlsFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (pts.size() > 2) {
    double sse = 0.0;
    for (const auto& p : pts) {
      const double r = p.y_crowd - f.intercept - f.slope * p.x_individual;
      sse += r * r;
    }
    const double sigma2 = sse / (n - 2.0);
    f.slope_se = std::sqrt(sigma2 / sxx);
    f.intercept_se = std::sqrt(sigma2 * (1.0 / n + mx * mx / sxx));
  }
  return f;
}

inline bool passes_filter(const TrialErrorChange& p, double threshold, RegressionFilter filter) {
  const bool within = std::abs(p.x_individual) <= threshold && std::abs(p.y_crowd) <= threshold;
  const bool positive = p.offset > 0.0;
  switch (filter) {
    case RegressionFilter::none: return true;
    case RegressionFilter::threshold: return within;
    case RegressionFilter::offset_positive: return positive;
    case RegressionFilter::both: return within && positive;
  }
  return true;
}

inline RegressionResult fit_group_individual_regression(std::span<const TrialErrorChange> points,
                                                        double threshold = 10.0,
                                                        RegressionFilter filter = RegressionFilter::threshold,
                                                        const BootstrapOptions& boot = {}) {
  if (!(threshold > 0.0)) throw PreconditionError("regression threshold must be positive");
  std::vector<TrialErrorChange> kept;
  for (const auto& p : points) {
    if (passes_filter(p, threshold, filter)) kept.push_back(p);
  }
  if (kept.size() < 3) {
    throw PreconditionError("regression needs at least 3 trials after filtering, have " + std::to_string(kept.size()));
  }
  RegressionResult r;
  r.n_included = kept.size();
  r.n_excluded = points.size() - kept.size();
  r.threshold_used = threshold;
  r.filter = filter;
  const auto fit = ols(kept);
  r.slope = fit.slope;
  r.intercept = fit.intercept;
  const boost::math::students_t dist(static_cast<double>(kept.size() - 2));
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - boot.level) / 2.0));
  r.slope_ci = {fit.slope - t * fit.slope_se, fit.slope + t * fit.slope_se};
  r.intercept_ci = {fit.intercept - t * fit.intercept_se, fit.intercept + t * fit.intercept_se};

  const auto safe_fit = [](std::span<const TrialErrorChange> s) -> std::optional<OlsFit> {
    try {
      return ols(s);
    } catch (const DegenerateInputError&) {
      return std::nullopt;
    }
  };
  const std::span<const TrialErrorChange> kept_span(kept);
  r.slope_ci_bootstrap = bootstrap_ci(
      kept_span, [&](std::span<const TrialErrorChange> s) {
        const auto f = safe_fit(s);
        return f ? f->slope : std::nan("");
      },
      boot);
  r.intercept_ci_bootstrap = bootstrap_ci(
      kept_span, [&](std::span<const TrialErrorChange> s) {
        const auto f = safe_fit(s);
        return f ? f->intercept : std::nan("");
      },
      boot);
  return r;
}

// ---------------------------------------------------------------------------
// Improvement probabilities

enum class ImprovementMetric {
  conditional_on_revision,  // P(improved | revised)
  improve_or_stay,          // P(not worse)
};

inline const char* to_string(ImprovementMetric m) {
  return m == ImprovementMetric::conditional_on_revision ? "conditional_on_revision" : "improve_or_stay";
}

enum class GroupOutcomeRule {
  strict_improvement,  // crowd error decreased
  not_worse,           // crowd error did not increase
};

inline const char* to_string(GroupOutcomeRule g) {
  return g == GroupOutcomeRule::strict_improvement ? "strict_improvement" : "not_worse";
}

// Subject outcome counts for one trial (or one subset of its subjects).
struct OutcomeCounts {
  std::string experiment_id;
  std::size_t subjects = 0;
  std::size_t revised = 0;           // post != pre
  std::size_t improved = 0;          // |e_post| < |e_pre|; implies revised
  std::size_t worsened = 0;          // |e_post| > |e_pre|

  void add(const SubjectEstimate& s, double truth) {
    ++subjects;
    const double before = std::abs(s.pre - truth);
    const double after = std::abs(s.post - truth);
    const bool rev = s.post != s.pre;
    if (rev) ++revised;
    if (after < before) ++improved;
    else if (after > before) ++worsened;
  }

  // Per-unit value of the metric; nullopt when its denominator is empty.
  std::optional<double> value(ImprovementMetric m) const {
    if (m == ImprovementMetric::conditional_on_revision) {
      if (revised == 0) return std::nullopt;
      return static_cast<double>(improved) / static_cast<double>(revised);
    }
    if (subjects == 0) return std::nullopt;
    return static_cast<double>(subjects - worsened) / static_cast<double>(subjects);
  }
};

// Mean of per-unit values where each experiment carries equal total weight:
// a unit's weight is 1 / (defined units from the same experiment).
inline std::optional<double> experiment_weighted_probability(std::span<const OutcomeCounts> units,
                                                             ImprovementMetric m) {
  std::map<std::string, std::pair<double, std::size_t>> per_exp;  // sum, count
  for (const auto& u : units) {
    if (const auto v = u.value(m)) {
      auto& acc = per_exp[u.experiment_id];
      acc.first += *v;
      ++acc.second;
    }
  }
  if (per_exp.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& [exp, acc] : per_exp) total += acc.first / static_cast<double>(acc.second);
  return total / static_cast<double>(per_exp.size());
}

struct CellEstimate {
  std::optional<double> probability;  // nullopt = undefined (no eligible units)
  Interval ci{std::nan(""), std::nan("")};
  std::size_t units = 0;          // trials contributing to the cell
  std::size_t defined_units = 0;  // with a nonzero metric denominator
  std::size_t subjects = 0;
  std::size_t revised = 0;
  std::size_t improved = 0;
  std::size_t worsened = 0;
  std::size_t unchanged = 0;  // not revised
};

inline CellEstimate estimate_cell(std::span<const OutcomeCounts> units, ImprovementMetric m,
                                  const BootstrapOptions& boot) {
  CellEstimate c;
  c.units = units.size();
  for (const auto& u : units) {
    c.subjects += u.subjects;
    c.revised += u.revised;
    c.improved += u.improved;
    c.worsened += u.worsened;
    c.unchanged += u.subjects - u.revised;
    if (u.value(m)) ++c.defined_units;
  }
  c.probability = experiment_weighted_probability(units, m);
  if (!c.probability) return c;
  std::vector<OutcomeCounts> defined;
  for (const auto& u : units) {
    if (u.value(m)) defined.push_back(u);
  }
  const auto stat = [m](std::span<const OutcomeCounts> s) {
    const auto p = experiment_weighted_probability(s, m);
    return p ? *p : std::nan("");
  };
  c.ci = bootstrap_ci(std::span<const OutcomeCounts>(defined), stat, boot);
  // A percentile interval need not contain the point estimate; widen to it.
  c.ci.lo = std::min(c.ci.lo, *c.probability);
  c.ci.hi = std::max(c.ci.hi, *c.probability);
  return c;
}

struct ImprovementCell {
  Condition condition = Condition::decentralized;
  bool group_improved = false;  // under the table's GroupOutcomeRule
  CellEstimate estimate;
};

struct ImprovementTable {
  ImprovementMetric metric = ImprovementMetric::conditional_on_revision;
  GroupOutcomeRule group_rule = GroupOutcomeRule::strict_improvement;
  std::vector<ImprovementCell> cells;  // only cells with at least one trial
};

inline bool group_improved(const TrialRecord& t, GroupOutcomeRule rule) {
  const double delta = crowd_error(t.bias_post()) - crowd_error(t.bias_pre());
  return rule == GroupOutcomeRule::strict_improvement ? delta < 0.0 : delta <= 0.0;
}

inline OutcomeCounts trial_outcomes(const TrialRecord& t) {
  OutcomeCounts c;
  c.experiment_id = t.experiment_id;
  for (const auto& s : t.subjects) c.add(s, t.truth);
  return c;
}

inline ImprovementTable improvement_probabilities(std::span<const TrialRecord> trials, ImprovementMetric metric,
                                                  GroupOutcomeRule rule = GroupOutcomeRule::strict_improvement,
                                                  const BootstrapOptions& boot = {}) {
  if (trials.empty()) throw PreconditionError("improvement probabilities need at least one trial");
  std::map<std::pair<Condition, bool>, std::vector<OutcomeCounts>> cells;
  for (const auto& t : trials) cells[{t.condition, group_improved(t, rule)}].push_back(trial_outcomes(t));
  ImprovementTable table;
  table.metric = metric;
  table.group_rule = rule;
  for (const auto& [key, units] : cells) {
    table.cells.push_back({key.first, key.second, estimate_cell(units, metric, boot)});
  }
  return table;
}

// ---------------------------------------------------------------------------
// Accuracy quartiles

struct QuartileAssignment {
  std::string experiment_id;
  std::string trial_id;
  std::string question_id;
  std::string subject_id;
  double other_question_error = 0.0;  // mean |e_pre| / s_e over the subject's other questions
  int quartile = 0;                   // 1 = most accurate
};

struct QuartileReport {
  bool skipped = false;
  std::string reason;
  std::vector<QuartileAssignment> assignments;
  // estimates[metric][q - 1]
  std::array<std::array<CellEstimate, 4>, 2> estimates{};

  const CellEstimate& at(ImprovementMetric m, int quartile) const {
    return estimates[m == ImprovementMetric::conditional_on_revision ? 0 : 1][static_cast<std::size_t>(quartile - 1)];
  }
};

// Quartile of each subject's accuracy on the OTHER questions they answered,
// ranked among the members of the same trial. Accuracy on a question is the
// absolute pre-communication bias divided by that trial's s_e. Ties are
// broken by ascending subject_id; with m ranked members the k-th (0-based)
// lands in quartile floor(4k / m) + 1. Subjects are identified within an
// experiment; trials with s_e = 0 are ignored.
inline std::vector<QuartileAssignment> assign_accuracy_quartiles(std::span<const TrialRecord> trials) {
  struct Answer {
    std::string question_id;
    double error;
  };
  std::map<std::pair<std::string, std::string>, std::vector<Answer>> answers;  // (experiment, subject)
  std::vector<const TrialRecord*> usable;
  for (const auto& t : trials) {
    if (!t.standardizable()) continue;
    usable.push_back(&t);
    const double se = t.s_e();
    for (const auto& s : t.subjects) {
      answers[{t.experiment_id, s.subject_id}].push_back({t.question_id, std::abs(s.pre - t.truth) / se});
    }
  }

  std::vector<QuartileAssignment> out;
  for (const TrialRecord* t : usable) {
    std::vector<QuartileAssignment> members;
    for (const auto& s : t->subjects) {
      const auto& mine = answers[{t->experiment_id, s.subject_id}];
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& a : mine) {
        if (a.question_id == t->question_id) continue;
        sum += a.error;
        ++count;
      }
      if (count == 0) continue;
      members.push_back({t->experiment_id, t->trial_id, t->question_id, s.subject_id,
                         sum / static_cast<double>(count), 0});
    }
    std::stable_sort(members.begin(), members.end(), [](const QuartileAssignment& a, const QuartileAssignment& b) {
      return std::tie(a.other_question_error, a.subject_id) < std::tie(b.other_question_error, b.subject_id);
    });
    const std::size_t m = members.size();
    for (std::size_t k = 0; k < m; ++k) {
      members[k].quartile = static_cast<int>(4 * k / m) + 1;
      out.push_back(std::move(members[k]));
    }
  }
  return out;
}

inline QuartileReport accuracy_quartile_effect(std::span<const TrialRecord> trials, const BootstrapOptions& boot = {}) {
  QuartileReport rep;
  rep.assignments = assign_accuracy_quartiles(trials);
  if (rep.assignments.empty()) {
    rep.skipped = true;
    rep.reason = "no subject answered two or more questions in a trial with nonzero diversity";
    return rep;
  }
  // Per (trial, quartile) outcome units.
  std::map<std::tuple<std::string, std::string, std::string>, const TrialRecord*> by_key;
  for (const auto& t : trials) by_key[{t.experiment_id, t.trial_id, t.question_id}] = &t;
  std::array<std::map<std::tuple<std::string, std::string, std::string>, OutcomeCounts>, 4> units;
  for (const auto& a : rep.assignments) {
    const TrialRecord* t = by_key.at({a.experiment_id, a.trial_id, a.question_id});
    const auto it = std::find_if(t->subjects.begin(), t->subjects.end(),
                                 [&](const SubjectEstimate& s) { return s.subject_id == a.subject_id; });
    auto& u = units[static_cast<std::size_t>(a.quartile - 1)][{a.experiment_id, a.trial_id, a.question_id}];
    u.experiment_id = a.experiment_id;
    u.add(*it, t->truth);
  }
  for (std::size_t q = 0; q < 4; ++q) {
    std::vector<OutcomeCounts> list;
    for (const auto& [key, u] : units[q]) list.push_back(u);
    rep.estimates[0][q] = estimate_cell(list, ImprovementMetric::conditional_on_revision, boot);
    rep.estimates[1][q] = estimate_cell(list, ImprovementMetric::improve_or_stay, boot);
  }
  return rep;
}

}  // namespace degroot::empirical
