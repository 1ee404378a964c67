#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "degroot/empirical.hpp"
#include "degroot/synthetic.hpp"

using namespace degroot;
using namespace degroot::empirical;

namespace {

const char* kHeader = "experiment_id,trial_id,condition,question_id,subject_id,truth,estimate_pre,estimate_post\n";

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

TrialRecord make_trial(std::string exp, std::string trial, double truth, std::vector<double> pre,
                       std::vector<double> post, Condition c = Condition::decentralized) {
  TrialRecord t;
  t.experiment_id = std::move(exp);
  t.trial_id = std::move(trial);
  t.question_id = "q1";
  t.condition = c;
  t.truth = truth;
  for (std::size_t i = 0; i < pre.size(); ++i) t.subjects.push_back({"s" + std::to_string(i), pre[i], post[i]});
  return t;
}

// pre = (0, 4, 8), everyone moves to 4, truth 3.
TrialRecord converged_fixture() { return make_trial("e1", "t1", 3.0, {0, 4, 8}, {4, 4, 4}); }

}  // namespace

// ---------------------------------------------------------------------------
// Loading

TEST(LoadTrials, WellFormedFixture) {
  const auto p = write_temp("degroot_trials_ok.csv", std::string(kHeader) +
                                                         "e1,t1,decentralized,q1,a,3,0,4\n"
                                                         "e1,t1,decentralized,q1,b,3,4,4\n"
                                                         "e1,t1,decentralized,q1,c,3,8,4\n"
                                                         "e1,t2,centralised,q1,a,10,9,9.5\n"
                                                         "e1,t2,centralised,q1,b,10,12,11\n");
  const auto r = load_trials(p);
  ASSERT_EQ(r.trials.size(), 2u);
  EXPECT_TRUE(r.rejections.empty());
  EXPECT_EQ(r.trials[0].subjects.size(), 3u);
  EXPECT_EQ(r.trials[1].condition, Condition::centralized);
  EXPECT_DOUBLE_EQ(r.trials[1].truth, 10.0);
}

TEST(LoadTrials, ColumnsInAnyOrderAndQuotedFields) {
  const auto p = write_temp("degroot_trials_order.csv",
                            "subject_id,estimate_post,estimate_pre,truth,question_id,condition,trial_id,experiment_id\n"
                            "\"a, b\",1,2,3,q,discussion,t,e\n"
                            "c,2,1,3,q,discussion,t,e\n");
  const auto r = load_trials(p);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_EQ(r.trials[0].subjects[0].subject_id, "a, b");
  EXPECT_DOUBLE_EQ(r.trials[0].subjects[0].pre, 2.0);
  EXPECT_DOUBLE_EQ(r.trials[0].subjects[0].post, 1.0);
}

TEST(LoadTrials, NonNumericEstimateIsRejectedWithReason) {
  const auto p = write_temp("degroot_trials_bad.csv", std::string(kHeader) +
                                                          "e1,t1,control,q1,a,3,0,4\n"
                                                          "e1,t1,control,q1,b,3,abc,4\n"
                                                          "e1,t1,control,q1,c,3,8,4\n");
  const auto r = load_trials(p);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_EQ(r.trials[0].subjects.size(), 2u);
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(r.rejections[0].line, 3u);
  EXPECT_NE(r.rejections[0].reason.find("estimate_pre"), std::string::npos);
}

TEST(LoadTrials, ZeroDiversityIsFlaggedNotDropped) {
  const auto p = write_temp("degroot_trials_flat.csv", std::string(kHeader) +
                                                           "e1,t1,decentralized,q1,a,3,5,4\n"
                                                           "e1,t1,decentralized,q1,b,3,5,4\n");
  const auto r = load_trials(p);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_FALSE(r.trials[0].standardizable());
  EXPECT_EQ(r.non_standardizable(), 1u);
  EXPECT_TRUE(all_error_changes(r.trials).empty());
}

TEST(LoadTrials, TrialLevelRejections) {
  const auto p = write_temp("degroot_trials_inconsistent.csv", std::string(kHeader) +
                                                                   "e1,t1,decentralized,q1,a,3,5,4\n"
                                                                   "e1,t1,centralized,q1,b,3,6,4\n"
                                                                   "e1,t2,decentralized,q1,a,3,5,4\n"
                                                                   "e1,t3,decentralized,q1,a,3,5,4\n"
                                                                   "e1,t3,decentralized,q1,a,3,6,4\n"
                                                                   "e1,t4,sideways,q1,a,3,6,4\n"
                                                                   "e1,t4,control,q1\n");
  const auto r = load_trials(p);
  EXPECT_TRUE(r.trials.empty());
  // mixed condition, single subject (t2), duplicate subject row + single subject (t3),
  // unknown condition and a short row (t4).
  EXPECT_EQ(r.rejections.size(), 6u);
}

TEST(LoadTrials, HeaderAndFileErrors) {
  EXPECT_THROW(load_trials(write_temp("degroot_trials_hdr.csv", "experiment_id,trial_id\n")), PreconditionError);
  EXPECT_THROW(load_trials(write_temp("degroot_trials_empty.csv", "")), PreconditionError);
  EXPECT_THROW(load_trials("/nonexistent/trials.csv"), IoError);
}

TEST(LoadTrials, CsvRoundTrip) {
  SyntheticOptions o;
  o.experiments = 2;
  o.groups_per_experiment = 3;
  o.questions_per_group = 2;
  o.mixed_conditions = true;
  const auto trials = make_synthetic_trials(o);
  const auto path = write_temp("degroot_trials_rt.csv", trials_to_csv(trials));
  const auto back = load_trials(path);
  ASSERT_EQ(back.trials.size(), trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    EXPECT_EQ(back.trials[i].trial_id, trials[i].trial_id);
    EXPECT_EQ(back.trials[i].condition, trials[i].condition);
    ASSERT_EQ(back.trials[i].subjects.size(), trials[i].subjects.size());
    for (std::size_t k = 0; k < trials[i].subjects.size(); ++k) {
      EXPECT_EQ(back.trials[i].subjects[k].pre, trials[i].subjects[k].pre);
      EXPECT_EQ(back.trials[i].subjects[k].post, trials[i].subjects[k].post);
    }
  }
}

// ---------------------------------------------------------------------------
// Per-trial changes

TEST(TrialErrorChanges, FullConvergenceGivesOffsetOne) {
  // e_pre = (-3, 1, 5): E(e) = 1, E(e^2) = 35/3, s_e^2 = 32/3; e_post = (1, 1, 1).
  const auto c = trial_error_changes(converged_fixture());
  EXPECT_NEAR(c.y_crowd, 0.0, 1e-15);
  EXPECT_NEAR(c.x_individual, -1.0, 1e-15);
  EXPECT_NEAR(c.offset, 1.0, 1e-15);
}

TEST(TrialErrorChanges, NoRevisionGivesZero) {
  const auto c = trial_error_changes(make_trial("e", "t", 3.0, {0, 4, 8}, {0, 4, 8}));
  EXPECT_EQ(c.x_individual, 0.0);
  EXPECT_EQ(c.y_crowd, 0.0);
  EXPECT_EQ(c.offset, 0.0);
}

TEST(TrialErrorChanges, HalfwayToMeanGivesThreeQuarters) {
  // post = pre + 0.5 (mean - pre) = (2, 4, 6); e_post = (-1, 1, 3), E(e_post^2) = 11/3.
  const auto c = trial_error_changes(make_trial("e", "t", 3.0, {0, 4, 8}, {2, 4, 6}));
  EXPECT_NEAR(c.y_crowd, 0.0, 1e-15);
  EXPECT_NEAR(c.x_individual, -0.75, 1e-15);
  EXPECT_NEAR(c.offset, 0.75, 1e-15);
  EXPECT_GT(c.offset, 0.0);
  EXPECT_LT(c.offset, 1.0);
}

TEST(TrialErrorChanges, DegenerateDiversity) {
  EXPECT_THROW(trial_error_changes(make_trial("e", "t", 3.0, {5, 5}, {4, 4})), DegenerateInputError);
}

TEST(BandFraction, Examples) {
  std::vector<TrialErrorChange> pts(10, TrialErrorChange{-1.0, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(fraction_in_unit_band(pts), 1.0);
  pts[3] = {0.5, 0.2, -0.3};  // spread grew: anti-convergent
  EXPECT_DOUBLE_EQ(fraction_in_unit_band(pts), 0.9);
  EXPECT_THROW(fraction_in_unit_band(std::vector<TrialErrorChange>{}), PreconditionError);
}

// ---------------------------------------------------------------------------
// Regression

namespace {
std::vector<TrialErrorChange> points_of(const std::vector<TrialRecord>& trials) {
  std::vector<TrialErrorChange> pts;
  for (const auto& c : all_error_changes(trials)) pts.push_back(c.change);
  return pts;
}
}  // namespace

TEST(Regression, ConvergedTrialsGiveSlopeOneInterceptOne) {
  SyntheticOptions o;
  o.groups_per_experiment = 50;
  const auto r = fit_group_individual_regression(points_of(make_synthetic_trials(o)));
  EXPECT_NEAR(r.slope, 1.0, 1e-6);
  EXPECT_NEAR(r.intercept, 1.0, 1e-6);
  EXPECT_EQ(r.n_included, 100u);
  EXPECT_TRUE(r.slope_ci.contains(r.slope));
  EXPECT_TRUE(r.intercept_ci_bootstrap.contains(r.intercept) || std::abs(r.intercept - 1.0) < 1e-9);
}

TEST(Regression, HalfConvergedTrials) {
  SyntheticOptions o;
  o.experiments = 4;
  o.groups_per_experiment = 50;
  o.mode = PostMode::interpolate;
  o.lambda = 0.5;
  const auto pts = points_of(make_synthetic_trials(o));
  ASSERT_EQ(pts.size(), 200u);
  for (const auto& p : pts) {
    EXPECT_GT(p.offset, 0.0);
    EXPECT_LT(p.offset, 1.0);
  }
  const auto r = fit_group_individual_regression(pts);
  EXPECT_NEAR(r.slope, 1.0, 1e-9);
  EXPECT_NEAR(r.intercept, 0.75, 1e-9);  // 1 - (1 - lambda)^2
}

TEST(Regression, FiltersAndInsufficientPoints) {
  std::vector<TrialErrorChange> pts{{-1.0, 0.0, 1.0}, {-2.0, -1.0, 1.0}, {-0.5, 0.5, 1.0}, {40.0, 41.0, 1.0},
                                    {-1.0, -1.5, -0.5}};
  auto r = fit_group_individual_regression(pts, 10.0, RegressionFilter::threshold);
  EXPECT_EQ(r.n_included, 4u);
  EXPECT_EQ(r.n_excluded, 1u);
  r = fit_group_individual_regression(pts, 10.0, RegressionFilter::offset_positive);
  EXPECT_EQ(r.n_included, 4u);
  r = fit_group_individual_regression(pts, 10.0, RegressionFilter::both);
  EXPECT_EQ(r.n_included, 3u);
  EXPECT_NEAR(r.slope, 1.0, 1e-12);
  EXPECT_NEAR(r.intercept, 1.0, 1e-12);
  EXPECT_THROW(fit_group_individual_regression(pts, 0.6, RegressionFilter::threshold), PreconditionError);
  EXPECT_THROW(fit_group_individual_regression(pts, -1.0), PreconditionError);
}

TEST(Regression, OlsIntervalsOnNoisyData) {
  // y = 0.5 + 2x + small symmetric noise: the t interval must cover 2.
  std::vector<TrialErrorChange> pts;
  for (int i = 0; i < 20; ++i) {
    const double x = -1.0 + 0.1 * i;
    const double y = 0.5 + 2.0 * x + ((i % 2) ? 0.01 : -0.01);
    pts.push_back({x, y, y - x});
  }
  const auto r = fit_group_individual_regression(pts, 10.0, RegressionFilter::none);
  EXPECT_TRUE(r.slope_ci.contains(2.0));
  EXPECT_TRUE(r.intercept_ci.contains(0.5));
  EXPECT_LT(r.slope_ci.hi - r.slope_ci.lo, 0.05);
  EXPECT_LT(r.slope_ci_bootstrap.lo, r.slope_ci_bootstrap.hi);
}

// ---------------------------------------------------------------------------
// Bootstrap

TEST(Bootstrap, ConstantDataGivesPointInterval) {
  const std::vector<double> d(50, 2.5);
  const auto ci = bootstrap_ci(std::span<const double>(d),
                               [](std::span<const double> s) { return stats::mean(s); }, {});
  EXPECT_EQ(ci.lo, 2.5);
  EXPECT_EQ(ci.hi, 2.5);
}

TEST(Bootstrap, SymmetricSampleBracketsHalf) {
  std::vector<double> d;
  for (int i = 0; i < 500; ++i) d.push_back(i % 2);
  BootstrapOptions o;
  o.seed = 99;
  const auto ci = bootstrap_ci(std::span<const double>(d), [](std::span<const double> s) { return stats::mean(s); }, o);
  EXPECT_LT(ci.lo, 0.5);
  EXPECT_GT(ci.hi, 0.5);
  EXPECT_GT(ci.lo, 0.4);
  EXPECT_LT(ci.hi, 0.6);
}

TEST(Bootstrap, DeterministicUnderSeed) {
  std::vector<double> d{1, 4, 2, 8, 5, 7, 3, 3, 9, 0};
  const auto stat = [](std::span<const double> s) { return stats::mean(s); };
  BootstrapOptions o;
  o.seed = 5;
  const auto a = bootstrap_ci(std::span<const double>(d), stat, o);
  const auto b = bootstrap_ci(std::span<const double>(d), stat, o);
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
  o.seed = 6;
  const auto c = bootstrap_ci(std::span<const double>(d), stat, o);
  EXPECT_TRUE(a.lo != c.lo || a.hi != c.hi);
}

TEST(Bootstrap, RejectsTooFewResamples) {
  std::vector<double> d{1, 2};
  BootstrapOptions o;
  o.resamples = 50;
  EXPECT_THROW(bootstrap_ci(std::span<const double>(d), [](std::span<const double>) { return 0.0; }, o),
               PreconditionError);
}

// ---------------------------------------------------------------------------
// Improvement probabilities

TEST(Improvement, ConvergedFixtureClassification) {
  const std::vector<TrialRecord> trials{converged_fixture()};
  const auto counts = trial_outcomes(trials[0]);
  EXPECT_EQ(counts.revised, 2u);
  EXPECT_EQ(counts.improved, 2u);
  EXPECT_EQ(counts.worsened, 0u);
  const auto t1 = improvement_probabilities(trials, ImprovementMetric::conditional_on_revision);
  ASSERT_EQ(t1.cells.size(), 1u);
  EXPECT_EQ(t1.cells[0].condition, Condition::decentralized);
  // Crowd error E(e)^2 = 1 before and after: not a strict improvement.
  EXPECT_FALSE(t1.cells[0].group_improved);
  ASSERT_TRUE(t1.cells[0].estimate.probability);
  EXPECT_DOUBLE_EQ(*t1.cells[0].estimate.probability, 1.0);
  const auto t2 = improvement_probabilities(trials, ImprovementMetric::improve_or_stay, GroupOutcomeRule::not_worse);
  EXPECT_TRUE(t2.cells[0].group_improved);
  EXPECT_DOUBLE_EQ(*t2.cells[0].estimate.probability, 1.0);
}

TEST(Improvement, NoRevisionTrial) {
  const std::vector<TrialRecord> trials{make_trial("e", "t", 3.0, {0, 4, 8}, {0, 4, 8})};
  const auto t1 = improvement_probabilities(trials, ImprovementMetric::conditional_on_revision);
  EXPECT_FALSE(t1.cells[0].estimate.probability.has_value());
  EXPECT_EQ(t1.cells[0].estimate.unchanged, 3u);
  const auto t2 = improvement_probabilities(trials, ImprovementMetric::improve_or_stay);
  EXPECT_DOUBLE_EQ(*t2.cells[0].estimate.probability, 1.0);
}

TEST(Improvement, ExperimentsCarryEqualWeight) {
  std::vector<TrialRecord> trials;
  for (int i = 0; i < 10; ++i) trials.push_back(make_trial("big", "t" + std::to_string(i), 0.0, {2, 4}, {1, 3}));
  trials.push_back(make_trial("small", "t0", 0.0, {-1, 1.5}, {-2, 2}));  // group improves, both worsen
  const auto t = improvement_probabilities(trials, ImprovementMetric::conditional_on_revision);
  ASSERT_EQ(t.cells.size(), 1u);
  EXPECT_TRUE(t.cells[0].group_improved);
  EXPECT_DOUBLE_EQ(*t.cells[0].estimate.probability, 0.5);
  EXPECT_EQ(t.cells[0].estimate.units, 11u);
  EXPECT_TRUE(t.cells[0].estimate.ci.contains(0.5));
}

TEST(Improvement, CellsSplitByConditionAndOutcome) {
  std::vector<TrialRecord> trials{
      make_trial("e", "a", 0.0, {2, 4}, {1, 3}, Condition::centralized),
      make_trial("e", "b", 0.0, {2, 4}, {3, 5}, Condition::centralized),
      make_trial("e", "c", 0.0, {2, 4}, {1, 3}, Condition::control),
  };
  const auto t = improvement_probabilities(trials, ImprovementMetric::conditional_on_revision);
  ASSERT_EQ(t.cells.size(), 3u);
  for (const auto& c : t.cells) {
    ASSERT_TRUE(c.estimate.probability);
    EXPECT_DOUBLE_EQ(*c.estimate.probability, c.group_improved ? 1.0 : 0.0);
    EXPECT_GE(*c.estimate.probability, c.estimate.ci.lo);
    EXPECT_LE(*c.estimate.probability, c.estimate.ci.hi);
  }
}

// ---------------------------------------------------------------------------
// Accuracy quartiles

namespace {

// Eight subjects A..H answer three questions. Every question's biases are a
// signed arrangement of {1,1,2,2,3,3,4,4}, so s_e is identical across
// questions and the leave-one-out ranking follows the summed magnitudes.
std::vector<TrialRecord> quartile_fixture() {
  const std::vector<std::string> ids{"A", "B", "C", "D", "E", "F", "G", "H"};
  const std::vector<std::vector<double>> bias{
      {1, -1, 2, -2, 3, -3, 4, -4},
      {1, 2, -1, 3, -2, 4, -3, -4},
      {2, 1, 3, -1, 4, -2, -4, -3},
  };
  std::vector<TrialRecord> trials;
  for (std::size_t q = 0; q < 3; ++q) {
    TrialRecord t;
    t.experiment_id = "e1";
    t.trial_id = "g1";
    t.question_id = "q" + std::to_string(q + 1);
    t.truth = 100.0;
    for (std::size_t s = 0; s < 8; ++s) {
      const double pre = 100.0 + bias[q][s];
      t.subjects.push_back({ids[s], pre, 100.0 + 0.5 * bias[q][s]});
    }
    trials.push_back(t);
  }
  return trials;
}

std::string quartile_string(const std::vector<QuartileAssignment>& as, const std::string& question) {
  std::string out;
  for (const auto& a : as) {
    if (a.question_id == question) out += a.subject_id + std::to_string(a.quartile) + " ";
  }
  return out;
}

}  // namespace

TEST(Quartiles, HandComputedAssignment) {
  const auto as = assign_accuracy_quartiles(quartile_fixture());
  ASSERT_EQ(as.size(), 24u);
  // Leave-one-out magnitude sums:
  //   q1: A3 B3 C4 D4 E6 F6 G7 H7
  //   q2: B2 A3 D3 C5 F5 E7 H7 G8   (A/D and C/F ties broken by id)
  //   q3: A2 B3 C3 D5 E5 F7 G7 H8
  EXPECT_EQ(quartile_string(as, "q1"), "A1 B1 C2 D2 E3 F3 G4 H4 ");
  EXPECT_EQ(quartile_string(as, "q2"), "B1 A1 D2 C2 F3 E3 H4 G4 ");
  EXPECT_EQ(quartile_string(as, "q3"), "A1 B1 C2 D2 E3 F3 G4 H4 ");
  const double unit = 1.0 / std::sqrt(7.5);  // |bias| / s_e
  EXPECT_NEAR(as[0].other_question_error, 1.5 * unit, 1e-12);
}

TEST(Quartiles, TieBrokenBySubjectId) {
  // Z and Y have identical records; Y sorts first.
  std::vector<TrialRecord> trials;
  for (int q = 0; q < 2; ++q) {
    TrialRecord t;
    t.experiment_id = "e";
    t.trial_id = "g";
    t.question_id = "q" + std::to_string(q);
    t.truth = 0.0;
    t.subjects = {{"Z", 1.0, 0.5}, {"Y", -1.0, -0.5}};
    trials.push_back(t);
  }
  const auto as = assign_accuracy_quartiles(trials);
  ASSERT_EQ(as.size(), 4u);
  EXPECT_EQ(as[0].subject_id, "Y");
  EXPECT_EQ(as[0].quartile, 1);
  EXPECT_EQ(as[1].subject_id, "Z");
  EXPECT_EQ(as[1].quartile, 3);
}

TEST(Quartiles, EffectPerQuartile) {
  const auto rep = accuracy_quartile_effect(quartile_fixture());
  ASSERT_FALSE(rep.skipped);
  for (int q = 1; q <= 4; ++q) {
    const auto& c = rep.at(ImprovementMetric::conditional_on_revision, q);
    ASSERT_TRUE(c.probability);
    EXPECT_DOUBLE_EQ(*c.probability, 1.0);
    EXPECT_EQ(c.subjects, 6u);  // two per trial, three trials
    EXPECT_EQ(c.units, 3u);
  }
}

TEST(Quartiles, SkippedWithoutRepeatSubjects) {
  const std::vector<TrialRecord> trials{converged_fixture()};
  const auto rep = accuracy_quartile_effect(trials);
  EXPECT_TRUE(rep.skipped);
  EXPECT_FALSE(rep.reason.empty());
}
