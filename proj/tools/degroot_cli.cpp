// degroot: simulate DeGroot dynamics, evaluate the closed-form error
// predictions, sweep phase grids, verify predictions against simulation, and
// reanalyze pre/post estimation trial data.
//
// Exit codes: 0 success, 1 validation failure, 2 verification tolerance
// exceeded, 3 I/O error. Errors are reported as one JSON line on stderr.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "degroot/degroot.hpp"
#include "degroot/report.hpp"

namespace fs = std::filesystem;
using namespace degroot;
using nlohmann::ordered_json;

namespace {

enum ExitCode : int { kOk = 0, kValidation = 1, kVerifyFailed = 2, kIo = 3 };

void emit_error(const char* kind, const std::string& message) {
  std::cerr << ordered_json{{"error", kind}, {"message", message}}.dump() << '\n';
}

// Writes a set of files only after all contents are ready; if any write
// fails the ones already written are removed again.
void write_outputs(const std::vector<std::pair<fs::path, std::string>>& files) {
  std::vector<fs::path> done;
  try {
    for (const auto& [path, content] : files) {
      csv::write_file_atomic(path, content);
      done.push_back(path);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : done) fs::remove(p, ec);
    throw;
  }
}

void write_or_print(const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
  } else {
    write_outputs({{fs::path(out), content}});
  }
}

// A network argument is a CSV path or "kind:n[:param]" where param is the
// dictator dominance, the star hub weight or the random minimum self-weight.
InfluenceMatrix resolve_network(const std::string& spec, std::uint64_t seed) {
  if (fs::exists(spec)) return load_influence_matrix(spec);
  const auto first = spec.find(':');
  if (first == std::string::npos) throw IoError("network file not found: " + spec);
  const auto kind = parse_generator_kind(spec.substr(0, first));
  const auto rest = spec.substr(first + 1);
  const auto second = rest.find(':');
  std::size_t n = 0;
  try {
    n = std::stoul(rest.substr(0, second));
  } catch (const std::exception&) {
    throw PreconditionError("bad agent count in network spec '" + spec + "'");
  }
  GeneratorParams params;
  if (second != std::string::npos) {
    const auto value = csv::parse_double(rest.substr(second + 1));
    if (!value) throw PreconditionError("bad parameter in network spec '" + spec + "'");
    if (kind == GeneratorKind::dictator) params.dominance = *value;
    if (kind == GeneratorKind::star) params.hub_weight = *value;
    if (kind == GeneratorKind::random_row_stochastic) params.min_self_weight = *value;
  }
  return generate(kind, n, seed, params);
}

Opinions resolve_opinions(const std::string& spec, std::size_t n, std::uint64_t seed) {
  if (spec == "random") {
    auto eng = rng::make_engine(seed, 1);
    Opinions x(n);
    for (auto& xi : x) xi = rng::normal(eng);
    return x;
  }
  auto x = load_opinions(spec);
  if (x.size() != n) {
    throw PreconditionError("opinions file has " + std::to_string(x.size()) + " entries, network has " +
                            std::to_string(n) + " agents");
  }
  return x;
}

ordered_json diagnostics_json(const NetworkDiagnostics& d) {
  return {{"row_stochastic", d.row_stochastic},
          {"strongly_connected", d.strongly_connected},
          {"aperiodic", d.aperiodic},
          {"max_row_sum_error", d.max_row_sum_error}};
}

struct NetworkArgs {
  std::string network;
  std::string opinions = "random";
  std::optional<double> truth;
  std::uint64_t seed = 1;
  std::string out;
};

void add_network_args(CLI::App* cmd, NetworkArgs& a, bool truth_required) {
  cmd->add_option("--network", a.network, "Matrix CSV or generator spec kind:n[:param]")->required();
  cmd->add_option("--opinions", a.opinions, "One-column CSV of initial opinions, or 'random'")
      ->capture_default_str();
  auto* t = cmd->add_option("--truth", a.truth, "True value of the estimated quantity");
  if (truth_required) t->required();
  cmd->add_option("--seed", a.seed, "Seed for generated networks and random opinions")->capture_default_str();
  cmd->add_option("--out", a.out, "Write JSON here instead of stdout");
}

int run_simulate(const NetworkArgs& a, const IterationOptions& it, const std::string& trajectory_path) {
  const auto w = resolve_network(a.network, a.seed);
  const auto x0 = resolve_opinions(a.opinions, w.size(), a.seed);
  const auto diag = validate(w);
  const auto traj = iterate_to_convergence(w, x0, it);

  ordered_json j;
  j["n"] = w.size();
  j["diagnostics"] = diagnostics_json(diag);
  j["trajectory"] = report::trajectory_summary(traj);
  if (diag.ok()) {
    const auto v = leading_influence_vector(w);
    j["centrality"] = report::to_json(v.values());
    j["c_v"] = influence_centralization(v);
    j["consensus_asymptotic"] = asymptotic_consensus(v, x0);
    if (a.truth) {
      const auto e = bias_transform(x0, *a.truth);
      if (stats::stddev(e) > 0.0) {
        j["crowd_stats"] = report::to_json(crowd_stats(v, e));
        const auto ch = standardized_error_changes(e, bias_transform(traj.final_state(), *a.truth));
        j["observed_change"] = {{"crowd", ch.crowd}, {"individual", ch.individual}};
      }
    }
  }
  std::vector<std::pair<fs::path, std::string>> files;
  if (!trajectory_path.empty()) files.emplace_back(trajectory_path, trajectory_to_csv(traj));
  const std::string json_text = j.dump(2) + '\n';
  if (!a.out.empty()) files.emplace_back(a.out, json_text);
  write_outputs(files);
  if (a.out.empty()) std::cout << json_text;
  return kOk;
}

int run_predict(const NetworkArgs& a) {
  const auto w = resolve_network(a.network, a.seed);
  const auto x0 = resolve_opinions(a.opinions, w.size(), a.seed);
  const auto v = leading_influence_vector(w);
  const auto e = bias_transform(x0, *a.truth);
  const auto p = predict(v, e);
  ordered_json j;
  j["n"] = w.size();
  j["centrality"] = report::to_json(v.values());
  j["consensus_asymptotic"] = asymptotic_consensus(v, x0);
  j.update(report::to_json(p));
  write_or_print(a.out, j.dump(2) + '\n');
  return kOk;
}

int run_sweep(const PhaseGridParams& p, const std::string& out) {
  const auto grid = phase_grid(p);
  const std::string csv_text = phase_grid_to_csv(grid);
  if (out.empty()) {
    std::cout << csv_text;
    return kOk;
  }
  ordered_json side = {{"axes", p.axes == PhaseAxes::calibration_herding ? "calibration-herding" : "alpha-z"},
                       {"axis1", axis_names(p.axes, 1)},
                       {"axis2", axis_names(p.axes, 2)},
                       {"axis1_range", {p.axis1_min, p.axis1_max}},
                       {"axis2_range", {p.axis2_min, p.axis2_max}},
                       {"resolution", p.resolution},
                       {"c_v", p.c_v},
                       {"s_e", p.s_e},
                       {"s_e2", p.s_e2},
                       {"s_d2", p.s_d2}};
  if (p.axes == PhaseAxes::calibration_herding) side["z"] = p.z;
  fs::path sidecar(out);
  sidecar.replace_extension(".json");
  if (sidecar == fs::path(out)) sidecar += ".params.json";
  write_outputs({{fs::path(out), csv_text}, {sidecar, side.dump(2) + '\n'}});
  return kOk;
}

int run_verify(const VerifyOptions& opt, const std::string& out) {
  const auto rep = run_verification(opt);
  write_or_print(out, report::to_json(rep).dump(2) + '\n');
  if (!rep.passed()) {
    emit_error("verification", "analytic and simulated error changes differ beyond tolerance");
    return kVerifyFailed;
  }
  return kOk;
}

struct ReanalyzeArgs {
  std::string input;
  double threshold = 10.0;
  std::string filter = "threshold";
  std::string metric = "both";
  std::string group_rule = "paired";
  empirical::BootstrapOptions boot;
  std::string out_dir;
};

int run_reanalyze(const ReanalyzeArgs& a) {
  using namespace empirical;
  const auto filter = parse_regression_filter(a.filter);
  if (!filter) throw PreconditionError("unknown filter '" + a.filter + "'");
  std::vector<ImprovementMetric> metrics;
  if (a.metric == "both" || a.metric == "conditional_on_revision") metrics.push_back(ImprovementMetric::conditional_on_revision);
  if (a.metric == "both" || a.metric == "improve_or_stay") metrics.push_back(ImprovementMetric::improve_or_stay);
  if (metrics.empty()) throw PreconditionError("unknown metric '" + a.metric + "'");
  if (a.group_rule != "paired" && a.group_rule != "strict" && a.group_rule != "not_worse") {
    throw PreconditionError("unknown group rule '" + a.group_rule + "'");
  }

  const auto loaded = load_trials(a.input);
  if (loaded.trials.empty()) throw PreconditionError("no valid trials in " + a.input);

  ordered_json j;
  ordered_json rejected = ordered_json::array();
  for (const auto& r : loaded.rejections) {
    rejected.push_back({{"line", r.line}, {"trial", r.trial_key}, {"reason", r.reason}});
  }
  j["input"] = {{"path", a.input},
                {"trials", loaded.trials.size()},
                {"non_standardizable", loaded.non_standardizable()},
                {"rejected", rejected}};

  const auto changes = all_error_changes(loaded.trials);
  std::vector<TrialErrorChange> points;
  for (const auto& c : changes) points.push_back(c.change);
  j["band_fraction"] = points.empty() ? ordered_json(nullptr) : ordered_json(fraction_in_unit_band(points));
  try {
    j["regression"] = report::to_json(fit_group_individual_regression(points, a.threshold, *filter, a.boot));
  } catch (const Error& e) {
    j["regression"] = {{"error", e.what()}};
  }

  std::vector<ImprovementTable> tables;
  for (auto m : metrics) {
    GroupOutcomeRule rule = m == ImprovementMetric::conditional_on_revision ? GroupOutcomeRule::strict_improvement
                                                                            : GroupOutcomeRule::not_worse;
    if (a.group_rule == "strict") rule = GroupOutcomeRule::strict_improvement;
    if (a.group_rule == "not_worse") rule = GroupOutcomeRule::not_worse;
    tables.push_back(improvement_probabilities(loaded.trials, m, rule, a.boot));
  }
  ordered_json tj = ordered_json::array();
  for (const auto& t : tables) tj.push_back(report::to_json(t));
  j["improvement"] = tj;

  const auto quart = accuracy_quartile_effect(loaded.trials, a.boot);
  j["quartiles"] = report::to_json(quart, metrics);

  const std::string json_text = j.dump(2) + '\n';
  if (a.out_dir.empty()) {
    std::cout << json_text;
    return kOk;
  }
  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + a.out_dir);
  write_outputs({{dir / "report.json", json_text},
                 {dir / "trial_changes.csv", report::trial_changes_csv(changes)},
                 {dir / "improvement.csv", report::improvement_tables_csv(tables)},
                 {dir / "quartiles.csv", report::quartiles_csv(quart)}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeGroot influence-network simulator and crowd-accuracy analytics"};
  app.require_subcommand(1);

  NetworkArgs sim_args;
  IterationOptions sim_it;
  std::string trajectory_path;
  auto* sim = app.add_subcommand("simulate", "Run DeGroot updating to convergence");
  add_network_args(sim, sim_args, false);
  sim->add_option("--tol", sim_it.tol, "Convergence tolerance")->capture_default_str();
  sim->add_option("--max-steps", sim_it.max_steps, "Step limit")->capture_default_str();
  sim->add_flag("--record", sim_it.record, "Keep every intermediate state in the trajectory CSV");
  sim->add_option("--trajectory", trajectory_path, "Write the trajectory as CSV");

  NetworkArgs pred_args;
  auto* pred = app.add_subcommand("predict", "Closed-form asymptotic error changes");
  add_network_args(pred, pred_args, true);

  PhaseGridParams grid;
  std::string axes = "calibration-herding";
  std::string sweep_out;
  std::vector<double> range1, range2;
  auto* sweep = app.add_subcommand("sweep", "Phase grid of predicted error changes");
  sweep->add_option("--cv", grid.c_v, "Influence centralization")->capture_default_str();
  sweep->add_option("--z", grid.z, "Standardized crowd bias")->capture_default_str();
  sweep->add_option("--se", grid.s_e, "Bias standard deviation")->capture_default_str();
  sweep->add_option("--se2", grid.s_e2, "Standard deviation of squared biases")->capture_default_str();
  sweep->add_option("--sd2", grid.s_d2, "Standard deviation of squared distances")->capture_default_str();
  sweep->add_option("--resolution", grid.resolution, "Points per axis")->capture_default_str();
  sweep->add_option("--axes", axes, "calibration-herding or alpha-z")->capture_default_str();
  sweep->add_option("--axis1-range", range1, "min max of the first axis")->expected(2);
  sweep->add_option("--axis2-range", range2, "min max of the second axis")->expected(2);
  sweep->add_option("--out", sweep_out, "Grid CSV path; a .json parameter sidecar is written next to it");

  VerifyOptions vopt;
  std::string verify_out;
  auto* ver = app.add_subcommand("verify", "Check predictions against simulation on random networks");
  ver->add_option("--trials", vopt.trials, "Number of random networks")->capture_default_str();
  ver->add_option("--nmin", vopt.n_min, "Smallest network")->capture_default_str();
  ver->add_option("--nmax", vopt.n_max, "Largest network")->capture_default_str();
  ver->add_option("--seed", vopt.seed, "Seed")->capture_default_str();
  ver->add_option("--tol", vopt.tolerance, "Allowed relative deviation")->capture_default_str();
  ver->add_option("--sim-tol", vopt.sim_tol, "Simulation convergence tolerance")->capture_default_str();
  ver->add_option("--out", verify_out, "Write JSON report here instead of stdout");

  ReanalyzeArgs re;
  auto* rea = app.add_subcommand("reanalyze", "Regression, band fraction, improvement and quartile analyses");
  rea->add_option("trials", re.input, "Trial CSV")->required();
  rea->add_option("--threshold", re.threshold, "Exclude trials with a standardized change beyond this")
      ->capture_default_str();
  rea->add_option("--filter", re.filter, "none, threshold, offset_positive or both")->capture_default_str();
  rea->add_option("--metric", re.metric, "conditional_on_revision, improve_or_stay or both")->capture_default_str();
  rea->add_option("--group-rule", re.group_rule, "paired, strict or not_worse")->capture_default_str();
  rea->add_option("--resamples", re.boot.resamples, "Bootstrap resamples")->capture_default_str();
  rea->add_option("--level", re.boot.level, "Confidence level")->capture_default_str();
  rea->add_option("--seed", re.boot.seed, "Bootstrap seed")->capture_default_str();
  rea->add_option("--out-dir", re.out_dir, "Write report.json and CSV tables here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return kValidation;
  }

  try {
    if (*sim) return run_simulate(sim_args, sim_it, trajectory_path);
    if (*pred) return run_predict(pred_args);
    if (*sweep) {
      if (axes == "alpha-z") {
        grid.axes = PhaseAxes::alpha_z;
        const double reach = std::max(1.0, grid.c_v * 2.0);
        grid.axis1_min = -reach;
        grid.axis1_max = reach;
        grid.axis2_min = -2.0;
        grid.axis2_max = 2.0;
      } else if (axes != "calibration-herding") {
        throw PreconditionError("unknown axes '" + axes + "'");
      }
      if (!range1.empty()) std::tie(grid.axis1_min, grid.axis1_max) = std::pair(range1[0], range1[1]);
      if (!range2.empty()) std::tie(grid.axis2_min, grid.axis2_max) = std::pair(range2[0], range2[1]);
      return run_sweep(grid, sweep_out);
    }
    if (*ver) return run_verify(vopt, verify_out);
    if (*rea) return run_reanalyze(re);
  } catch (const IoError& e) {
    emit_error("io", e.what());
    return kIo;
  } catch (const Error& e) {
    emit_error("validation", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return kValidation;
  }
  return kValidation;
}
