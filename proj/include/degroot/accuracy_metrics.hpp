#pragma once

// Crowd and individual error, truth alignment and its calibration/herding
// decomposition, closed-form asymptotic error changes, improvement regions
// and phase grids over (calibration, herding) or (alpha, z).
//
// All "change" quantities are standardized by the initial bias variance s_e^2
// unless a name says raw.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "degroot/csv.hpp"
#include "degroot/error.hpp"
#include "degroot/influence_network.hpp"
#include "degroot/stats.hpp"

namespace degroot {

inline constexpr double kDegenerateZ = 1e-9;

inline void require_min_agents(std::span<const double> e) {
  if (e.size() < 2) throw PreconditionError("error metrics need at least 2 agents");
}

// E(e)^2
inline double crowd_error(std::span<const double> e) {
  require_min_agents(e);
  const double m = stats::mean(e);
  return m * m;
}

// E(e^2)
inline double individual_error(std::span<const double> e) {
  require_min_agents(e);
  double acc = 0.0;
  for (double x : e) acc += x * x;
  return acc / static_cast<double>(e.size());
}

// s_e^2
inline double diversity(std::span<const double> e) {
  require_min_agents(e);
  return stats::variance(e);
}

// Summary of an initial configuration of influence shares and biases.
struct CrowdStats {
  double z = 0.0;        // E(e) / s_e
  double s_e = 0.0;
  double c_v = 0.0;
  double r_ve = 0.0;     // r(v, e)
  double alpha = 0.0;    // -z c_v r(v, e)
  double calibration = 0.0;  // -r(v, e^2)
  double herding = 0.0;      // -r(v, d^2)
  double s_e2 = 0.0;     // s(e^2)
  double s_d2 = 0.0;     // s(d^2)
};

namespace detail {
inline void require_same_length(const CentralityVector& v, std::span<const double> e) {
  if (v.size() != e.size()) throw PreconditionError("centrality and bias vectors differ in length");
}
inline double require_diverse(std::span<const double> e) {
  const double s = stats::stddev(e);
  if (!(s > 0.0)) throw DegenerateInputError("bias diversity s_e is zero; standardized quantities are undefined");
  return s;
}
}  // namespace detail

// c_v r(v, e), the standardized asymptotic change in crowd bias. Computed as
// cov(v, e) / (E(v) s_e), which stays exact when v is constant.
inline double standardized_change_in_bias(const CentralityVector& v, std::span<const double> e) {
  detail::require_same_length(v, e);
  const double s_e = detail::require_diverse(e);
  return stats::covariance(v.values(), e) / (stats::mean(v.values()) * s_e);
}

inline double truth_alignment(double z, double c_v, double r_ve) { return -z * c_v * r_ve; }

// Truth alignment from calibration and herding:
//   alpha = c_v / (2 s_e^2) * (s(d^2) r(v, d^2) - s(e^2) r(v, e^2)).
inline double alpha_from_decomposition(double c_v, double s_e, double s_e2, double r_ve2, double s_d2,
                                       double r_vd2) {
  if (!(s_e > 0.0)) throw DegenerateInputError("alpha decomposition requires s_e > 0");
  return c_v / (2.0 * s_e * s_e) * (s_d2 * r_vd2 - s_e2 * r_ve2);
}

// Vector form. Each std-times-correlation product is evaluated as a
// covariance over s_v, so constant e^2 or d^2 contributes exactly 0.
inline double alpha_from_decomposition(const CentralityVector& v, std::span<const double> e) {
  detail::require_same_length(v, e);
  const double s_e = detail::require_diverse(e);
  const double c_v = influence_centralization(v);
  const auto e2 = stats::squared(e);
  const auto d2 = stats::squared(stats::centered(e));
  const double herd_term = stats::std_times_correlation(v.values(), d2);
  const double cal_term = stats::std_times_correlation(v.values(), e2);
  return c_v / (2.0 * s_e * s_e) * (herd_term - cal_term);
}

inline CrowdStats crowd_stats(const CentralityVector& v, std::span<const double> e) {
  detail::require_same_length(v, e);
  CrowdStats s;
  s.s_e = detail::require_diverse(e);
  s.z = stats::mean(e) / s.s_e;
  s.c_v = influence_centralization(v);
  s.r_ve = stats::correlation(v.values(), e);
  s.alpha = truth_alignment(s.z, s.c_v, s.r_ve);
  const auto e2 = stats::squared(e);
  const auto d2 = stats::squared(stats::centered(e));
  s.calibration = -stats::correlation(v.values(), e2);
  s.herding = -stats::correlation(v.values(), d2);
  s.s_e2 = stats::stddev(e2);
  s.s_d2 = stats::stddev(d2);
  return s;
}

// Asymptotic change in crowd error, c_v^2 r^2 + 2 z c_v r, in units of s_e^2.
inline double predicted_crowd_error_change(double c_v, double r_ve, double z) {
  const double cr = c_v * r_ve;
  return cr * cr + 2.0 * z * cr;
}

// Asymptotic change in mean individual error; always one s_e^2 below the
// crowd change.
inline double predicted_individual_error_change(double c_v, double r_ve, double z) {
  return predicted_crowd_error_change(c_v, r_ve, z) - 1.0;
}

// alpha^2 / z^2 - 2 alpha; defined only for z != 0.
inline double crowd_error_change_from_alpha(double alpha, double z) {
  if (!(std::abs(z) > kDegenerateZ)) throw DegenerateInputError("alpha form of the error change needs z != 0");
  return alpha * alpha / (z * z) - 2.0 * alpha;
}

inline double individual_error_change_from_alpha(double alpha, double z) {
  return crowd_error_change_from_alpha(alpha, z) - 1.0;
}

struct ImprovementRegions {
  bool crowd_improves = false;
  bool individual_improves = false;
};

struct AlphaInterval {
  double lo;
  double hi;
};

// Open interval of alpha over which crowd error decreases: (0, 2 z^2).
inline AlphaInterval crowd_improvement_interval(double z) { return {0.0, 2.0 * z * z}; }

// Open interval over which mean individual error decreases:
// z^2 (1 -/+ sqrt(1 + 1/z^2)).
inline AlphaInterval individual_improvement_interval(double z) {
  if (!(std::abs(z) > kDegenerateZ)) throw DegenerateInputError("improvement boundaries need z != 0");
  const double z2 = z * z;
  const double root = std::sqrt(1.0 + 1.0 / z2);
  return {z2 * (1.0 - root), z2 * (1.0 + root)};
}

inline ImprovementRegions improvement_regions(double alpha, double z) {
  const auto ind = individual_improvement_interval(z);
  const auto crowd = crowd_improvement_interval(z);
  return {crowd.lo < alpha && alpha < crowd.hi, ind.lo < alpha && alpha < ind.hi};
}

// Everything the closed form says about one initial configuration.
struct Prediction {
  CrowdStats stats;
  double delta_z = 0.0;               // c_v r(v, e)
  double alpha_decomposed = 0.0;      // alpha via calibration and herding
  double crowd_change = 0.0;          // standardized
  double individual_change = 0.0;     // standardized
  double crowd_change_raw = 0.0;
  double individual_change_raw = 0.0;
  bool regions_defined = false;       // false when |z| <= kDegenerateZ
  ImprovementRegions regions;
};

inline Prediction predict(const CentralityVector& v, std::span<const double> e) {
  Prediction p;
  p.stats = crowd_stats(v, e);
  p.delta_z = standardized_change_in_bias(v, e);
  p.alpha_decomposed = alpha_from_decomposition(v, e);
  p.crowd_change = predicted_crowd_error_change(p.stats.c_v, p.stats.r_ve, p.stats.z);
  p.individual_change = predicted_individual_error_change(p.stats.c_v, p.stats.r_ve, p.stats.z);
  const double var = p.stats.s_e * p.stats.s_e;
  p.crowd_change_raw = p.crowd_change * var;
  p.individual_change_raw = p.individual_change * var;
  if (std::abs(p.stats.z) > kDegenerateZ) {
    p.regions_defined = true;
    p.regions = improvement_regions(p.stats.alpha, p.stats.z);
  }
  return p;
}

// Observed change between two bias vectors of the same agents, standardized
// by the variance of the initial biases.
struct ErrorChange {
  double crowd = 0.0;       // Delta E(e)^2 / s_e^2
  double individual = 0.0;  // Delta E(e^2) / s_e^2
};

inline ErrorChange standardized_error_changes(std::span<const double> e_pre, std::span<const double> e_post) {
  if (e_pre.size() != e_post.size()) throw PreconditionError("pre and post bias vectors differ in length");
  const double var = diversity(e_pre);
  if (!(var > 0.0)) throw DegenerateInputError("bias diversity s_e is zero; standardized changes are undefined");
  return {(crowd_error(e_post) - crowd_error(e_pre)) / var,
          (individual_error(e_post) - individual_error(e_pre)) / var};
}

// ---------------------------------------------------------------------------
// Phase grids

enum class PhaseAxes { calibration_herding, alpha_z };

struct PhaseGridParams {
  double c_v = 2.0;
  double s_e = 1.0;
  double s_e2 = 1.0;
  double s_d2 = 1.0;
  double z = 1.0;  // fixed z for calibration x herding grids
  PhaseAxes axes = PhaseAxes::calibration_herding;
  // Axis ranges; calibration and herding are correlations in [-1, 1].
  double axis1_min = -1.0, axis1_max = 1.0;
  double axis2_min = -1.0, axis2_max = 1.0;
  std::size_t resolution = 201;
};

struct PhaseCell {
  double axis1 = 0.0;  // calibration, or alpha
  double axis2 = 0.0;  // herding, or z
  double alpha = 0.0;
  double z = 0.0;
  double crowd_change = 0.0;       // NaN when z == 0
  double individual_change = 0.0;  // NaN when z == 0
  bool crowd_improves = false;
  bool individual_improves = false;
  bool feasible = false;           // |alpha| <= |z| c_v
};

struct PhaseGrid {
  PhaseGridParams params;
  std::vector<double> axis1;
  std::vector<double> axis2;
  std::vector<PhaseCell> cells;  // axis2-major: cells[j * axis1.size() + i]

  const PhaseCell& at(std::size_t i, std::size_t j) const { return cells[j * axis1.size() + i]; }
};

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

inline PhaseCell evaluate_phase_cell(double alpha, double z, double c_v) {
  PhaseCell c;
  c.alpha = alpha;
  c.z = z;
  c.feasible = std::abs(alpha) <= std::abs(z) * c_v + 1e-12;
  if (std::abs(z) > kDegenerateZ) {
    c.crowd_change = crowd_error_change_from_alpha(alpha, z);
    c.individual_change = c.crowd_change - 1.0;
    const auto r = improvement_regions(alpha, z);
    c.crowd_improves = r.crowd_improves;
    c.individual_improves = r.individual_improves;
  } else {
    c.crowd_change = std::nan("");
    c.individual_change = std::nan("");
  }
  return c;
}

inline PhaseGrid phase_grid(const PhaseGridParams& p) {
  if (p.resolution < 2) throw PreconditionError("phase grid resolution must be at least 2");
  if (!(p.s_e > 0.0)) throw PreconditionError("phase grid needs s_e > 0");
  if (!(p.c_v >= 0.0)) throw PreconditionError("phase grid needs c_v >= 0");
  PhaseGrid g;
  g.params = p;
  g.axis1 = linspace(p.axis1_min, p.axis1_max, p.resolution);
  g.axis2 = linspace(p.axis2_min, p.axis2_max, p.resolution);
  g.cells.reserve(g.axis1.size() * g.axis2.size());
  for (double a2 : g.axis2) {
    for (double a1 : g.axis1) {
      double alpha = 0.0;
      double z = p.z;
      if (p.axes == PhaseAxes::calibration_herding) {
        // r(v, e^2) = -calibration, r(v, d^2) = -herding.
        alpha = alpha_from_decomposition(p.c_v, p.s_e, p.s_e2, -a1, p.s_d2, -a2);
      } else {
        alpha = a1;
        z = a2;
      }
      PhaseCell c = evaluate_phase_cell(alpha, z, p.c_v);
      c.axis1 = a1;
      c.axis2 = a2;
      g.cells.push_back(c);
    }
  }
  return g;
}

inline const char* axis_names(PhaseAxes a, int which) {
  if (a == PhaseAxes::calibration_herding) return which == 1 ? "calibration" : "herding";
  return which == 1 ? "alpha" : "z";
}

inline std::string phase_grid_to_csv(const PhaseGrid& g) {
  std::string out = "axis1,axis2,alpha,crowd_change,individual_change,crowd_improves,individual_improves,feasible\n";
  for (const auto& c : g.cells) {
    out += csv::format_double(c.axis1) + ',' + csv::format_double(c.axis2) + ',' + csv::format_double(c.alpha) +
           ',' + csv::format_double(c.crowd_change) + ',' + csv::format_double(c.individual_change) + ',' +
           (c.crowd_improves ? '1' : '0') + ',' + (c.individual_improves ? '1' : '0') + ',' +
           (c.feasible ? '1' : '0') + '\n';
  }
  return out;
}

}  // namespace degroot
