#pragma once

#include "phonox/envelope.hpp"
#include "phonox/geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace phonox {

using Objective = std::function<double(const std::vector<double>&)>;

struct NelderMeadOptions {
  int max_evals = 2000;
  double x_tol = 1e-10;   // simplex size, relative to the initial steps
  double f_tol = 1e-14;   // value spread, relative to max(1, |f_best|)
  /// Initial simplex steps per coordinate; empty = 5% of |x| (or 0.05 at 0).
  std::vector<double> steps;
  /// Value used for non-finite evaluations away from x0.
  double penalty_value = 1e300;
};

struct TracePoint {
  int eval = 0;
  std::vector<double> x;
  double f = 0.0;
  double best = 0.0;  // running minimum
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  int iterations = 0;
  std::string stop;  // "x_tol", "f_tol" or "max_evals"
  std::vector<TracePoint> trace;
};

/// Minimizes f with reflect/expand/contract/shrink steps. Throws
/// ValidationError when f(x0) is not finite.
NelderMeadResult nelder_mead(const Objective& f, const std::vector<double>& x0, const NelderMeadOptions& opts = {});

/// min(evaluate(1), evaluate(scale)): evaluate receives the EMC period factor.
/// Exceptions count as -infinity.
double robust_objective(const std::function<double(double)>& evaluate, double scale = 1.02);

/// Named design parameter "role:field" acting on every region-defining cell
/// with that role; field is a, hx, hy or w (ellipse fields keep per-film
/// offsets, w shifts all films). Metres.
struct DesignParameter {
  std::string name;
  double lo = 0.0, hi = 0.0;
};

struct DesignVector {
  std::vector<DesignParameter> params;
  std::vector<double> values;

  void validate() const;
  /// Values clamped into the bounds.
  std::vector<double> clamped(const std::vector<double>& x) const;
  nlohmann::json to_json() const;
};

/// Current values of the named parameters with bounds value * (1 -+ rel_range).
DesignVector design_from_layout(const DeviceLayout& layout, const std::vector<std::string>& names,
                                double rel_range = 0.1);
DeviceLayout apply_design(const DeviceLayout& layout, const DesignVector& dv, const std::vector<double>& x);

/// Minimum-feature violations of every cell (webs a - h_x, rails (w - h_y)/2,
/// hole axes), one message per offending cell and quantity. Non-positive
/// webs and rails (merged holes that cut the film) are not features.
std::vector<std::string> feature_violations(const DeviceLayout& layout, double min_feature);

struct ObjectiveSpec {
  double Qo_max = 1e6;
  double Qm_max = 1e4;
  bool omc_only = false;        // drop the g_em factor
  bool robust = true;
  double robust_scale = 1.02;
  double f_m_lo = 4.5e9, f_m_hi = 5.5e9;     // Hz
  double f_o_lo = 185e12, f_o_hi = 205e12;   // Hz
  double min_feature = 40e-9;
  double penalty = 10.0;        // relative to |f_obj(x0)|
  int starts = 1;               // multi-start count; extra starts are seeded random points
  std::uint64_t seed = 1;
  int mech_modes = 12;

  void validate() const;
  nlohmann::json to_json() const;
};

struct TransducerFigures {
  double g_om = 0.0, g_em = 0.0;  // rad/s
  double Q_o = 0.0, Q_m = 0.0;
  double f_m = 0.0, f_o = 0.0;    // Hz
  /// g_om g_em min(Q_o, Q_o,max) min(Q_m, Q_m,max) with rates as g/2pi in MHz.
  double f_obj = 0.0;
};

/// Envelope-model figures of the mode with the highest g_om.
TransducerFigures evaluate_layout(const DeviceLayout& layout, const BandSource& bands, const ObjectiveSpec& spec);
/// Objective value with the caps applied; the g_em factor is dropped for omc_only.
double capped_objective(double g_om, double g_em, double Q_o, double Q_m, const ObjectiveSpec& spec);

struct OptimizationTraceRow {
  int eval = 0;
  int start = 0;
  std::vector<double> x;
  double f = 0.0;     // minimized value: -f_obj + penalties
  double f_obj = 0.0;
  bool bounds_violated = false, feature_violated = false, window_violated = false;
};

struct OptimizationReport {
  DesignVector design;
  std::vector<double> x0, x_best;
  double f_obj0 = 0.0, f_obj_best = 0.0;
  TransducerFigures initial, best;
  DeviceLayout layout;
  std::vector<OptimizationTraceRow> trace;
  int evals = 0;

  nlohmann::json to_json() const;
};

/// Nelder-Mead over the design with exterior quadratic penalties, optional
/// robustness pairing and multi-start. budget = objective evaluations.
/// Throws ValidationError listing the violations of an infeasible start.
OptimizationReport optimize_design(const DeviceLayout& layout, const DesignVector& design, const BandSource& bands,
                                   const ObjectiveSpec& spec, int budget);

/// Default parameters: partial mirror (a, h_y) and, unless omc_only, EMC defect (a, h_y).
std::vector<std::string> default_design_parameters(const DeviceLayout& layout, bool omc_only);

}  // namespace phonox
