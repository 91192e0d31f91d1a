#include "phonox/optimize.hpp"

#include "phonox/constants.hpp"
#include "phonox/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace phonox {

// ---------------------------------------------------------------------------
// Nelder-Mead

NelderMeadResult nelder_mead(const Objective& f, const std::vector<double>& x0, const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  if (n == 0) throw ValidationError("nelder_mead: empty parameter vector");
  if (opts.max_evals < 1) throw ValidationError("nelder_mead: max_evals must be >= 1");
  std::vector<double> steps = opts.steps;
  if (steps.empty()) {
    steps.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) steps[static_cast<std::size_t>(i)] = x0[static_cast<std::size_t>(i)] != 0.0 ? 0.05 * std::abs(x0[static_cast<std::size_t>(i)]) : 0.05;
  }
  if (static_cast<int>(steps.size()) != n) throw ValidationError("nelder_mead: steps and x0 differ in length");
  for (double s : steps)
    if (!(s > 0.0)) throw ValidationError("nelder_mead: initial steps must be > 0");

  NelderMeadResult res;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_x = x0;
  const auto eval = [&](const std::vector<double>& x) {
    double v = f(x);
    if (!std::isfinite(v)) {
      if (res.evals == 0) throw ValidationError("nelder_mead: objective is not finite at x0");
      v = opts.penalty_value;
    }
    ++res.evals;
    if (v < best) {
      best = v;
      best_x = x;
    }
    res.trace.push_back({res.evals, x, v, best});
    return v;
  };
  const auto finish = [&](const std::string& why) {
    res.x = best_x;
    res.f = best;
    res.stop = why;
    return res;
  };

  std::vector<std::vector<double>> sx(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> fx(static_cast<std::size_t>(n + 1));
  fx[0] = eval(x0);
  for (int i = 0; i < n; ++i) {
    if (res.evals >= opts.max_evals) return finish("max_evals");
    sx[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(i)] += steps[static_cast<std::size_t>(i)];
    fx[static_cast<std::size_t>(i + 1)] = eval(sx[static_cast<std::size_t>(i + 1)]);
  }

  constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  std::vector<int> order(static_cast<std::size_t>(n + 1));
  const auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) p[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)] + t * (w[static_cast<std::size_t>(j)] - c[static_cast<std::size_t>(j)]);
    return p;
  };

  for (;;) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fx[static_cast<std::size_t>(a)] < fx[static_cast<std::size_t>(b)]; });
    {
      std::vector<std::vector<double>> s2;
      std::vector<double> f2;
      for (int i : order) {
        s2.push_back(sx[static_cast<std::size_t>(i)]);
        f2.push_back(fx[static_cast<std::size_t>(i)]);
      }
      sx.swap(s2);
      fx.swap(f2);
    }
    double size = 0.0;
    for (int i = 1; i <= n; ++i)
      for (int j = 0; j < n; ++j)
        size = std::max(size, std::abs(sx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - sx[0][static_cast<std::size_t>(j)]) / steps[static_cast<std::size_t>(j)]);
    const double spread = fx[static_cast<std::size_t>(n)] - fx[0];
    if (size <= opts.x_tol) return finish("x_tol");
    if (spread <= opts.f_tol * std::max(1.0, std::abs(fx[0]))) {
      // flat simplex: the centroid is returned when it is no worse
      std::vector<double> c(static_cast<std::size_t>(n), 0.0);
      for (const auto& v : sx)
        for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(j)] += v[static_cast<std::size_t>(j)] / (n + 1);
      if (res.evals < opts.max_evals) {
        const double fc = eval(c);
        if (fc <= fx[0]) {
          best = fc;
          best_x = c;
        }
      }
      return finish("f_tol");
    }
    if (res.evals >= opts.max_evals) return finish("max_evals");
    ++res.iterations;

    std::vector<double> c(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(j)] += sx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / n;
    const auto& worst = sx[static_cast<std::size_t>(n)];
    const auto xr = point(c, worst, -alpha);
    const double fr = eval(xr);
    if (fr < fx[0]) {
      if (res.evals >= opts.max_evals) {
        sx[static_cast<std::size_t>(n)] = xr;
        fx[static_cast<std::size_t>(n)] = fr;
        continue;
      }
      const auto xe = point(c, worst, -gamma);
      const double fe = eval(xe);
      if (fe < fr) {
        sx[static_cast<std::size_t>(n)] = xe;
        fx[static_cast<std::size_t>(n)] = fe;
      } else {
        sx[static_cast<std::size_t>(n)] = xr;
        fx[static_cast<std::size_t>(n)] = fr;
      }
      continue;
    }
    if (fr < fx[static_cast<std::size_t>(n - 1)]) {
      sx[static_cast<std::size_t>(n)] = xr;
      fx[static_cast<std::size_t>(n)] = fr;
      continue;
    }
    if (res.evals >= opts.max_evals) continue;
    // contraction: outside when the reflection improved on the worst point
    const bool outside = fr < fx[static_cast<std::size_t>(n)];
    const auto xc = outside ? point(c, xr, rho) : point(c, worst, rho);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fx[static_cast<std::size_t>(n)])) {
      sx[static_cast<std::size_t>(n)] = xc;
      fx[static_cast<std::size_t>(n)] = fc;
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      if (res.evals >= opts.max_evals) break;
      sx[static_cast<std::size_t>(i)] = point(sx[0], sx[static_cast<std::size_t>(i)], sigma);
      fx[static_cast<std::size_t>(i)] = eval(sx[static_cast<std::size_t>(i)]);
    }
  }
}

double robust_objective(const std::function<double(double)>& evaluate, double scale) {
  const auto safe = [&](double s) {
    try {
      return evaluate(s);
    } catch (const std::exception&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  return std::min(safe(1.0), safe(scale));
}

// ---------------------------------------------------------------------------
// Design vectors

namespace {

struct ParamRef {
  std::string role, field;
};

ParamRef split_name(const std::string& name) {
  const auto p = name.find(':');
  if (p == std::string::npos) throw ValidationError("design parameter '" + name + "' is not of the form role:field");
  ParamRef r{name.substr(0, p), name.substr(p + 1)};
  if (r.field != "a" && r.field != "hx" && r.field != "hy" && r.field != "w")
    throw ValidationError("design parameter '" + name + "': field must be a, hx, hy or w");
  return r;
}

double cell_field(const UnitCell& c, const std::string& f) {
  if (f == "a") return c.a;
  if (f == "hx") return c.hx();
  if (f == "hy") return c.hy();
  return c.w();
}

void set_cell_field(UnitCell& c, const std::string& f, double v) {
  if (f == "a") {
    c.a = v;
  } else if (f == "hx") {
    c.set_ellipse(v, c.hy());
  } else if (f == "hy") {
    c.set_ellipse(c.hx(), v);
  } else {
    const double d = v - c.w();
    for (auto& l : c.stack) l.w += d;
  }
}

}  // namespace

void DesignVector::validate() const {
  if (params.empty()) throw ValidationError("design vector has no parameters");
  if (values.size() != params.size()) throw ValidationError("design vector: values and parameters differ in length");
  for (std::size_t i = 0; i < params.size(); ++i) {
    split_name(params[i].name);
    if (!(params[i].hi > params[i].lo)) throw ValidationError("design parameter " + params[i].name + ": empty bounds");
  }
}

std::vector<double> DesignVector::clamped(const std::vector<double>& x) const {
  std::vector<double> y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::clamp(y[i], params[i].lo, params[i].hi);
  return y;
}

nlohmann::json DesignVector::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i)
    j.push_back({{"name", params[i].name},
                 {"lo_m", params[i].lo},
                 {"hi_m", params[i].hi},
                 {"value_m", i < values.size() ? values[i] : 0.0}});
  return j;
}

DesignVector design_from_layout(const DeviceLayout& layout, const std::vector<std::string>& names, double rel_range) {
  if (!(rel_range > 0.0 && rel_range < 1.0)) throw ValidationError("design_from_layout: rel_range must be in (0, 1)");
  DesignVector dv;
  for (const auto& name : names) {
    const ParamRef r = split_name(name);
    const UnitCell* found = nullptr;
    for (const auto& reg : layout.regions) {
      if (reg.start.role == r.role) found = &reg.start;
      else if (reg.end.role == r.role) found = &reg.end;
      if (found) break;
    }
    if (!found) throw ValidationError("design parameter " + name + ": no cell with role '" + r.role + "'");
    const double v = cell_field(*found, r.field);
    dv.params.push_back({name, v * (1.0 - rel_range), v * (1.0 + rel_range)});
    dv.values.push_back(v);
  }
  return dv;
}

DeviceLayout apply_design(const DeviceLayout& layout, const DesignVector& dv, const std::vector<double>& x) {
  if (x.size() != dv.params.size()) throw ValidationError("apply_design: wrong parameter count");
  DeviceLayout out = layout;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const ParamRef r = split_name(dv.params[i].name);
    for (auto& reg : out.regions) {
      if (reg.start.role == r.role) set_cell_field(reg.start, r.field, x[i]);
      if (reg.end.role == r.role) set_cell_field(reg.end, r.field, x[i]);
    }
  }
  return out;
}

std::vector<std::string> feature_violations(const DeviceLayout& layout, double min_feature) {
  std::vector<std::string> v;
  const auto check = [&](const UnitCell& c, const std::string& where) {
    for (const auto& l : c.stack) {
      const auto add = [&](const char* what, double val) {
        if (val > 0.0 && val < min_feature)
          v.push_back(where + " " + l.material + " " + what + " " + std::to_string(val * 1e9) + " nm < " +
                      std::to_string(min_feature * 1e9) + " nm");
      };
      add("web a-hx", c.a - l.hx);
      add("rail (w-hy)/2", 0.5 * (l.w - l.hy));
      add("hx", l.hx);
      add("hy", l.hy);
      if (l.hx <= 0.0 || l.hy <= 0.0) v.push_back(where + " " + l.material + " hole axes must be > 0");
    }
  };
  for (const auto& reg : layout.regions) {
    check(reg.start, reg.name + " start");
    if (!(reg.end == reg.start)) check(reg.end, reg.name + " end");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Objective

void ObjectiveSpec::validate() const {
  if (!(Qo_max > 0.0) || !(Qm_max > 0.0)) throw ValidationError("objective caps must be > 0");
  if (!(robust_scale > 0.0)) throw ValidationError("robust_scale must be > 0");
  if (!(f_m_hi > f_m_lo) || !(f_o_hi > f_o_lo)) throw ValidationError("frequency windows must be non-empty");
  if (!(min_feature >= 0.0) || !(penalty >= 0.0)) throw ValidationError("min_feature and penalty must be >= 0");
  if (starts < 1) throw ValidationError("starts must be >= 1");
}

nlohmann::json ObjectiveSpec::to_json() const {
  return {{"Qo_max", Qo_max},       {"Qm_max", Qm_max},
          {"omc_only", omc_only},   {"robust", robust},
          {"robust_scale", robust_scale},
          {"f_m_window_Hz", {f_m_lo, f_m_hi}},
          {"f_o_window_Hz", {f_o_lo, f_o_hi}},
          {"min_feature_m", min_feature},
          {"penalty", penalty},     {"starts", starts},
          {"seed", seed},           {"mech_modes", mech_modes}};
}

double capped_objective(double g_om, double g_em, double Q_o, double Q_m, const ObjectiveSpec& spec) {
  const double go = g_om / constants::two_pi / 1e6, ge = g_em / constants::two_pi / 1e6;
  const double v = go * std::min(Q_o, spec.Qo_max) * std::min(Q_m, spec.Qm_max);
  return spec.omc_only ? v : v * ge;
}

TransducerFigures evaluate_layout(const DeviceLayout& layout, const BandSource& bands, const ObjectiveSpec& spec) {
  TransducerModeOptions o;
  o.mech_modes = spec.mech_modes;
  const TransducerModes tm = transducer_modes(layout.cells(), bands, o);
  if (tm.best_g_om < 0) throw NumericalError("evaluate_layout: no mechanical mode selected");
  const auto b = static_cast<std::size_t>(tm.best_g_om);
  TransducerFigures f;
  f.g_om = tm.g_om[b];
  f.g_em = tm.g_em[b];
  f.Q_m = tm.mech_modes[b].q();
  f.Q_o = tm.optical.q();
  f.f_m = tm.mech_modes[b].frequency_hz();
  f.f_o = tm.optical.frequency_hz();
  f.f_obj = capped_objective(f.g_om, f.g_em, f.Q_o, f.Q_m, spec);
  return f;
}

nlohmann::json OptimizationReport::to_json() const {
  const auto figs = [](const TransducerFigures& f) {
    return nlohmann::json{{"g_om_over_2pi_Hz", f.g_om / constants::two_pi},
                          {"g_em_over_2pi_Hz", f.g_em / constants::two_pi},
                          {"Q_o", f.Q_o},
                          {"Q_m", f.Q_m},
                          {"f_m_Hz", f.f_m},
                          {"f_o_Hz", f.f_o},
                          {"f_obj", f.f_obj}};
  };
  return {{"schema", "phonox.optimization/1"},
          {"design", design.to_json()},
          {"x0_m", x0},
          {"x_best_m", x_best},
          {"f_obj_initial", f_obj0},
          {"f_obj_best", f_obj_best},
          {"initial", figs(initial)},
          {"best", figs(best)},
          {"evaluations", evals},
          {"f_obj_units", "g in MHz (g/2pi)"}};
}

std::vector<std::string> default_design_parameters(const DeviceLayout& layout, bool omc_only) {
  std::vector<std::string> names;
  const auto has = [&](const std::string& role) {
    for (const auto& r : layout.regions)
      if (r.start.role == role || r.end.role == role) return true;
    return false;
  };
  if (has("omc_partial_mirror")) {
    names.push_back("omc_partial_mirror:a");
    names.push_back("omc_partial_mirror:hy");
  }
  if (!omc_only && has("emc_defect")) {
    names.push_back("emc_defect:a");
    names.push_back("emc_defect:hy");
  }
  if (names.empty()) throw ValidationError("layout '" + layout.name + "' has no partial-mirror or EMC-defect cells");
  return names;
}

OptimizationReport optimize_design(const DeviceLayout& layout, const DesignVector& design, const BandSource& bands,
                                   const ObjectiveSpec& spec, int budget) {
  spec.validate();
  design.validate();
  if (budget < 1) throw ValidationError("optimize_design: budget must be >= 1");
  const std::size_t n = design.params.size();

  const auto x0 = design.values;
  for (std::size_t i = 0; i < n; ++i)
    if (x0[i] < design.params[i].lo || x0[i] > design.params[i].hi)
      throw ValidationError("optimize_design: start value of " + design.params[i].name + " is outside its bounds");
  const DeviceLayout l0 = apply_design(layout, design, x0);
  if (const auto v = feature_violations(l0, spec.min_feature); !v.empty()) {
    std::string msg = "optimize_design: infeasible start:";
    for (const auto& s : v) msg += "\n  " + s;
    throw ValidationError(msg);
  }

  OptimizationReport rep;
  rep.design = design;
  rep.x0 = x0;

  const auto figures_at = [&](const DeviceLayout& l) {
    if (!spec.robust) return evaluate_layout(l, bands, spec);
    TransducerFigures nominal = evaluate_layout(l, bands, spec);
    double worst = nominal.f_obj;
    const double paired = robust_objective(
        [&](double s) { return s == 1.0 ? nominal.f_obj : evaluate_layout(scale_emc_period(l, s), bands, spec).f_obj; },
        spec.robust_scale);
    worst = std::min(worst, paired);
    nominal.f_obj = worst;
    return nominal;
  };
  rep.initial = figures_at(l0);
  rep.f_obj0 = rep.initial.f_obj;
  const double pscale = spec.penalty * std::max(std::abs(rep.f_obj0), 1e-30);

  int start = 0;
  const auto objective = [&](const std::vector<double>& x) {
    OptimizationTraceRow row;
    row.eval = static_cast<int>(rep.trace.size()) + 1;
    row.start = start;
    row.x = x;
    const auto xc = design.clamped(x);
    double pen = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (x[i] - xc[i]) / (design.params[i].hi - design.params[i].lo);
      if (d != 0.0) row.bounds_violated = true;
      pen += d * d;
    }
    const DeviceLayout l = apply_design(layout, design, xc);
    for (const auto& reg : l.regions)
      for (const UnitCell* c : {&reg.start, &reg.end})
        for (const auto& film : c->stack) {
          for (double val : {c->a - film.hx, 0.5 * (film.w - film.hy), film.hx, film.hy}) {
            // merged holes (val <= 0) cut the film and leave no feature to resolve
            if (val > 0.0 && val < spec.min_feature) {
              row.feature_violated = true;
              const double d = (spec.min_feature - val) / spec.min_feature;
              pen += d * d;
            }
          }
        }
    double value;
    try {
      const TransducerFigures f = figures_at(l);
      row.f_obj = f.f_obj;
      const auto window = [&](double v, double lo, double hi) {
        const double d = v < lo ? (lo - v) / (hi - lo) : v > hi ? (v - hi) / (hi - lo) : 0.0;
        if (d > 0.0) row.window_violated = true;
        return d * d;
      };
      pen += window(f.f_m, spec.f_m_lo, spec.f_m_hi) + window(f.f_o, spec.f_o_lo, spec.f_o_hi);
      value = -f.f_obj + pscale * pen;
    } catch (const std::exception&) {
      value = std::numeric_limits<double>::infinity();
      row.f_obj = std::numeric_limits<double>::quiet_NaN();
    }
    row.f = std::isfinite(value) ? value : 1e300;
    rep.trace.push_back(row);
    return value;
  };

  std::mt19937_64 rng(spec.seed);
  int remaining = budget;
  for (start = 0; start < spec.starts && remaining > 0; ++start) {
    const int share = remaining / (spec.starts - start);
    std::vector<double> xs = x0;
    if (start > 0)
      for (std::size_t i = 0; i < n; ++i)
        xs[i] = std::uniform_real_distribution<double>(design.params[i].lo, design.params[i].hi)(rng);
    NelderMeadOptions o;
    o.max_evals = std::max(share, 1);
    o.x_tol = 1e-4;
    o.f_tol = 1e-6;
    o.steps.resize(n);
    for (std::size_t i = 0; i < n; ++i) o.steps[i] = 0.05 * (design.params[i].hi - design.params[i].lo);
    try {
      nelder_mead(objective, xs, o);
    } catch (const ValidationError&) {
      if (start == 0) throw;  // x0 must evaluate; random starts may not
    }
    remaining = budget - static_cast<int>(rep.trace.size());
  }

  // best feasible evaluation; x0 (first row) always qualifies
  std::size_t bi = 0;
  for (std::size_t i = 1; i < rep.trace.size(); ++i) {
    const auto& r = rep.trace[i];
    if (r.bounds_violated || r.feature_violated || !std::isfinite(r.f_obj)) continue;
    if (r.f < rep.trace[bi].f) bi = i;
  }
  rep.x_best = design.clamped(rep.trace[bi].x);
  rep.layout = apply_design(layout, design, rep.x_best);
  rep.best = bi == 0 ? rep.initial : figures_at(rep.layout);
  rep.f_obj_best = rep.best.f_obj;
  rep.evals = static_cast<int>(rep.trace.size());
  rep.design.values = rep.x_best;
  return rep;
}

}  // namespace phonox
