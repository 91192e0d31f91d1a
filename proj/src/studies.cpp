#include "phonox/studies.hpp"

#include "phonox/bands.hpp"
#include "phonox/constants.hpp"
#include "phonox/coupling.hpp"
#include "phonox/eigensolve.hpp"
#include "phonox/error.hpp"
#include "phonox/structures.hpp"
#include "phonox/version.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace phonox {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) { return format_number(v); }

double quantile_sorted(const std::vector<double>& s, double p) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i);
  if (i + 1 >= s.size()) return s.back();
  return s[i] + f * (s[i + 1] - s[i]);
}

json stats_json(const SampleStats& s) {
  return {{"n", s.n}, {"median", s.median}, {"q1", s.q1}, {"q3", s.q3}, {"ci_lo", s.ci_lo}, {"ci_hi", s.ci_hi}};
}

json stats_json_hz(const SampleStats& s) {
  SampleStats h = s;
  for (double* v : {&h.median, &h.q1, &h.q3, &h.ci_lo, &h.ci_hi}) *v = constants::hertz(*v);
  return stats_json(h);
}

CsvTable without_columns(const CsvTable& t, const std::vector<std::string>& drop) {
  std::vector<int> keep;
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    if (std::find(drop.begin(), drop.end(), t.columns[c]) == drop.end()) keep.push_back(static_cast<int>(c));
  CsvTable out;
  for (int c : keep) out.add_column(t.columns[static_cast<std::size_t>(c)], t.units[static_cast<std::size_t>(c)]);
  for (const auto& r : t.rows) {
    std::vector<std::string> row;
    for (int c : keep) row.push_back(r[static_cast<std::size_t>(c)]);
    out.add_row(std::move(row));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// StudyRun

std::string StudyRun::config_hash() const { return phonox::config_hash(config); }

json StudyRun::run_json() const {
  json j;
  j["kind"] = kind;
  j["config"] = config;
  j["summary"] = summary;
  j["metadata"] = {{"toolkit", "phonox"}, {"version", kVersion}, {"config_hash", config_hash()}};
  j["results"] = {{"file", "results.csv"}, {"rows", results.rows.size()}, {"columns", results.columns}};
  json plots_j = json::array();
  for (const auto& p : plots) plots_j.push_back("plots/" + p.file);
  j["plots"] = plots_j;
  j["timing"] = {{"wall_time_s", wall_time}, {"columns", timing_columns}};
  return j;
}

std::string StudyRun::payload() const {
  json j = run_json();
  j.erase("timing");
  return j.dump() + "\n" + to_csv_string(without_columns(results, timing_columns));
}

void StudyRun::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir / "plots");
  write_json(run_json(), dir / "run.json");
  write_csv(results, dir / "results.csv");
  for (const auto& p : plots) {
    bool any = false;
    for (const auto& s : p.data.series)
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) any = true;
    if (any) emit_plot(p.data, p.kind, dir / "plots" / p.file);
  }
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int t = std::min(resolve_threads(threads), std::max(1, n));
  if (t <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

SampleStats sample_stats(std::vector<double> v, int resamples, std::uint64_t seed) {
  SampleStats s;
  s.n = static_cast<int>(v.size());
  if (v.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.median = s.q1 = s.q3 = s.ci_lo = s.ci_hi = nan;
    return s;
  }
  std::sort(v.begin(), v.end());
  s.median = quantile_sorted(v, 0.5);
  s.q1 = quantile_sorted(v, 0.25);
  s.q3 = quantile_sorted(v, 0.75);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  std::vector<double> medians, draw(v.size());
  medians.reserve(static_cast<std::size_t>(std::max(0, resamples)));
  for (int b = 0; b < resamples; ++b) {
    for (auto& d : draw) d = v[pick(rng)];
    std::sort(draw.begin(), draw.end());
    medians.push_back(quantile_sorted(draw, 0.5));
  }
  std::sort(medians.begin(), medians.end());
  s.ci_lo = medians.empty() ? s.median : quantile_sorted(medians, 0.025);
  s.ci_hi = medians.empty() ? s.median : quantile_sorted(medians, 0.975);
  return s;
}

TrendCheck check_non_increasing(const std::vector<double>& x, const std::vector<SampleStats>& s) {
  TrendCheck t;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i].n == 0 || s[i + 1].n == 0) continue;
    if (s[i + 1].ci_lo > s[i].ci_hi) {
      t.non_increasing = false;
      std::ostringstream os;
      os << "median rises from x=" << (i < x.size() ? x[i] : 0.0) << " to x=" << (i + 1 < x.size() ? x[i + 1] : 0.0)
         << " beyond the bootstrap intervals (" << s[i + 1].ci_lo << " > " << s[i].ci_hi << ")";
      t.violations.push_back(os.str());
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Disorder

json DisorderOptions::to_json() const {
  return {{"sigmas_m", sigmas},       {"samples", samples},         {"seed", seed},
          {"g_em_min_Hz", constants::hertz(g_em_min)}, {"clamp_floor_m", clamp_floor},
          {"mech_modes", mech_modes}, {"bootstrap_resamples", resamples}, {"bootstrap_seed", bootstrap_seed}};
}

DisorderStudy disorder_study(const DeviceLayout& layout, const BandSource& bands, const DisorderOptions& opts) {
  if (opts.samples < 1) throw ValidationError("disorder_study: samples must be >= 1");
  if (opts.sigmas.empty()) throw ValidationError("disorder_study: empty sigma list");
  for (double s : opts.sigmas)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("disorder_study: sigma must be >= 0");
  layout.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto base = layout.cells();
  const int ns = static_cast<int>(opts.sigmas.size());
  const int total = ns * opts.samples;
  // The solver-backed source caches per cell and is not safe to share.
  const int threads = dynamic_cast<const SolverBandSource*>(&bands) != nullptr ? 1 : opts.threads;

  DisorderStudy st;
  st.sigmas = opts.sigmas;
  st.samples.resize(static_cast<std::size_t>(total));
  std::vector<double> times(static_cast<std::size_t>(total), 0.0);
  TransducerModeOptions mo;
  mo.mech_modes = opts.mech_modes;
  parallel_for(total, threads, [&](int idx) {
    const auto ts = std::chrono::steady_clock::now();
    DisorderSample& r = st.samples[static_cast<std::size_t>(idx)];
    r.sigma = opts.sigmas[static_cast<std::size_t>(idx / opts.samples)];
    r.sample = idx % opts.samples;
    r.seed = opts.seed + static_cast<std::uint64_t>(r.sample);
    try {
      DisorderSpec spec{r.sigma, r.seed, opts.clamp_floor};
      const auto cells = apply_disorder(base, spec);
      const TransducerModes tm = transducer_modes(cells, bands, mo);
      if (tm.best_g_om < 0) throw NumericalError("no mechanical mode");
      const auto b = static_cast<std::size_t>(tm.best_g_om);
      r.g_om = tm.g_om[b];
      r.g_em = tm.g_em[b];
      r.f_m = tm.mech_modes[b].frequency_hz();
      r.Q_m = tm.mech_modes[b].q();
      r.f_o = tm.optical.frequency_hz();
      r.Q_o = tm.optical.q();
      int fb = -1;
      for (std::size_t i = 0; i < tm.g_om.size(); ++i)
        if (tm.g_em[i] >= opts.g_em_min && (fb < 0 || tm.g_om[i] > tm.g_om[static_cast<std::size_t>(fb)]))
          fb = static_cast<int>(i);
      if (fb >= 0) {
        const auto f = static_cast<std::size_t>(fb);
        r.has_filtered = true;
        r.gf_om = tm.g_om[f];
        r.gf_em = tm.g_em[f];
        r.ff_m = tm.mech_modes[f].frequency_hz();
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    times[static_cast<std::size_t>(idx)] = seconds_since(ts);
  });

  for (int si = 0; si < ns; ++si) {
    std::vector<double> gom, gomf, gem;
    int rep = 0, skip = 0;
    for (int k = 0; k < opts.samples; ++k) {
      const auto& r = st.samples[static_cast<std::size_t>(si * opts.samples + k)];
      if (!r.ok) {
        ++skip;
        continue;
      }
      ++rep;
      gom.push_back(r.g_om);
      gem.push_back(r.g_em);
      if (r.has_filtered) gomf.push_back(r.gf_om);
    }
    st.reported.push_back(rep);
    st.skipped.push_back(skip);
    st.g_om.push_back(sample_stats(gom, opts.resamples, opts.bootstrap_seed));
    st.g_om_filtered.push_back(sample_stats(gomf, opts.resamples, opts.bootstrap_seed));
    st.g_em.push_back(sample_stats(gem, opts.resamples, opts.bootstrap_seed));
  }

  StudyRun& run = st.run;
  run.kind = "disorder";
  run.config = {{"layout", layout_to_json(layout)}, {"bands", bands.name()}, {"options", opts.to_json()}};
  CsvTable& t = run.results;
  t.add_column("sigma", "m");
  t.add_column("sample");
  t.add_column("seed");
  t.add_column("status");
  t.add_column("g_om", "Hz");
  t.add_column("g_em", "Hz");
  t.add_column("f_m", "Hz");
  t.add_column("Q_m");
  t.add_column("f_o", "Hz");
  t.add_column("Q_o");
  t.add_column("filtered_g_om", "Hz");
  t.add_column("filtered_g_em", "Hz");
  t.add_column("filtered_f_m", "Hz");
  t.add_column("wall_time", "s");
  run.timing_columns = {"wall_time"};
  const std::string nan = "nan";
  for (std::size_t i = 0; i < st.samples.size(); ++i) {
    const auto& r = st.samples[i];
    const bool f = r.ok && r.has_filtered;
    t.add_row({num(r.sigma), std::to_string(r.sample), std::to_string(r.seed), r.ok ? "ok" : "skipped",
               r.ok ? num(constants::hertz(r.g_om)) : nan, r.ok ? num(constants::hertz(r.g_em)) : nan,
               r.ok ? num(r.f_m) : nan, r.ok ? num(r.Q_m) : nan, r.ok ? num(r.f_o) : nan, r.ok ? num(r.Q_o) : nan,
               f ? num(constants::hertz(r.gf_om)) : nan, f ? num(constants::hertz(r.gf_em)) : nan,
               f ? num(r.ff_m) : nan, num(times[i])});
  }

  const TrendCheck trend = check_non_increasing(opts.sigmas, st.g_om);
  json per = json::array();
  for (int si = 0; si < ns; ++si) {
    const auto s = static_cast<std::size_t>(si);
    json errors = json::array();
    for (int k = 0; k < opts.samples; ++k) {
      const auto& r = st.samples[s * static_cast<std::size_t>(opts.samples) + static_cast<std::size_t>(k)];
      if (!r.ok) errors.push_back({{"sample", k}, {"error", r.error}});
    }
    per.push_back({{"sigma_m", opts.sigmas[s]},
                   {"reported", st.reported[s]},
                   {"skipped", st.skipped[s]},
                   {"g_om_Hz", stats_json_hz(st.g_om[s])},
                   {"g_om_filtered_Hz", stats_json_hz(st.g_om_filtered[s])},
                   {"g_em_Hz", stats_json_hz(st.g_em[s])},
                   {"errors", errors}});
  }
  run.summary = {{"per_sigma", per},
                 {"selection", "highest g_om; filtered dataset requires g_em >= g_em_min"},
                 {"statistics", "median, quartiles, bootstrap 95% interval of the median"},
                 {"trend_non_increasing", trend.non_increasing},
                 {"trend_violations", trend.violations},
                 {"clamp_rule", "hole axes clamped at clamp_floor_m (toolkit choice)"},
                 {"heuristic_loss", bands.heuristic_loss()}};

  PlotData scatter{"Selected-mode g_om under disorder", "sigma [nm]", "g_om/2pi [MHz]", {}};
  PlotSeries all{"all samples", {}, {}}, filt{"g_em/2pi >= threshold", {}, {}}, med{"median", {}, {}};
  for (const auto& r : st.samples) {
    if (!r.ok) continue;
    all.x.push_back(r.sigma / constants::nm);
    all.y.push_back(constants::hertz(r.g_om) / constants::MHz);
    if (r.has_filtered) {
      filt.x.push_back(r.sigma / constants::nm);
      filt.y.push_back(constants::hertz(r.gf_om) / constants::MHz);
    }
  }
  for (int si = 0; si < ns; ++si) {
    med.x.push_back(opts.sigmas[static_cast<std::size_t>(si)] / constants::nm);
    med.y.push_back(constants::hertz(st.g_om[static_cast<std::size_t>(si)].median) / constants::MHz);
  }
  scatter.series = {all, filt};
  run.plots.push_back({"g_om_scatter.svg", scatter, PlotKind::scatter});
  run.plots.push_back({"g_om_median.svg", PlotData{"Median selected-mode g_om", "sigma [nm]", "g_om/2pi [MHz]", {med}},
                       PlotKind::line});
  run.wall_time = seconds_since(t0);
  return st;
}

// ---------------------------------------------------------------------------
// PML

void LeakySlab::validate() const {
  if (!(n_core > 0.0) || !(n_clad > 0.0)) throw ValidationError("LeakySlab: indices must be positive");
  if (n_core == n_clad) throw ValidationError("LeakySlab: index contrast required");
  if (!(thickness > 0.0) || !(spacing > 0.0) || !(gap >= 0.0) || !(R_0 > 0.0))
    throw ValidationError("LeakySlab: thickness, spacing and R_0 must be positive, gap >= 0");
  if (order < 1) throw ValidationError("LeakySlab: order must be >= 1");
}

double LeakySlab::nominal_omega() const {
  return order * constants::pi * constants::c0 / (n_core * thickness);
}

json LeakySlab::to_json() const {
  return {{"n_core", n_core}, {"n_clad", n_clad}, {"thickness_m", thickness}, {"order", order},
          {"spacing_m", spacing}, {"gap_m", gap}, {"R_start_m", R_start()}, {"R_0_m", R_0}};
}

namespace {

// Incoming-wave amplitude on the left for a unit outgoing wave on the right.
std::complex<double> incoming_amplitude(const std::vector<std::pair<double, double>>& layers, double n_out,
                                        std::complex<double> omega) {
  using C = std::complex<double>;
  const C k0 = omega / constants::c0;
  const C q_out = n_out * k0;
  C E = 1.0, dE = C(0.0, 1.0) * q_out;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    const C q = it->first * k0;
    const double d = it->second;
    const C c = std::cos(q * d), s = std::sin(q * d);
    // Backward propagation over thickness d.
    const C E0 = c * E - s / q * dE;
    const C dE0 = q * s * E + c * dE;
    E = E0;
    dE = dE0;
  }
  return 0.5 * (E + dE / (C(0.0, 1.0) * q_out));
}

}  // namespace

std::complex<double> transfer_matrix_resonance(const std::vector<std::pair<double, double>>& layers, double n_out,
                                               std::complex<double> omega_guess) {
  if (layers.empty()) throw ValidationError("transfer_matrix_resonance: no layers");
  std::complex<double> w0 = omega_guess, w1 = omega_guess * std::complex<double>(1.0, -1e-3);
  std::complex<double> f0 = incoming_amplitude(layers, n_out, w0), f1 = incoming_amplitude(layers, n_out, w1);
  for (int it = 0; it < 200; ++it) {
    if (f1 == f0) break;
    const std::complex<double> w2 = w1 - f1 * (w1 - w0) / (f1 - f0);
    w0 = w1;
    f0 = f1;
    w1 = w2;
    f1 = incoming_amplitude(layers, n_out, w1);
    if (std::abs(w1 - w0) <= 1e-14 * std::abs(w1)) return w1;
  }
  if (std::abs(w1 - w0) <= 1e-10 * std::abs(w1)) return w1;
  throw NumericalError("transfer_matrix_resonance: secant iteration did not converge", std::abs(w1 - w0) / std::abs(w1));
}

double transfer_matrix_q(const LeakySlab& s) {
  s.validate();
  const auto w = transfer_matrix_resonance({{s.n_core, s.thickness}}, s.n_clad, s.nominal_omega());
  return radiative_q(w);
}

std::complex<double> leaky_slab_resonance(const LeakySlab& s, double A, double R_sim) {
  s.validate();
  if (!(R_sim > s.R_start())) throw ValidationError("leaky_slab_resonance: R_sim must exceed R_start");
  const int cells = static_cast<int>(std::lround(2.0 * R_sim / s.spacing));
  auto g = line_grid(GridAxis::uniform(-R_sim, R_sim, cells, Boundary::fixed, Boundary::fixed), 0, 1);
  const int core = g->add_material(isotropic_material("core", 1000.0, 1000.0, 500.0, s.n_core));
  const int clad = s.n_clad == 1.0 ? -1 : g->add_material(isotropic_material("clad", 1000.0, 1000.0, 500.0, s.n_clad));
  const double half = 0.5 * s.thickness;
  g->paint([&](double x, double) { return std::abs(x) < half ? core : clad; }, 4);
  PMLProfile p;
  p.A = A;
  p.R_start = s.R_start();
  p.R_0 = s.R_0;
  p.R_sim = R_sim;
  p.target = PmlTarget::optical;
  p.use_axis = {true, false};
  p.validate();
  const auto ops = assemble_optical(g, BlochSpec{}, 1, A > 0.0 ? &p : nullptr);
  const double w_nom = s.nominal_omega();
  const auto modes = solve_modes(ops, 6, w_nom);
  const ModeField* best = nullptr;
  for (const auto& m : modes)
    if (best == nullptr || std::abs(m.omega.real() - w_nom) < std::abs(best->omega.real() - w_nom)) best = &m;
  if (best == nullptr) throw NumericalError("leaky_slab_resonance: no mode");
  return best->omega;
}

std::vector<double> log_space(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw ValidationError("log_space: need 0 < lo <= hi and n >= 1");
  std::vector<double> v;
  for (int i = 0; i < n; ++i)
    v.push_back(n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1)));
  return v;
}

Plateau detect_plateau(const std::vector<double>& A, const std::vector<double>& Q, double factor) {
  if (A.size() != Q.size()) throw ValidationError("detect_plateau: A and Q lengths differ");
  if (!(factor > 1.0)) throw ValidationError("detect_plateau: factor must exceed 1");
  Plateau best;
  const int n = static_cast<int>(A.size());
  auto usable = [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    return A[k] > 0.0 && std::isfinite(Q[k]) && Q[k] > 0.0;
  };
  for (int i = 0; i < n; ++i) {
    if (!usable(i)) continue;
    double lo = Q[static_cast<std::size_t>(i)], hi = lo;
    int j = i;
    while (j + 1 < n && usable(j + 1)) {
      const double q = Q[static_cast<std::size_t>(j + 1)];
      if (std::max(hi, q) / std::min(lo, q) >= factor) break;
      lo = std::min(lo, q);
      hi = std::max(hi, q);
      ++j;
    }
    if (j > i && (!best.found || j - i > best.last - best.first)) {
      best.found = true;
      best.first = i;
      best.last = j;
    }
  }
  if (best.found) {
    std::vector<double> q(Q.begin() + best.first, Q.begin() + best.last + 1);
    std::sort(q.begin(), q.end());
    best.Q = quantile_sorted(q, 0.5);
    best.A_lo = A[static_cast<std::size_t>(best.first)];
    best.A_hi = A[static_cast<std::size_t>(best.last)];
  }
  return best;
}

PmlSweep pml_sweep(const LeakySlab& slab, const std::vector<double>& A, const std::vector<double>& R_sim,
                   int threads) {
  slab.validate();
  if (A.empty() || R_sim.empty()) throw ValidationError("pml_sweep: empty A or R_sim list");
  for (double a : A)
    if (!(a >= 0.0)) throw ValidationError("pml_sweep: A must be >= 0");
  for (double r : R_sim)
    if (!(r > slab.R_start())) throw ValidationError("pml_sweep: R_sim must exceed R_start");
  const auto t0 = std::chrono::steady_clock::now();
  PmlSweep sw;
  sw.A = A;
  sw.R_sim = R_sim;
  sw.oracle_q = transfer_matrix_q(slab);
  const std::size_t na = A.size(), nr = R_sim.size();
  sw.Q.assign(nr, std::vector<double>(na, 0.0));
  sw.f_hz.assign(nr, std::vector<double>(na, 0.0));
  std::vector<std::string> err(na * nr);
  std::vector<double> times(na * nr, 0.0);
  parallel_for(static_cast<int>(na * nr), threads, [&](int idx) {
    const auto ts = std::chrono::steady_clock::now();
    const auto ir = static_cast<std::size_t>(idx) / na, ia = static_cast<std::size_t>(idx) % na;
    try {
      const auto w = leaky_slab_resonance(slab, A[ia], R_sim[ir]);
      sw.Q[ir][ia] = radiative_q(w);
      sw.f_hz[ir][ia] = constants::hertz(w.real());
    } catch (const std::exception& e) {
      sw.Q[ir][ia] = std::numeric_limits<double>::quiet_NaN();
      sw.f_hz[ir][ia] = std::numeric_limits<double>::quiet_NaN();
      err[static_cast<std::size_t>(idx)] = e.what();
    }
    times[static_cast<std::size_t>(idx)] = seconds_since(ts);
  });
  for (std::size_t ir = 0; ir < nr; ++ir) sw.plateaus.push_back(detect_plateau(A, sw.Q[ir]));

  StudyRun& run = sw.run;
  run.kind = "pml";
  run.config = {{"problem", slab.to_json()}, {"A", A}, {"R_sim_m", R_sim}, {"plateau_factor", 2.0}};
  CsvTable& t = run.results;
  t.add_column("R_sim", "m");
  t.add_column("A");
  t.add_column("f", "Hz");
  t.add_column("Q");
  t.add_column("in_plateau");
  t.add_column("error");
  t.add_column("wall_time", "s");
  run.timing_columns = {"wall_time"};
  json plateaus = json::array();
  PlotData plot{"Radiative Q versus PML strength", "log10 A", "Q", {}};
  for (std::size_t ir = 0; ir < nr; ++ir) {
    const Plateau& p = sw.plateaus[ir];
    PlotSeries s{"R_sim = " + num(R_sim[ir] / constants::um) + " um", {}, {}};
    for (std::size_t ia = 0; ia < na; ++ia) {
      const bool in = p.found && static_cast<int>(ia) >= p.first && static_cast<int>(ia) <= p.last;
      t.add_row({num(R_sim[ir]), num(A[ia]), num(sw.f_hz[ir][ia]), num(sw.Q[ir][ia]), in ? "1" : "0",
                 err[ir * na + ia], num(times[ir * na + ia])});
      if (A[ia] > 0.0) {
        s.x.push_back(std::log10(A[ia]));
        s.y.push_back(sw.Q[ir][ia]);
      }
    }
    plot.series.push_back(s);
    json pj = {{"R_sim_m", R_sim[ir]}, {"found", p.found}};
    if (p.found) {
      pj["A_lo"] = p.A_lo;
      pj["A_hi"] = p.A_hi;
      pj["Q"] = p.Q;
      pj["relative_to_oracle"] = p.Q / sw.oracle_q - 1.0;
    }
    plateaus.push_back(pj);
  }
  PlotSeries oracle{"transfer-matrix Q", {}, {}};
  for (double a : A)
    if (a > 0.0) {
      oracle.x.push_back(std::log10(a));
      oracle.y.push_back(sw.oracle_q);
    }
  plot.series.push_back(oracle);
  run.plots.push_back({"q_vs_A.svg", plot, PlotKind::line});
  run.summary = {{"oracle_Q", sw.oracle_q},
                 {"nominal_f_Hz", constants::hertz(slab.nominal_omega())},
                 {"plateaus", plateaus},
                 {"mode_tracking", "nearest real frequency to the nominal resonance"},
                 {"A_zero", "no absorption: Q reported as inf"}};
  run.wall_time = seconds_since(t0);
  return sw;
}

// ---------------------------------------------------------------------------
// Mesh convergence

MeshProblem rod_problem(double length, double v_longitudinal, double density) {
  if (!(length > 0.0) || !(v_longitudinal > 0.0) || !(density > 0.0))
    throw ValidationError("rod_problem: length, velocity and density must be positive");
  MeshProblem p;
  p.name = "rod";
  const double exact = constants::pi * v_longitudinal / (2.0 * length);
  p.exact = exact;
  p.config = {{"problem", "rod"}, {"length_m", length}, {"v_longitudinal", v_longitudinal}, {"density", density},
              {"ends", "fixed-free"}};
  p.solve = [=](int n) {
    if (n < 2) throw ValidationError("rod_problem: resolution must be >= 2");
    const auto t0 = std::chrono::steady_clock::now();
    auto g = line_grid(GridAxis::uniform(0.0, length, n, Boundary::fixed, Boundary::free), 0, 1);
    const int id = g->add_material(isotropic_material("rod", density, v_longitudinal, 0.6 * v_longitudinal));
    g->paint([id](double, double) { return id; }, 1);
    const auto ops = assemble_elastic(g, BlochSpec{}, nullptr, false);
    const auto modes = solve_modes(ops, std::min(6, ops.dofs.size()), exact);
    const ModeField* best = nullptr;
    for (const auto& m : modes)
      if (component_fraction(m, 0) > 0.9 &&
          (best == nullptr || std::abs(m.omega.real() - exact) < std::abs(best->omega.real() - exact)))
        best = &m;
    if (best == nullptr) throw NumericalError("rod_problem: no longitudinal mode found");
    MeshPoint pt;
    pt.resolution = n;
    pt.h = length / n;
    pt.omega = best->omega.real();
    pt.wall_time = seconds_since(t0);
    return pt;
  };
  return p;
}

namespace {

// Fundamental TE mode of a symmetric slab: omega at fixed k by bisection.
double slab_te_omega(double d, double n1, double n2, double k) {
  auto f = [&](double w) {
    const double k1 = w / constants::c0;
    const double kx = std::sqrt(std::max(0.0, n1 * n1 * k1 * k1 - k * k));
    const double gm = std::sqrt(std::max(0.0, k * k - n2 * n2 * k1 * k1));
    return kx * std::tan(0.5 * kx * d) - gm;
  };
  double lo = k * constants::c0 / n1 * (1.0 + 1e-12), hi = k * constants::c0 / n2 * (1.0 - 1e-12);
  // Keep the first branch of tan.
  const double w_branch = std::sqrt((constants::pi / d) * (constants::pi / d) + k * k) * constants::c0 / n1;
  hi = std::min(hi, w_branch * (1.0 - 1e-12));
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

MeshProblem slab_problem(double thickness, double n_core, double n_clad, double k) {
  if (!(thickness > 0.0) || !(n_core > n_clad) || !(n_clad >= 1.0) || !(k > 0.0))
    throw ValidationError("slab_problem: need thickness > 0, n_core > n_clad >= 1, k > 0");
  MeshProblem p;
  p.name = "slab";
  p.exact = slab_te_omega(thickness, n_core, n_clad, k);
  p.config = {{"problem", "slab"}, {"thickness_m", thickness}, {"n_core", n_core}, {"n_clad", n_clad},
              {"k_per_m", k}, {"polarization", "TE"}};
  p.solve = [=](int n) {
    if (n < 2) throw ValidationError("slab_problem: resolution must be >= 2");
    const auto t0 = std::chrono::steady_clock::now();
    const double h = thickness / n;
    const int clad_cells = static_cast<int>(std::ceil(1.5e-6 / h));
    const double half = 0.5 * thickness + clad_cells * h;
    auto g = line_grid(GridAxis::uniform(-half, half, n + 2 * clad_cells, Boundary::fixed, Boundary::fixed), 0, 1);
    const int core = g->add_material(isotropic_material("core", 1000.0, 1000.0, 500.0, n_core));
    const int clad = g->add_material(isotropic_material("clad", 1000.0, 1000.0, 500.0, n_clad));
    g->paint([&](double x, double) { return std::abs(x) < 0.5 * thickness ? core : clad; }, 4);
    BlochSpec b;
    b.k_out = k;
    const auto ops = assemble_optical(g, b, 1);
    const auto modes = solve_modes(ops, 1, 0.0, SolveOptions{1e-10, 8, 0.0});
    const double e1 = n_core * n_core, e2 = n_clad * n_clad;
    const InterfaceSet ifs{line_interface(0.5 * thickness, 1, e1, e2), line_interface(-0.5 * thickness, -1, e1, e2)};
    MeshPoint pt;
    pt.resolution = n;
    pt.h = h;
    pt.omega = modes.front().omega.real();
    pt.coupling = boundary_shift_rate(modes.front(), ifs);
    pt.wall_time = seconds_since(t0);
    return pt;
  };
  return p;
}

MeshConvergence mesh_convergence(const MeshProblem& problem, const std::vector<int>& resolutions) {
  if (resolutions.size() < 3) throw ValidationError("mesh_convergence: need at least three resolutions");
  std::vector<int> res = resolutions;
  std::sort(res.begin(), res.end());
  if (std::adjacent_find(res.begin(), res.end()) != res.end())
    throw ValidationError("mesh_convergence: resolutions must be distinct");
  const auto t0 = std::chrono::steady_clock::now();
  MeshConvergence mc;
  for (int r : res) mc.points.push_back(problem.solve(r));
  const std::size_t n = mc.points.size();
  // Finest three: 1 finest, 3 coarsest.
  const MeshPoint &p1 = mc.points[n - 1], &p2 = mc.points[n - 2], &p3 = mc.points[n - 3];
  const double r21 = p2.h / p1.h, r32 = p3.h / p2.h;
  const double e21 = p2.omega - p1.omega, e32 = p3.omega - p2.omega;
  double order = std::numeric_limits<double>::quiet_NaN();
  if (e21 != 0.0 && e32 != 0.0) {
    const double s = (e32 / e21) > 0.0 ? 1.0 : -1.0;
    double p = std::abs(std::log(std::abs(e32 / e21))) / std::log(r21);
    for (int it = 0; it < 100; ++it) {
      const double q = std::log((std::pow(r21, p) - s) / (std::pow(r32, p) - s));
      const double pn = std::abs(std::log(std::abs(e32 / e21)) + q) / std::log(r21);
      if (!std::isfinite(pn)) break;
      if (std::abs(pn - p) < 1e-12) {
        p = pn;
        break;
      }
      p = pn;
    }
    order = p;
  }
  mc.order = order;
  const double rp = std::pow(r21, order);
  mc.limit = std::isfinite(order) ? (rp * p1.omega - p2.omega) / (rp - 1.0) : p1.omega;
  mc.cauchy = true;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (!(std::abs(mc.points[i + 1].omega - mc.points[i].omega) < std::abs(mc.points[i].omega - mc.points[i - 1].omega)))
      mc.cauchy = false;
  if (p1.coupling && p2.coupling && *p1.coupling != 0.0)
    mc.coupling_variation = std::abs(*p1.coupling - *p2.coupling) / std::abs(*p1.coupling);

  StudyRun& run = mc.run;
  run.kind = "mesh";
  run.config = {{"problem", problem.config}, {"resolutions", res}};
  CsvTable& t = run.results;
  t.add_column("resolution");
  t.add_column("h", "m");
  t.add_column("f", "Hz");
  t.add_column("coupling", "Hz/m");
  t.add_column("relative_error");
  t.add_column("wall_time", "s");
  run.timing_columns = {"wall_time"};
  PlotData plot{"Frequency versus mesh spacing", "h [nm]", "f [Hz]", {}};
  PlotSeries s{problem.name, {}, {}};
  for (const auto& p : mc.points) {
    const double rel = problem.exact ? p.omega / *problem.exact - 1.0 : std::numeric_limits<double>::quiet_NaN();
    t.add_row({std::to_string(p.resolution), num(p.h), num(constants::hertz(p.omega)),
               p.coupling ? num(constants::hertz(*p.coupling)) : "nan", num(rel), num(p.wall_time)});
    s.x.push_back(p.h / constants::nm);
    s.y.push_back(constants::hertz(p.omega));
  }
  plot.series.push_back(s);
  run.plots.push_back({"convergence.svg", plot, PlotKind::line});
  json sum = {{"order", mc.order},
              {"richardson_limit_Hz", constants::hertz(mc.limit)},
              {"cauchy_decreasing", mc.cauchy}};
  if (problem.exact) sum["exact_Hz"] = constants::hertz(*problem.exact);
  if (mc.coupling_variation) sum["coupling_variation_finest"] = *mc.coupling_variation;
  run.summary = sum;
  run.wall_time = seconds_since(t0);
  return mc;
}

// ---------------------------------------------------------------------------
// Tuning map

TuningMap tuning_map(const UnitCell& base, const std::vector<double>& hx, const std::vector<double>& hy,
                     const std::vector<double>& a, const TuningOptions& opts) {
  if (hx.empty() || hy.empty() || a.empty()) throw ValidationError("tuning_map: empty grid axis");
  base.validate();
  const auto t0 = std::chrono::steady_clock::now();
  TuningMap tm;
  tm.a = a;
  tm.hx = hx;
  tm.hy = hy;
  const std::size_t n = a.size() * hx.size() * hy.size();
  tm.points.resize(n);
  std::vector<double> times(n, 0.0);
  parallel_for(static_cast<int>(n), opts.threads, [&](int idx) {
    const auto ts = std::chrono::steady_clock::now();
    const auto i = static_cast<std::size_t>(idx);
    const std::size_t iy = i % hy.size(), ix = (i / hy.size()) % hx.size(), ia = i / (hy.size() * hx.size());
    TuningPoint& p = tm.points[i];
    p.a = a[ia];
    p.hx = hx[ix];
    p.hy = hy[iy];
    try {
      UnitCell c = base;
      c.a = p.a;
      c.set_ellipse(p.hx, p.hy);
      c.validate();
      UnitCellCouplingOptions uo;
      uo.spacing = opts.spacing;
      uo.mech_target_hz = opts.mech_target_hz;
      uo.propagation = Propagation::counter;
      const CouplingReport r = unit_cell_coupling(c, uo);
      p.f_m = r.f_m_hz.value_or(0.0);
      p.g_om = r.g_om_total().value_or(0.0);
      BandOptions bo;
      bo.spacing = opts.spacing;
      bo.optical_extent = true;
      p.f_o = cell_modes(c, constants::pi / c.a, CellView::optical, 1, bo).front().frequency_hz();
      p.ok = true;
    } catch (const std::exception& e) {
      p.ok = false;
      p.error = e.what();
    }
    times[i] = seconds_since(ts);
  });

  StudyRun& run = tm.run;
  run.kind = "tuning";
  run.config = {{"cell", cell_to_json(base)}, {"a_m", a}, {"hx_m", hx}, {"hy_m", hy},
                {"spacing_m", opts.spacing}, {"mech_target_Hz", opts.mech_target_hz},
                {"phase_matching", "counter-propagating, k_m = 2 k_o = pi/a"}};
  CsvTable& t = run.results;
  for (const char* c : {"a", "hx", "hy"}) t.add_column(c, "m");
  t.add_column("status");
  t.add_column("f_m", "Hz");
  t.add_column("f_o", "Hz");
  t.add_column("g_om", "Hz");
  t.add_column("error");
  t.add_column("wall_time", "s");
  run.timing_columns = {"wall_time"};
  int failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = tm.points[i];
    if (!p.ok) ++failed;
    t.add_row({num(p.a), num(p.hx), num(p.hy), p.ok ? "ok" : "failed", p.ok ? num(p.f_m) : "nan",
               p.ok ? num(p.f_o) : "nan", p.ok ? num(constants::hertz(p.g_om)) : "nan", p.error, num(times[i])});
  }
  PlotData fm{"Mechanical X-point frequency", "h_y [nm]", "f_m [GHz]", {}};
  PlotData go{"Unit-cell g_om", "h_y [nm]", "g_om/2pi [MHz]", {}};
  const std::size_t ia0 = a.size() / 2;
  for (std::size_t ix = 0; ix < hx.size(); ++ix) {
    PlotSeries s1{"h_x = " + num(hx[ix] / constants::nm) + " nm", {}, {}}, s2 = s1;
    for (std::size_t iy = 0; iy < hy.size(); ++iy) {
      const auto& p = tm.at(ia0, ix, iy);
      if (!p.ok) continue;
      s1.x.push_back(p.hy / constants::nm);
      s1.y.push_back(p.f_m / constants::GHz);
      s2.x.push_back(p.hy / constants::nm);
      s2.y.push_back(constants::hertz(p.g_om) / constants::MHz);
    }
    fm.series.push_back(s1);
    go.series.push_back(s2);
  }
  run.plots.push_back({"f_m.svg", fm, PlotKind::line});
  run.plots.push_back({"g_om.svg", go, PlotKind::line});
  run.summary = {{"points", n}, {"failed", failed}, {"plotted_a_m", a[ia0]}};
  run.wall_time = seconds_since(t0);
  return tm;
}

// ---------------------------------------------------------------------------
// Oxide interlayer

OxideSweep oxide_sweep(const std::vector<double>& thickness, const OxideOptions& opts) {
  if (thickness.empty()) throw ValidationError("oxide_sweep: empty thickness list");
  for (double d : thickness)
    if (!(d >= 0.0)) throw ValidationError("oxide_sweep: thickness must be >= 0");
  if (!(opts.film_thickness > 0.0) || !(opts.k_optical > 0.0))
    throw ValidationError("oxide_sweep: film thickness and k_optical must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const double k_m = opts.k_mechanical > 0.0 ? opts.k_mechanical : 2.0 * opts.k_optical;
  const MaterialRecord film = film_material(opts.film), inter = film_material(opts.interlayer),
                       sub = film_material(opts.substrate);
  const double e_film = film.permittivity_optical(1, 1), e_inter = inter.permittivity_optical(1, 1),
               e_sub = sub.permittivity_optical(1, 1);
  OxideSweep sw;
  std::vector<double> times;
  for (double d : thickness) {
    const auto ts = std::chrono::steady_clock::now();
    StackGridOptions so;
    so.spacing = opts.spacing;
    so.air_above = opts.air_above;
    auto g = stack_grid({{opts.interlayer, d}, {opts.film, opts.film_thickness}}, sub, opts.substrate_depth, so);
    BlochSpec bo;
    bo.k_out = opts.k_optical;
    const auto opt = solve_modes(assemble_optical(g, bo, 1), 1, 0.0, SolveOptions{1e-10, 8, 0.0}).front();
    BlochSpec bm;
    bm.k_out = k_m;
    const auto mech_modes = solve_modes(assemble_elastic(g, bm, nullptr, true), 4, 0.0, SolveOptions{1e-10, 8, 0.0});
    // Lowest mode with a sagittal (x, z) polarization; shear-horizontal
    // modes do not move horizontal interfaces.
    const ModeField* mech = &mech_modes.front();
    for (const auto& m : mech_modes)
      if (component_fraction(m, 1) < 0.5) {
        mech = &m;
        break;
      }
    InterfaceSet ifs;
    const double top = d + opts.film_thickness;
    ifs.push_back(line_interface(top, 1, e_film, 1.0));
    if (d > 0.0) {
      ifs.push_back(line_interface(d, -1, e_film, e_inter));
      ifs.push_back(line_interface(0.0, -1, e_inter, e_sub));
    } else {
      ifs.push_back(line_interface(0.0, -1, e_film, e_sub));
    }
    OxidePoint p;
    p.thickness = d;
    p.f_o = opt.frequency_hz();
    p.f_m = mech->frequency_hz();
    p.g_mb = g_om_moving_boundary(opt, *mech, ifs, Propagation::counter).magnitude();
    p.g_pe = g_om_photoelastic(opt, *mech, Propagation::counter).magnitude();
    sw.points.push_back(p);
    times.push_back(seconds_since(ts));
  }
  StudyRun& run = sw.run;
  run.kind = "oxide";
  run.config = {{"film", opts.film},
                {"film_thickness_m", opts.film_thickness},
                {"interlayer", opts.interlayer},
                {"substrate", opts.substrate},
                {"thickness_m", thickness},
                {"k_optical_per_m", opts.k_optical},
                {"k_mechanical_per_m", k_m},
                {"spacing_m", opts.spacing},
                {"substrate_depth_m", opts.substrate_depth},
                {"air_above_m", opts.air_above}};
  CsvTable& t = run.results;
  t.add_column("thickness", "m");
  t.add_column("f_o", "Hz");
  t.add_column("f_m", "Hz");
  t.add_column("g_om_mb", "Hz");
  t.add_column("g_om_pe", "Hz");
  t.add_column("wall_time", "s");
  run.timing_columns = {"wall_time"};
  PlotData po{"Optical frequency versus interlayer thickness", "thickness [nm]", "f_o [THz]", {}};
  PlotData pm{"Mechanical frequency versus interlayer thickness", "thickness [nm]", "f_m [GHz]", {}};
  PlotSeries so{"f_o", {}, {}}, sm{"f_m", {}, {}};
  for (std::size_t i = 0; i < sw.points.size(); ++i) {
    const auto& p = sw.points[i];
    t.add_row({num(p.thickness), num(p.f_o), num(p.f_m), num(constants::hertz(p.g_mb)),
               num(constants::hertz(p.g_pe)), num(times[i])});
    so.x.push_back(p.thickness / constants::nm);
    so.y.push_back(p.f_o / constants::THz);
    sm.x.push_back(p.thickness / constants::nm);
    sm.y.push_back(p.f_m / constants::GHz);
  }
  po.series.push_back(so);
  pm.series.push_back(sm);
  run.plots.push_back({"f_o.svg", po, PlotKind::line});
  run.plots.push_back({"f_m.svg", pm, PlotKind::line});
  json sum = {{"model", "laterally invariant film stack; rates per unit lateral width"}};
  if (sw.points.size() >= 2)
    sum["f_o_shift_Hz"] = sw.points.back().f_o - sw.points.front().f_o;
  run.summary = sum;
  run.wall_time = seconds_since(t0);
  return sw;
}

// ---------------------------------------------------------------------------
// EMC period sweep

StudyRun emc_period_study(const DeviceLayout& layout, const std::vector<double>& scales, const BandSource& bands,
                          const EmcSweepOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const EmcSweep sw = emc_period_sweep(layout, scales, bands, opts);
  StudyRun run;
  run.kind = "emc-period";
  run.config = {{"layout", layout_to_json(layout)}, {"scales", scales}, {"bands", bands.name()},
                {"modes", opts.modes}, {"cut_tag", opts.cut_tag}};
  std::set<std::string> tags;
  for (const auto& r : sw.rows)
    for (const auto& [k, v] : r.participations) tags.insert(k);
  CsvTable& t = run.results;
  t.add_column("scale");
  t.add_column("mode");
  t.add_column("f", "Hz");
  t.add_column("Q");
  t.add_column("g_om", "Hz");
  t.add_column("g_em", "Hz");
  t.add_column("hybrid");
  for (const auto& tag : tags) t.add_column("p_" + tag);
  std::vector<int> hybrid_rows(sw.hybrid_row.begin(), sw.hybrid_row.end());
  PlotData plot{"Mode frequencies versus EMC period scale", "scale", "f [GHz]", {}};
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < sw.rows.size(); ++i) {
    const auto& r = sw.rows[i];
    const bool hyb = std::find(hybrid_rows.begin(), hybrid_rows.end(), static_cast<int>(i)) != hybrid_rows.end();
    std::vector<std::string> row{num(r.scale),
                                 std::to_string(r.mode),
                                 num(constants::hertz(r.omega.real())),
                                 num(radiative_q(r.omega)),
                                 num(constants::hertz(r.g_om)),
                                 num(constants::hertz(r.g_em)),
                                 hyb ? "1" : "0"};
    for (const auto& tag : tags) {
      const auto it = r.participations.find(tag);
      row.push_back(num(it == r.participations.end() ? 0.0 : it->second));
    }
    t.add_row(std::move(row));
    if (static_cast<std::size_t>(r.mode) >= series.size())
      series.resize(static_cast<std::size_t>(r.mode) + 1);
    auto& s = series[static_cast<std::size_t>(r.mode)];
    s.name = "mode " + std::to_string(r.mode);
    s.x.push_back(r.scale);
    s.y.push_back(constants::hertz(r.omega.real()) / constants::GHz);
  }
  plot.series = series;
  run.plots.push_back({"frequencies.svg", plot, PlotKind::bands});
  run.summary = {{"crossing_scale", sw.crossing_scale},
                 {"half_width", sw.half_width},
                 {"heuristic_loss", sw.heuristic_loss}};
  run.wall_time = seconds_since(t0);
  return run;
}

}  // namespace phonox
