// Acceptance suite: one line per criterion, "PASS" or "FAIL", with the
// measured numbers and the wall time. Exit status is 0 when every criterion
// passes, except those named with --expect-fail, which must fail.

#include "phonox/bands.hpp"
#include "phonox/constants.hpp"
#include "phonox/coupling.hpp"
#include "phonox/envelope.hpp"
#include "phonox/geometry.hpp"
#include "phonox/metrics.hpp"
#include "phonox/optimize.hpp"
#include "phonox/structures.hpp"
#include "phonox/studies.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace phonox;
using constants::pi;
using constants::two_pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  // A failure of this part cannot be covered by --expect-fail.
  bool hard_fail = false;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------------------

Outcome c1_saw_ratio() {
  const double k = two_pi / 1e-6;
  const auto si = saw_sweep(builtin_material("si"), 32, k);
  const auto sa = saw_sweep(builtin_material("sapphire"), 32, k);
  // depth check at the minimizing angles: the Si minimum is a bulk-type branch
  // that approaches its bulk limit slowly, so convergence is judged on the ratio
  // against the criterion tolerance
  SawOptions deep;
  deep.depth_wavelengths = 8.0;
  const double si_deep = saw_velocity(builtin_material("si"), si.alpha_min, k, deep);
  const double sa_deep = saw_velocity(builtin_material("sapphire"), sa.alpha_min, k, deep);
  const double ratio = sa.v_min / si.v_min, ratio_deep = sa_deep / si_deep;
  const double drift = std::abs(ratio_deep - ratio);
  Outcome o;
  o.pass = std::abs(ratio - 1.15) <= 0.05 && std::abs(ratio_deep - 1.15) <= 0.05 && drift <= 0.1 * 0.05;
  o.detail = fmt("v_min sapphire %.1f m/s, Si %.1f m/s, ratio %.4f (target 1.15 +- 0.05); at 8 wavelengths depth "
                 "ratio %.4f, drift %.4f (limit 0.005)",
                 sa.v_min, si.v_min, ratio, ratio_deep, drift);
  return o;
}

// Rayleigh root of (2 - x)^2 = 4 sqrt(1 - x) sqrt(1 - x r), x = (v/v_s)^2, r = (v_s/v_L)^2.
double rayleigh_ratio(double nu) {
  const double r = (1 - 2 * nu) / (2 * (1 - nu));
  const auto f = [&](double x) { return (2 - x) * (2 - x) - 4 * std::sqrt(1 - x) * std::sqrt(1 - x * r); };
  double lo = 1e-6, hi = 1 - 1e-15;  // f(lo) < 0 < f(hi)
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (f(m) < 0 ? lo : hi) = m;
  }
  return std::sqrt(0.5 * (lo + hi));
}

Outcome c2_rayleigh() {
  const double vs = 3000.0, vl = std::sqrt(3.0) * vs;  // Poisson ratio 0.25
  const auto iso = isotropic_material("iso", 2000.0, vl, vs);
  const double ratio = saw_velocity(iso, 0.0, two_pi / 1e-6) / vs;
  const double root = rayleigh_ratio(0.25);
  Outcome o;
  o.pass = rel(ratio, 0.9194) <= 0.01;
  o.detail = fmt("v/v_s = %.5f (target 0.9194 +- 1%%, Rayleigh root %.5f, rel err %.2e)", ratio, root,
                 rel(ratio, root));
  return o;
}

Outcome c3_kappa() {
  const auto q = microwave_quantities(0.3e-15, 70e-15, two_pi * 4.7e9, 1.7e-5);
  const double hz = q.kappa_ln / two_pi;
  return {rel(hz, 340.0) <= 0.02, fmt("kappa_mu,LN/2pi = %.2f Hz (target 340 Hz +- 2%%)", hz)};
}

Outcome c4_impedance() {
  const auto q = microwave_quantities(0.3e-15, 70e-15, two_pi * 4.7e9, 1.7e-5);
  return {rel(q.Z_mu, 478.0) <= 0.02, fmt("Z_mu = %.1f Ohm (target 478 Ohm +- 2%%)", q.Z_mu)};
}

Outcome c5_taper() {
  const double h = taper_hx(321e-9);
  const auto layout = device_preset("sOMC-transducer");
  const Region* taper = nullptr;
  for (const auto& r : layout.regions)
    if (r.profile == Profile::taper) taper = &r;
  if (taper == nullptr) return {false, "no taper region in sOMC-transducer", true};
  const auto chain = interpolate_taper(taper->start, taper->end, taper->count + 2);
  const bool exact_ends = chain.front() == taper->start && chain.back() == taper->end;
  // law evaluated at the neighbouring cells' h_y against their tabulated h_x
  double jump = 0.0;
  for (const UnitCell* c : {&taper->start, &taper->end})
    for (const auto& l : c->stack)
      if (l.material == "ln") jump = std::max(jump, std::abs(taper_hx(l.hy) - l.hx));
  Outcome o;
  o.pass = std::abs(h - 208e-9) <= 5e-9 && exact_ends && jump <= 5e-9;
  o.detail = fmt("taper_hx(321 nm) = %.1f nm (target 208 +- 5); endpoints %s; largest law-vs-neighbour gap %.1f nm",
                 h * 1e9, exact_ends ? "exact" : "NOT exact", jump * 1e9);
  return o;
}

Outcome c6_toy_cavity() {
  const double a = 400e-9;
  Outcome o{true, ""};
  for (int n : {8, 16}) {
    const auto modes = cavity_spectrum(uniform_chain(n, two_pi * 5e9, two_pi * 20e6));
    const double bin = pi / (n * a);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = fourier_mode(modes[static_cast<std::size_t>(i)], a);
      const double law = double(n - i) / n * pi / a;
      worst = std::max(worst, std::abs(k - law) / bin);
    }
    o.pass = o.pass && worst <= 1.0 + 1e-9;  // one bin, inclusive
    o.detail += fmt("N=%d worst |k_i - law| = %.3f bins; ", n, worst);
  }
  return o;
}

Outcome c7_zero_point() {
  const double g0 = two_pi * 1e6;
  Outcome o{true, ""};
  std::vector<double> lg, ln;
  for (int n : {4, 8, 16, 32}) {
    auto mech = uniform_chain(n, two_pi * 5e9, two_pi * 20e6, 0.0, true);
    mech.g_om_uc.assign(static_cast<std::size_t>(n), g0);
    auto opt = uniform_chain(n, two_pi * 195e12, two_pi * 1e12, 0.0, true);
    opt.chain = Chain::optical;
    const auto m = cavity_spectrum(mech).front();
    const auto p = cavity_spectrum(opt).front();
    const double g = mode_g_om(mech, m, p);
    const double err = rel(g, g0 / std::sqrt(double(n)));
    o.pass = o.pass && err <= 0.02;
    lg.push_back(std::log(g));
    ln.push_back(std::log(double(n)));
    o.detail += fmt("N=%d g sqrt(N)/g_uc = %.6f; ", n, g * std::sqrt(double(n)) / g0);
  }
  const double slope = (lg.back() - lg.front()) / (ln.back() - ln.front());
  o.detail += fmt("log-log slope %.4f", slope);
  return o;
}

Outcome c8_identity() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lg(-2.0, 2.0);
  const auto r = [&](double scale) { return scale * std::pow(10.0, lg(rng)); };
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    TransducerParams p;
    p.g_om = two_pi * r(0.4e6);
    p.g_em = two_pi * r(5e6);
    p.kappa_oi = two_pi * r(100e6);
    p.kappa_oe = two_pi * r(100e6);
    p.kappa_o = p.kappa_oi + p.kappa_oe;
    p.kappa_mu = two_pi * r(1e6);
    p.kappa_mue = p.kappa_mu * std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    p.gamma_m = two_pi * r(50e3);
    p.n_c = r(100.0);
    p.omega_o = two_pi * r(195e12);
    const auto m = compute_metrics(p);
    const double lhs = m.eta_ext * m.bandwidth * (1 + m.C_em + m.C_om) / (1 + m.C_em);
    const double rhs = 4 * constants::hbar * p.omega_o * m.photon_dissipation / m.energy_per_qubit;
    worst = std::max(worst, rel(lhs, rhs));
  }
  return {worst <= 1e-12, fmt("largest relative mismatch over 1000 sets: %.2e (limit 1e-12)", worst)};
}

Outcome c9_phase_matching() {
  const auto layout = device_preset("sOMC-transducer");
  UnitCell cell;
  for (const auto& r : layout.regions)
    if (r.start.role == "omc_defect") cell = r.start;
  const auto per_cell = [&](Propagation p) {
    UnitCellCouplingOptions uo;
    uo.propagation = p;
    const auto rep = unit_cell_coupling(cell, uo);
    return rep.g_om_mb->value + rep.g_om_pe->value;
  };
  const auto gc = per_cell(Propagation::counter), gco = per_cell(Propagation::co);
  const double a = cell.a, ko = pi / (2 * a), km = pi / a;
  Outcome o{true, fmt("per-cell |g| counter %.3f MHz, co %.3f MHz; ", std::abs(gc) / two_pi / 1e6,
                      std::abs(gco) / two_pi / 1e6)};
  for (int n : {8, 16, 32}) {
    const double counter = std::abs(cell_chain_sum(gc, n, a, ko, km, Propagation::counter));
    const double co = std::abs(cell_chain_sum(gco, n, a, ko, km, Propagation::co));
    o.pass = o.pass && co < 0.01 * counter;
    o.detail += fmt("N=%d co/counter %.1e; ", n, co / counter);
  }
  return o;
}

double slab_omega(double d, double k, double n1, double n0) {
  const auto f = [&](double w) {
    const double q = w / constants::c0;
    const double ka = std::sqrt(n1 * n1 * q * q - k * k), ga = std::sqrt(k * k - n0 * n0 * q * q);
    return ka * std::tan(0.5 * ka * d) - ga;
  };
  double lo = k * constants::c0 / n1 * (1 + 1e-12);
  double hi = std::min(k * constants::c0 / n0, std::hypot(pi / d, k) * constants::c0 / n1) * (1 - 1e-12);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (f(m) > 0 ? hi : lo) = m;
  }
  return 0.5 * (lo + hi);
}

ModeField displacement(const std::shared_ptr<Grid2D>& g, const std::function<Vec3(double, double)>& u) {
  ModeField m;
  m.grid = g;
  m.omega = two_pi * 5e9;
  m.u = Eigen::VectorXcd::Zero(3 * g->node_count());
  for (int j = 0; j < g->nodes(1); ++j)
    for (int i = 0; i < g->nodes(0); ++i) {
      const Vec3 v = u(g->coord(0, i), g->coord(1, j));
      for (int c = 0; c < 3; ++c) m.u(3 * g->node(i, j) + c) = v(c);
    }
  return m;
}

Outcome c10_perturbation() {
  // slab: moving-boundary integral vs derivative of the exact dispersion
  const double n1 = 3.48, n0 = 1.45, d = 220e-9, L = 1.2e-6, k = 2.8 * two_pi / 1.55e-6;
  auto g = line_grid(GridAxis::uniform(-L, L, 2400, Boundary::fixed, Boundary::fixed), 2, 1);
  const int core = g->add_material(isotropic_material("core", 2330, 8000, 5000, n1));
  const int clad = g->add_material(isotropic_material("clad", 2200, 6000, 4000, n0));
  g->paint([&](double z, double) { return std::abs(z) < 0.5 * d ? core : clad; });
  BlochSpec b;
  b.k_out = k;
  const auto opt = solve_modes(assemble_optical(g, b, 1), 1, two_pi * 194e12).at(0);
  const InterfaceSet faces{line_interface(0.5 * d, 1, n1 * n1, n0 * n0),
                           line_interface(-0.5 * d, -1, n1 * n1, n0 * n0)};
  const auto mech = displacement(g, [&](double z, double) { return Vec3(0.0, 0.0, z / (0.5 * d)); });
  const double mb = moving_boundary_shift(opt, mech, faces, Propagation::co).real();
  const double dd = 0.01e-9;
  const double exact = (slab_omega(d + 2 * dd, k, n1, n0) - slab_omega(d - 2 * dd, k, n1, n0)) / (2 * dd);
  const double e_mb = rel(mb, exact);

  // photoelastic: homogeneous medium under uniform strain S_yy with E along y
  const double n = 3.48, p = -0.09, S = 1e-6, Lx = 1e-6;
  auto gp = line_grid(GridAxis::uniform(0, Lx, 100, Boundary::periodic, Boundary::periodic), 0, 1);
  auto mat = isotropic_material("m", 2330, 8000, 5000, n);
  mat.photoelastic.setZero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) mat.photoelastic(i, j) = i == j ? p : 0.01;
  gp->add_material(mat);
  gp->paint([](double, double) { return 0; });
  BlochSpec bp;
  bp.k_in = {0.6 * pi / Lx, 0.0};
  const auto o2 = solve_modes(assemble_optical(gp, bp, 1), 1, two_pi * 100e12).at(0);
  const auto strain = displacement(gp, [&](double, double y) { return Vec3(0.0, S * y, 0.0); });
  const double pe = photoelastic_shift(o2, strain, Propagation::co).real();
  const double pe_exact = o2.omega.real() * n * n * p * S / 2;  // d(1/eps) = p S
  const double e_pe = rel(pe, pe_exact);
  return {e_mb <= 0.01 && e_pe <= 0.01,
          fmt("moving boundary %.5e vs analytic %.5e (rel %.1e); photoelastic %.5e vs %.5e (rel %.1e)", mb, exact,
              e_mb, pe, pe_exact, e_pe)};
}

Outcome c11_eigensolver() {
  Outcome o{true, ""};
  const std::vector<int> res{8, 16, 32, 64};
  for (const auto& problem : {rod_problem(), slab_problem()}) {
    const auto mc = mesh_convergence(problem, res);
    const double err = rel(mc.points.back().omega, *problem.exact);
    const bool ok = err <= 0.005 && std::abs(mc.order - 2.0) <= 0.3;
    o.pass = o.pass && ok;
    o.detail += fmt("%s: err %.1e, order %.3f; ", problem.name.c_str(), err, mc.order);
  }
  // plane waves in homogeneous periodic media
  const double Lp = 1e-6;
  auto g = line_grid(GridAxis::uniform(0.0, Lp, 64, Boundary::periodic, Boundary::periodic), 0, 1);
  const double vl = 8000.0, vs = 5000.0, n = 2.0;
  g->add_material(isotropic_material("iso", 2500, vl, vs, n));
  g->paint([](double, double) { return 0; });
  BlochSpec b;
  b.k_in = {0.5 * pi / Lp, 0.0};
  const double k = b.k_in[0];
  const auto el = solve_modes(assemble_elastic(g, b), 3, 0.0);
  const auto op = solve_modes(assemble_optical(g, b, 1), 1, 0.0);
  const double e_pw = std::max({rel(el[0].omega.real(), vs * k), rel(el[1].omega.real(), vs * k),
                                rel(el[2].omega.real(), vl * k), rel(op[0].omega.real(), constants::c0 * k / n)});
  o.pass = o.pass && e_pw <= 0.005;
  o.detail += fmt("plane waves: worst err %.1e; ", e_pw);

  // Hermitian problems (no PML) must give real spectra
  const auto layout = device_preset("sOMC-transducer");
  UnitCell cell;
  for (const auto& r : layout.regions)
    if (r.start.role == "omc_defect") cell = r.start;
  auto modes = cell_modes(cell, pi / cell.a, CellView::mechanical, 6);
  for (const auto& m : el) modes.push_back(m);
  for (const auto& m : op) modes.push_back(m);
  double worst_im = 0.0;
  for (const auto& m : modes) worst_im = std::max(worst_im, std::abs(m.omega.imag()) / std::abs(m.omega.real()));
  o.pass = o.pass && worst_im <= 1e-10;
  o.detail += fmt("max |Im w|/|Re w| over %zu Hermitian modes %.1e", modes.size(), worst_im);
  return o;
}

Outcome c12_anti_crossing() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0, worst_p = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double w1 = two_pi * 5e9 * (1 + 0.01 * u(rng)), w2 = two_pi * 5e9 * (1 + 0.01 * u(rng));
    const double g = two_pi * 10e6 * (1.0 + u(rng));
    Eigen::Matrix2d h;
    h << w1, g, g, w2;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
    const auto ac = anti_crossing(w1, w2, g);
    worst = std::max({worst, rel(ac.omega_minus, es.eigenvalues()(0)), rel(ac.omega_plus, es.eigenvalues()(1))});
    worst_p = std::max(worst_p, std::abs(ac.p1_plus - std::norm(es.eigenvectors()(0, 1))));
  }
  const double g = two_pi * 7e6;
  const auto at0 = anti_crossing(two_pi * 5e9, two_pi * 5e9, g);
  const double split = rel(at0.omega_plus - at0.omega_minus, 2 * g);
  return {worst <= 1e-14 && worst_p <= 1e-9 && split <= 1e-9,
          fmt("frequencies rel %.1e, participations abs %.1e over 1000 pairs; splitting at zero detuning / 2g - 1 = "
              "%.1e",
              worst, worst_p, split)};
}

Outcome c13_disorder() {
  const auto layout = device_preset("sOMC-transducer");
  const auto& bands = AnchorBandTable::default_table();
  DisorderOptions opts;  // sigma 0, 1, 2, 4 nm; 30 samples
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = disorder_study(layout, bands, opts);
  const double t_run = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto b = disorder_study(layout, bands, opts);
  const bool identical = a.run.payload() == b.run.payload();
  const auto trend = check_non_increasing(a.sigmas, a.g_om);
  Outcome o;
  o.detail = fmt("rerun %s; median g_om/2pi [MHz]:", identical ? "bit-identical" : "DIFFERS");
  for (std::size_t i = 0; i < a.sigmas.size(); ++i)
    o.detail += fmt(" %.0fnm %.3f [%.3f, %.3f]", a.sigmas[i] * 1e9, a.g_om[i].median / two_pi / 1e6,
                    a.g_om[i].ci_lo / two_pi / 1e6, a.g_om[i].ci_hi / two_pi / 1e6);
  o.detail += fmt("; trend %s; one study %.1f s", trend.non_increasing ? "non-increasing" : "INCREASING", t_run);
  o.hard_fail = !identical || t_run > 300.0;
  o.pass = identical && trend.non_increasing && t_run <= 300.0;
  return o;
}

Outcome c14_optimizer() {
  const auto rosen = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  NelderMeadOptions nm;
  nm.max_evals = 5000;
  const auto r = nelder_mead(rosen, {-1.2, 1.0}, nm);
  const double dist = std::max(std::abs(r.x[0] - 1.0), std::abs(r.x[1] - 1.0));
  bool monotone = !r.trace.empty();
  for (std::size_t i = 1; i < r.trace.size(); ++i) monotone = monotone && r.trace[i].best <= r.trace[i - 1].best;
  double running = std::numeric_limits<double>::infinity();
  for (const auto& t : r.trace) {
    running = std::min(running, t.f);
    monotone = monotone && t.best == running;
  }

  std::mt19937_64 rng(14);
  std::normal_distribution<double> nd(0.0, 1.0);
  bool pairwise = true;
  for (int i = 0; i < 1000; ++i) {
    const double v1 = nd(rng), v2 = nd(rng), s = 1.0 + 0.05 * std::abs(nd(rng));
    const double got = robust_objective([&](double x) { return x == 1.0 ? v1 : v2; }, s);
    pairwise = pairwise && got == std::min(v1, v2);
  }
  return {dist <= 1e-4 && pairwise && monotone,
          fmt("Rosenbrock max |x - 1| = %.1e after %d evals; robust_objective pairwise min %s; best-so-far trace %s",
              dist, r.evals, pairwise ? "exact" : "WRONG", monotone ? "monotone" : "NOT monotone")};
}

Outcome c15_pml() {
  bool zero = true;
  for (double A : {0.1, 1.0, 30.0})
    for (double rs : {1e-6, 2.25e-6, 7e-6}) {
      PMLProfile p;
      p.A = A;
      p.R_start = rs;
      p.R_sim = 2 * rs;
      zero = zero && pml_value(rs, p) == 0.0;
    }
  LeakySlab slab;
  auto A = log_space(1e-3, 30.0, 20);
  A.insert(A.begin(), 0.0);
  const auto sw = pml_sweep(slab, A, {slab.R_start() + 3e-6});
  const auto& pl = sw.plateaus.front();
  const double err = pl.found ? rel(pl.Q, sw.oracle_q) : 1.0;
  return {zero && pl.found && err <= 0.2,
          fmt("f_pml(R_start) = 0 %s; plateau A in [%.3g, %.3g], Q %.2f vs transfer-matrix %.2f (rel %.1e)",
              zero ? "exactly" : "VIOLATED", pl.A_lo, pl.A_hi, pl.Q, sw.oracle_q, err)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  CLI::App app{"acceptance criteria"};
  std::vector<int> expect_fail, only;
  app.add_option("--expect-fail", expect_fail, "criteria known not to pass");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> xf(expect_fail.begin(), expect_fail.end()), sel(only.begin(), only.end());

  const std::vector<Criterion> criteria{
      {1, "SAW velocity ratio sapphire/Si", 120, c1_saw_ratio},
      {2, "Rayleigh wave oracle", 60, c2_rayleigh},
      {3, "kappa_mu,LN", 1, c3_kappa},
      {4, "Z_mu", 1, c4_impedance},
      {5, "taper polynomial", 1, c5_taper},
      {6, "toy-cavity k-space law", 1, c6_toy_cavity},
      {7, "zero-point 1/sqrt(N) scaling", 1, c7_zero_point},
      {8, "efficiency-bandwidth identity", 1, c8_identity},
      {9, "phase-matching selectivity", 60, c9_phase_matching},
      {10, "boundary-perturbation oracles", 60, c10_perturbation},
      {11, "eigensolver oracles", 300, c11_eigensolver},
      {12, "anti-crossing", 1, c12_anti_crossing},
      {13, "disorder determinism and trend", 600, c13_disorder},
      {14, "optimizer", 60, c14_optimizer},
      {15, "PML plateau", 120, c15_pml},
  };

  int passed = 0, failed = 0, xfailed = 0, xpassed = 0;
  for (const auto& c : criteria) {
    if (!sel.empty() && !sel.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), true};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (t > c.budget_s) {
      o.pass = false;
      o.hard_fail = true;
      o.detail += fmt(" [over the %.0f s budget]", c.budget_s);
    }
    const bool expected = xf.count(c.id) > 0;
    const char* tag = o.pass ? "PASS" : "FAIL";
    if (o.pass && expected) {
      ++xpassed;
      tag = "PASS (expected to fail)";
    } else if (o.pass) {
      ++passed;
    } else if (expected && !o.hard_fail) {
      ++xfailed;
      tag = "FAIL (expected)";
    } else {
      ++failed;
    }
    std::printf("criterion %2d %-34s %s  %.2f s  %s\n", c.id, c.name, tag, t, o.detail.c_str());
  }
  std::printf("summary: %d passed, %d failed, %d expected failures, %d unexpected passes\n", passed, failed, xfailed,
              xpassed);
  return failed == 0 && xpassed == 0 ? 0 : 1;
}
