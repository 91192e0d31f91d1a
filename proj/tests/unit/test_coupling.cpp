#include "phonox/constants.hpp"
#include "phonox/coupling.hpp"
#include "phonox/error.hpp"
#include "phonox/structures.hpp"

#include <doctest.h>

#include <cmath>

using namespace phonox;

namespace {

// Fundamental TE mode of a symmetric slab by bisection on the dispersion relation.
double slab_omega(double d, double k, double n1, double n0) {
  const auto f = [&](double w) {
    const double q = w / constants::c0;
    const double ka = std::sqrt(n1 * n1 * q * q - k * k), ga = std::sqrt(k * k - n0 * n0 * q * q);
    return ka * std::tan(0.5 * ka * d) - ga;
  };
  double lo = k * constants::c0 / n1 * (1 + 1e-12);
  double hi = std::min(k * constants::c0 / n0, std::hypot(constants::pi / d, k) * constants::c0 / n1) * (1 - 1e-12);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (f(m) > 0 ? hi : lo) = m;
  }
  return 0.5 * (lo + hi);
}

ModeField displacement(const std::shared_ptr<Grid2D>& g, const std::function<Vec3(double, double)>& u) {
  ModeField m;
  m.physics = Physics::elastic;
  m.grid = g;
  m.ncomp = 3;
  m.omega = 2.0 * constants::pi * 5e9;
  m.u = Eigen::VectorXcd::Zero(3 * g->node_count());
  for (int j = 0; j < g->nodes(1); ++j)
    for (int i = 0; i < g->nodes(0); ++i) {
      const Vec3 v = u(g->coord(0, i), g->coord(1, j));
      for (int c = 0; c < 3; ++c) m.u(3 * g->node(i, j) + c) = v(c);
    }
  return m;
}

}  // namespace

TEST_CASE("slab boundary shift against the analytic derivative") {
  const double n1 = 3.48, n0 = 1.45, d = 220e-9, L = 1.2e-6;
  const double k = 2.8 * 2.0 * constants::pi / 1.55e-6;
  auto g = line_grid(GridAxis::uniform(-L, L, 1200, Boundary::fixed, Boundary::fixed), 2, 1);
  const int core = g->add_material(isotropic_material("core", 2330, 8000, 5000, n1));
  const int clad = g->add_material(isotropic_material("clad", 2200, 6000, 4000, n0));
  g->paint([&](double z, double) { return std::abs(z) < 0.5 * d ? core : clad; });
  BlochSpec b;
  b.k_out = k;
  const auto opt = solve_modes(assemble_optical(g, b, 1), 1, 2.0 * constants::pi * 194e12).at(0);
  CHECK(opt.omega.real() == doctest::Approx(slab_omega(d, k, n1, n0)).epsilon(1e-4));

  const InterfaceSet faces{line_interface(0.5 * d, 1, n1 * n1, n0 * n0), line_interface(-0.5 * d, -1, n1 * n1, n0 * n0)};
  const double dd = 0.01e-9;
  const double exact = (slab_omega(d + 2 * dd, k, n1, n0) - slab_omega(d - 2 * dd, k, n1, n0)) / (2 * dd);
  CHECK(boundary_shift_rate(opt, faces) == doctest::Approx(exact).epsilon(0.01));

  // uniform expansion of both faces by one unit
  const auto mech = displacement(g, [&](double z, double) { return Vec3(0.0, 0.0, z / (0.5 * d)); });
  CHECK(moving_boundary_shift(opt, mech, faces, Propagation::co).real() == doctest::Approx(exact).epsilon(0.01));
  CHECK_THROWS_AS(moving_boundary_shift(opt, mech, {}, Propagation::co), ValidationError);
}

TEST_CASE("photoelastic shift under uniform strain") {
  const double n = 3.48, p = -0.09, S = 1e-6, L = 1e-6;
  auto g = line_grid(GridAxis::uniform(0, L, 100, Boundary::periodic, Boundary::periodic), 0, 1);
  auto mat = isotropic_material("m", 2330, 8000, 5000, n);
  mat.photoelastic.setZero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) mat.photoelastic(i, j) = i == j ? p : 0.01;
  g->add_material(mat);
  g->paint([](double, double) { return 0; });
  BlochSpec b;
  b.k_in = {0.6 * constants::pi / L, 0.0};
  const auto opt = solve_modes(assemble_optical(g, b, 1), 1, 2.0 * constants::pi * 100e12).at(0);
  const auto mech = displacement(g, [&](double, double y) { return Vec3(0.0, S * y, 0.0); });
  // E along y: d(1/eps)_yy = p S, so d omega = omega n^2 p S / 2
  const auto shift = photoelastic_shift(opt, mech, Propagation::co);
  CHECK(shift.real() == doctest::Approx(opt.omega.real() * n * n * p * S / 2).epsilon(1e-6));
}

TEST_CASE("cell chain sums") {
  const double a = 400e-9, ko = constants::pi / (2 * a), km = constants::pi / a;
  const std::complex<double> per(1.5, -0.5);
  for (int n : {8, 9, 16}) {
    const auto counter = cell_chain_sum(per, n, a, ko, km, Propagation::counter);
    CHECK(std::abs(counter - per * double(n)) < 1e-12 * std::abs(per) * n);
    std::complex<double> co_exact = 0.0;
    for (int i = 0; i < n; ++i) co_exact += per * std::polar(1.0, -km * i * a);
    CHECK(std::abs(cell_chain_sum(per, n, a, ko, km, Propagation::co) - co_exact) < 1e-12 * n);
  }
}

TEST_CASE("microwave quantities") {
  const double ci = 0.3e-15, cm = 70e-15, w = 2.0 * constants::pi * 4.7e9, tand = 1.7e-5;
  const auto q = microwave_quantities(ci, cm, w, tand);
  CHECK(q.Z_mu == doctest::Approx(1.0 / (w * (ci + cm))));
  CHECK(q.kappa_ln == doctest::Approx(w * tand * ci / (ci + cm)));
  CHECK_THROWS_AS(microwave_quantities(ci, cm, w, -1.0), ValidationError);
}

TEST_CASE("zero-point scale") {
  auto g = line_grid(GridAxis::uniform(0, 1e-6, 10, Boundary::periodic, Boundary::periodic), 0, 1);
  const double rho = 2000.0;
  g->add_material(isotropic_material("m", rho, 8000, 5000));
  g->paint([](double, double) { return 0; });
  const auto m = displacement(g, [](double, double) { return Vec3(1.0, 0.0, 0.0); });
  // int rho |u|^2 = rho * length * unit lateral area
  CHECK(zero_point_scale(m) == doctest::Approx(std::sqrt(constants::hbar / (2.0 * m.omega.real() * rho * 1e-6))));
}

TEST_CASE("coupling report total and phase") {
  CouplingReport r;
  r.g_om_mb = Rate{{3.0, 0.0}};
  r.g_om_pe = Rate{{0.0, 4.0}};
  CHECK(*r.g_om_total() == doctest::Approx(5.0));
  CHECK(*r.relative_phase() == doctest::Approx(constants::pi / 2));
  CHECK(r.to_json().contains("g_om_total_over_2pi_Hz"));
}
