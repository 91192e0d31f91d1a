#include "phonox/constants.hpp"
#include "phonox/eigensolve.hpp"
#include "phonox/error.hpp"
#include "phonox/structures.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace phonox;

namespace {

std::shared_ptr<Grid2D> periodic_line(const MaterialRecord& m, double length, int cells) {
  auto g = line_grid(GridAxis::uniform(0.0, length, cells, Boundary::periodic, Boundary::periodic), 0, 1);
  g->add_material(m);
  g->paint([](double, double) { return 0; });
  return g;
}

}  // namespace

TEST_CASE("optical plane wave in a homogeneous medium") {
  const double n = 2.0, L = 1e-6;
  const auto g = periodic_line(isotropic_material("glass", 2200, 6000, 3500, n), L, 96);
  BlochSpec b;
  b.k_in = {0.4 * constants::pi / L, 0.0};
  const auto ops = assemble_optical(g, b, 1);
  const auto modes = solve_modes(ops, 2, 0.0);
  REQUIRE(modes.size() == 2);
  const double exact = constants::c0 * b.k_in[0] / n;
  CHECK(modes[0].omega.real() == doctest::Approx(exact).epsilon(1e-3));
  for (const auto& m : modes) {
    CHECK(std::abs(m.omega.imag()) <= 1e-10 * m.omega.real());
    CHECK(m.residual < 1e-6);
    CHECK(radiative_q(m) == std::numeric_limits<double>::infinity());
  }
}

TEST_CASE("elastic plane waves: one longitudinal and two shear branches") {
  const double vL = 8000.0, vS = 5000.0, L = 1e-6;
  const auto g = periodic_line(isotropic_material("iso", 2500, vL, vS), L, 96);
  BlochSpec b;
  b.k_in = {0.5 * constants::pi / L, 0.0};
  const auto modes = solve_modes(assemble_elastic(g, b), 3, 0.0);
  REQUIRE(modes.size() == 3);
  const double k = b.k_in[0];
  CHECK(modes[0].omega.real() == doctest::Approx(vS * k).epsilon(1e-3));
  CHECK(modes[1].omega.real() == doctest::Approx(vS * k).epsilon(1e-3));
  CHECK(modes[2].omega.real() == doctest::Approx(vL * k).epsilon(1e-3));
  CHECK(std::abs(modes[2].at(3, 0)) > 10.0 * std::abs(modes[2].at(3, 1)));
}

TEST_CASE("rigid-body modes at k = 0 do not stall the solver") {
  const auto g = periodic_line(isotropic_material("iso", 2500, 8000, 5000), 1e-6, 24);
  const auto modes = solve_modes(assemble_elastic(g, {}), 3, 0.0);
  REQUIRE(modes.size() == 3);
  for (const auto& m : modes) CHECK(std::abs(m.omega) < 1e-3 * 5000.0 * 2.0 * constants::pi / 1e-6);
}

TEST_CASE("radiative q and residual") {
  CHECK(radiative_q(cplx(100.0, -1.0)) == doctest::Approx(50.0));
  CHECK(radiative_q(cplx(100.0, 1.0)) == doctest::Approx(50.0));
  SpMatC K(2, 2), M(2, 2);
  K.insert(0, 0) = 2.0;
  K.insert(1, 1) = 5.0;
  M.insert(0, 0) = 1.0;
  M.insert(1, 1) = 1.0;
  Eigen::VectorXcd x(2);
  x << 1.0, 0.0;
  CHECK(relative_residual(K, M, x, 2.0) == doctest::Approx(0.0));
  CHECK(relative_residual(K, M, x, 3.0) > 0.1);
}
