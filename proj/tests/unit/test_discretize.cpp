#include "phonox/assemble.hpp"
#include "phonox/error.hpp"
#include "phonox/structures.hpp"

#include <doctest.h>

#include <cmath>

using namespace phonox;

TEST_CASE("uniform and graded axes") {
  const auto u = GridAxis::uniform(0.0, 1.0, 4);
  REQUIRE(u.nodes.size() == 5);
  CHECK(u.nodes[2] == doctest::Approx(0.5));
  CHECK(u.length() == doctest::Approx(1.0));

  const auto g = graded_axis(0.0, 1.0, 0.01, 0.1, Boundary::free, Boundary::fixed);
  CHECK(g.nodes.front() == 0.0);
  CHECK(g.nodes.back() == doctest::Approx(1.0));
  CHECK(g.hi == Boundary::fixed);
  const double first = g.nodes[1] - g.nodes[0];
  const double last = g.nodes.back() - g.nodes[g.nodes.size() - 2];
  CHECK(first < last);
  for (std::size_t i = 1; i < g.nodes.size(); ++i) CHECK(g.nodes[i] > g.nodes[i - 1]);
}

TEST_CASE("q1 shape functions") {
  std::array<double, 4> n, dxi, deta;
  for (double xi : {-1.0, -0.3, 0.2, 1.0})
    for (double eta : {-1.0, 0.5, 1.0}) {
      q1_shape(xi, eta, n, dxi, deta);
      CHECK(n[0] + n[1] + n[2] + n[3] == doctest::Approx(1.0));
      CHECK(dxi[0] + dxi[1] + dxi[2] + dxi[3] == doctest::Approx(0.0));
      CHECK(deta[0] + deta[1] + deta[2] + deta[3] == doctest::Approx(0.0));
    }
  q1_shape(1.0, 1.0, n, dxi, deta);
  CHECK(n[2] == doctest::Approx(1.0));
}

TEST_CASE("pml profile") {
  PMLProfile p;
  p.A = 3.0;
  p.R_start = 2e-6;
  p.R_0 = 0.5e-6;
  p.R_sim = 4e-6;
  CHECK(pml_value(p.R_start, p) == 0.0);
  CHECK(pml_value(1e-6, p) == 0.0);
  CHECK(pml_value(3e-6, p) == doctest::Approx(3.0 * (std::exp(2.0) - 1.0)));
  p.R_sim = 1e-6;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("painting mixes two materials by area") {
  auto g = std::make_shared<Grid2D>(GridAxis::uniform(0.0, 1.0, 2), GridAxis::uniform(0.0, 1.0, 1),
                                    std::array<int, 2>{0, 1});
  const int a = g->add_material(isotropic_material("a", 1000, 3000, 2000));
  const int b = g->add_material(isotropic_material("b", 3000, 3000, 2000));
  g->paint([&](double x, double) { return x < 0.25 ? a : b; }, 8);
  const auto& m0 = g->cell_material(g->cell(0, 0));
  CHECK((m0.a == a ? m0.frac_a : 1.0 - m0.frac_a) == doctest::Approx(0.5));
  CHECK(cell_mix(*g, g->cell(0, 0)).density == doctest::Approx(2000.0));
  CHECK(cell_mix(*g, g->cell(1, 0)).density == doctest::Approx(3000.0));

  int cell = -1;
  double xi = 0, eta = 0;
  REQUIRE(g->locate(0.75, 0.5, cell, xi, eta));
  CHECK(cell == g->cell(1, 0));
  CHECK(xi == doctest::Approx(0.0));
}

TEST_CASE("elastic operators are hermitian and the mass adds up") {
  auto g = std::make_shared<Grid2D>(GridAxis::uniform(0.0, 1e-6, 6), GridAxis::uniform(0.0, 0.5e-6, 3),
                                    std::array<int, 2>{0, 1}, 2e-7);
  g->add_material(builtin_material("si"));
  g->paint([](double, double) { return 0; });
  BlochSpec b;
  b.k_out = 1e6;
  const auto ops = assemble_elastic(g, b);
  const SpMatC kd = ops.K - SpMatC(ops.K.adjoint());
  const SpMatC md = ops.M - SpMatC(ops.M.adjoint());
  CHECK(kd.norm() <= 1e-12 * ops.K.norm());
  CHECK(md.norm() <= 1e-12 * ops.M.norm());
  // consistent mass: every component carries rho * volume
  const double total = Eigen::MatrixXcd(ops.M).sum().real();
  CHECK(total == doctest::Approx(3.0 * builtin_material("si").density * 1e-6 * 0.5e-6 * 2e-7).epsilon(0.01));
}

TEST_CASE("stack grid layers its films above the substrate") {
  const auto g = stack_grid({{"si", 220e-9}}, builtin_material("sapphire"), 1e-6, {5e-9, 40e-9, 0.5e-6, 40e-9});
  CHECK(g->coord(0, 0) == doctest::Approx(-1e-6));
  CHECK(g->coord(0, g->nodes(0) - 1) == doctest::Approx(220e-9 + 0.5e-6));
  CHECK(g->axis(0).lo == Boundary::fixed);
  int cell = -1;
  double xi, eta;
  REQUIRE(g->locate(100e-9, 0.5, cell, xi, eta));
  CHECK(cell_mix(*g, cell).density == doctest::Approx(builtin_material("si").density));
  REQUIRE(g->locate(600e-9, 0.5, cell, xi, eta));
  CHECK_FALSE(g->cell_is_solid(cell));
}
