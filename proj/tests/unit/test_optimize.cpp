#include "phonox/error.hpp"
#include "phonox/optimize.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace phonox;

namespace {

double rosenbrock(const std::vector<double>& x) {
  return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

}  // namespace

TEST_CASE("nelder-mead finds the rosenbrock minimum") {
  const auto r = nelder_mead(rosenbrock, {-1.2, 1.0}, {.max_evals = 5000});
  CHECK(std::abs(r.x[0] - 1.0) < 1e-4);
  CHECK(std::abs(r.x[1] - 1.0) < 1e-4);
  CHECK(r.evals <= 5000);
  REQUIRE_FALSE(r.trace.empty());
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].best <= r.trace[i - 1].best);
  CHECK(r.trace.back().best == r.f);
}

TEST_CASE("nelder-mead respects its budget and rejects a bad start") {
  const auto r = nelder_mead(rosenbrock, {-1.2, 1.0}, {.max_evals = 30});
  CHECK(r.evals <= 30);
  CHECK(r.stop == "max_evals");
  const auto nan = [](const std::vector<double>&) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(nelder_mead(nan, {0.0}), ValidationError);
}

TEST_CASE("robust objective is the pairwise minimum") {
  CHECK(robust_objective([](double s) { return s == 1.0 ? 3.0 : 2.0; }) == 2.0);
  CHECK(robust_objective([](double s) { return s == 1.0 ? 1.0 : 2.0; }) == 1.0);
  CHECK(robust_objective([](double s) { return 5.0 * s; }, 0.9) == 4.5);
  const double r = robust_objective([](double s) -> double {
    if (s != 1.0) throw std::runtime_error("solver failed");
    return 1.0;
  });
  CHECK(r == -std::numeric_limits<double>::infinity());
}

TEST_CASE("design parameters act on region-defining cells") {
  const auto layout = device_preset("sOMC-transducer");
  const auto dv = design_from_layout(layout, {"omc_partial_mirror:a", "omc_partial_mirror:hy"}, 0.1);
  REQUIRE(dv.values.size() == 2);
  CHECK(dv.params[0].lo == doctest::Approx(0.9 * dv.values[0]));
  CHECK(dv.params[1].hi == doctest::Approx(1.1 * dv.values[1]));

  const std::vector<double> x{dv.values[0] * 1.01, dv.values[1] * 0.99};
  const auto moved = apply_design(layout, dv, x);
  for (const auto& r : moved.regions) {
    if (r.start.role == "omc_partial_mirror") {
      CHECK(r.start.a == doctest::Approx(x[0]));
      CHECK(r.start.hy() == doctest::Approx(x[1]));
    }
    if (r.end.role == "omc_partial_mirror") CHECK(r.end.a == doctest::Approx(x[0]));
  }
  const auto clamped = dv.clamped({1.0, -1.0});
  CHECK(clamped[0] == dv.params[0].hi);
  CHECK(clamped[1] == dv.params[1].lo);
  CHECK_THROWS_AS(design_from_layout(layout, {"omc_partial_mirror:depth"}), ValidationError);
  CHECK_THROWS_AS(design_from_layout(layout, {"nobody:a"}), ValidationError);
}

TEST_CASE("feature checks") {
  auto layout = device_preset("sOMC-transducer");
  CHECK(feature_violations(layout, 40e-9).empty());
  layout.regions[0].start.stack.back().hx = layout.regions[0].start.a - 20e-9;
  layout.regions[0].end = layout.regions[0].start;
  CHECK_FALSE(feature_violations(layout, 40e-9).empty());
}

TEST_CASE("capped objective") {
  ObjectiveSpec s;
  s.Qo_max = 100.0;
  s.Qm_max = 10.0;
  const double two_pi = 2.0 * 3.141592653589793;
  const double g = two_pi * 1e6;  // 1 MHz
  CHECK(capped_objective(g, 2 * g, 1e9, 5.0, s) == doctest::Approx(1.0 * 2.0 * 100.0 * 5.0));
  s.omc_only = true;
  CHECK(capped_objective(g, 2 * g, 1e9, 5.0, s) == doctest::Approx(1.0 * 100.0 * 5.0));
}

TEST_CASE("optimize on the envelope model improves or keeps the start") {
  const auto layout = device_preset("sOMC-transducer");
  const auto& bands = AnchorBandTable::default_table();
  ObjectiveSpec spec;
  spec.robust = false;
  spec.omc_only = true;
  const auto dv = design_from_layout(layout, default_design_parameters(layout, true), 0.05);
  const auto rep = optimize_design(layout, dv, bands, spec, 25);
  CHECK(rep.evals <= 25);
  CHECK(rep.f_obj_best >= rep.f_obj0);
  REQUIRE_FALSE(rep.trace.empty());
  CHECK(rep.to_json().contains("x_best_m"));
}
