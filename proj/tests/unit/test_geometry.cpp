#include "phonox/error.hpp"
#include "phonox/geometry.hpp"

#include <doctest.h>

#include <cmath>

using namespace phonox;

namespace {

UnitCell simple_cell(double a, double hx, double hy, double w) {
  UnitCell c;
  c.role = "omc_mirror";
  c.a = a;
  c.stack = {Layer{"si", 220e-9, hx, hy, w}};
  return c;
}

}  // namespace

TEST_CASE("smoothstep") {
  CHECK(smoothstep(0.0) == 0.0);
  CHECK(smoothstep(1.0) == 1.0);
  CHECK(smoothstep(0.5) == doctest::Approx(0.5));
  CHECK(smoothstep(0.25) == doctest::Approx(3 * 0.0625 - 2 * 0.015625));
}

TEST_CASE("interpolated cells keep exact endpoints") {
  const auto c0 = simple_cell(400e-9, 200e-9, 500e-9, 700e-9);
  const auto c1 = simple_cell(360e-9, 180e-9, 420e-9, 700e-9);
  const auto v = interpolate_cells(c0, c1, 6);
  REQUIRE(v.size() == 6);
  CHECK(v.front() == c0);
  CHECK(v.back().a == c1.a);
  CHECK(v.back().hy() == c1.hy());
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i].a < v[i - 1].a);
  // symmetric smooth-step: the middle pair averages to the mean period
  CHECK(0.5 * (v[2].a + v[3].a) == doctest::Approx(0.5 * (c0.a + c1.a)));
  CHECK_THROWS_AS(interpolate_cells(c0, c1, 1), ValidationError);
}

TEST_CASE("taper law") {
  bool out = true;
  const double h = taper_hx(500e-9, {}, &out);
  CHECK_FALSE(out);
  const double hn = 500.0;
  CHECK(h == doctest::Approx((-1271.0 + 9.365 * hn - 0.01875 * hn * hn + 1.238e-5 * hn * hn * hn) * 1e-9));
  taper_hx(700e-9, {}, &out);
  CHECK(out);
}

TEST_CASE("taper region follows the law inside and keeps its endpoints") {
  const auto layout = device_preset("sOMC-transducer");
  const Region* taper = nullptr;
  for (const auto& r : layout.regions)
    if (r.profile == Profile::taper) taper = &r;
  REQUIRE(taper != nullptr);
  const auto chain = interpolate_taper(taper->start, taper->end, taper->count + 2);
  CHECK(chain.front() == taper->start);
  CHECK(chain.back() == taper->end);
  for (std::size_t i = 1; i + 1 < chain.size(); ++i) {
    const Layer& top = chain[i].stack.back();
    CHECK(top.hx == doctest::Approx(taper_hx(top.hy)).epsilon(1e-12));
  }
}

TEST_CASE("device presets") {
  for (const auto& name : device_preset_names()) {
    CAPTURE(name);
    const auto l = device_preset(name);
    CHECK_NOTHROW(l.validate());
    CHECK(l.cell_count() == static_cast<int>(l.cells().size()));
    const auto back = layout_from_json(layout_to_json(l));
    CHECK(back.cells().size() == l.cells().size());
    for (std::size_t i = 0; i < l.cells().size(); ++i) CHECK(back.cells()[i].cell == l.cells()[i].cell);
  }
  CHECK_THROWS_AS(device_preset("nope"), ValidationError);
}

TEST_CASE("disorder is reproducible and clamped") {
  const auto l = device_preset("sOMC-transducer");
  const auto a = apply_disorder(l, {2e-9, 42, 10e-9});
  const auto b = apply_disorder(l, {2e-9, 42, 10e-9});
  const auto c = apply_disorder(l, {2e-9, 43, 10e-9});
  const auto ca = a.cells(), cb = b.cells(), cc = c.cells();
  REQUIRE(ca.size() == l.cells().size());
  bool differs = false;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    CHECK(ca[i].cell == cb[i].cell);
    differs = differs || !(ca[i].cell == cc[i].cell);
    CHECK(ca[i].tag == l.cells()[i].tag);
  }
  CHECK(differs);
  const auto same = apply_disorder(l, {0.0, 42, 10e-9}).cells();
  for (std::size_t i = 0; i < same.size(); ++i) CHECK(same[i].cell == l.cells()[i].cell);

  const auto big = apply_disorder(l, {400e-9, 1, 10e-9}).cells();
  for (const auto& c : big)
    for (const auto& layer : c.cell.stack) {
      CHECK(layer.hx >= 10e-9);
      CHECK(layer.hy >= 10e-9);
    }
  CHECK_THROWS_AS(apply_disorder(l, {-1e-9, 1, 10e-9}), ValidationError);
}

TEST_CASE("cell validation") {
  auto c = simple_cell(400e-9, 200e-9, 500e-9, 700e-9);
  CHECK_NOTHROW(c.validate());
  c.a = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(profile_from_string(to_string(Profile::taper)) == Profile::taper);
  CHECK_THROWS_AS(profile_from_string("wiggly"), ValidationError);
}
