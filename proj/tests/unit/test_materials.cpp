#include "phonox/error.hpp"
#include "phonox/materials.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace phonox;

TEST_CASE("voigt index map") {
  CHECK(voigt_index(0, 0) == 0);
  CHECK(voigt_index(1, 2) == 3);
  CHECK(voigt_index(2, 1) == 3);
  CHECK(voigt_index(0, 2) == 4);
  CHECK(voigt_index(1, 0) == 5);
  for (int I = 0; I < 6; ++I) {
    const auto p = voigt_pair(I);
    CHECK(voigt_index(p[0], p[1]) == I);
  }
}

TEST_CASE("orientation must be a proper rotation") {
  Mat3 m = Mat3::Identity();
  m(0, 0) = -1.0;
  CHECK_THROWS_AS(CrystalOrientation{m}, ValidationError);
  m = Mat3::Identity() * 1.01;
  CHECK_THROWS_AS(CrystalOrientation{m}, ValidationError);
}

TEST_CASE("cubic stiffness rotated by 45 degrees about z") {
  const MaterialRecord si = builtin_material_crystal_frame("si");
  const double c11 = si.stiffness(0, 0), c12 = si.stiffness(0, 1), c44 = si.stiffness(3, 3);
  const auto r = rotate_material(si, CrystalOrientation::about_axis(2, std::numbers::pi / 4));
  // closed form for a cubic crystal
  CHECK(r.stiffness(0, 0) == doctest::Approx(0.5 * (c11 + c12) + c44).epsilon(1e-12));
  CHECK(r.stiffness(0, 1) == doctest::Approx(0.5 * (c11 + c12) - c44).epsilon(1e-12));
  CHECK(r.stiffness(5, 5) == doctest::Approx(0.5 * (c11 - c12)).epsilon(1e-12));
  CHECK(r.stiffness(2, 2) == doctest::Approx(c11).epsilon(1e-12));
  CHECK(r.density == si.density);

  const auto q = rotate_material(si, CrystalOrientation::about_axis(2, std::numbers::pi / 2));
  CHECK((q.stiffness - si.stiffness).cwiseAbs().maxCoeff() < 1e-6 * c11);
}

TEST_CASE("full turn leaves every tensor unchanged") {
  const MaterialRecord ln = builtin_material_crystal_frame("ln");
  REQUIRE(ln.is_piezoelectric());
  const auto o = CrystalOrientation::compose(CrystalOrientation::about_axis(0, 2 * std::numbers::pi),
                                             CrystalOrientation::about_axis(1, 2 * std::numbers::pi));
  const auto r = rotate_material(ln, o);
  CHECK((r.stiffness - ln.stiffness).cwiseAbs().maxCoeff() < 1e-9 * ln.stiffness.cwiseAbs().maxCoeff());
  CHECK((r.piezo - ln.piezo).cwiseAbs().maxCoeff() < 1e-12 * ln.piezo.cwiseAbs().maxCoeff());
  CHECK((r.photoelastic - ln.photoelastic).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank-2 rotation swaps principal axes") {
  Mat3 eps = Mat3::Zero();
  eps.diagonal() << 1.0, 2.0, 3.0;
  const Mat3 r = rotate_rank2(eps, CrystalOrientation::about_axis(2, std::numbers::pi / 2).matrix());
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == doctest::Approx(1.0));
  CHECK(r(2, 2) == doctest::Approx(3.0));
}

TEST_CASE("isotropic material has the requested velocities") {
  const auto m = isotropic_material("iso", 2000.0, 6000.0, 3500.0, 1.5);
  CHECK(std::sqrt(m.stiffness(0, 0) / m.density) == doctest::Approx(6000.0));
  CHECK(std::sqrt(m.stiffness(3, 3) / m.density) == doctest::Approx(3500.0));
  CHECK(m.mean_optical_index() == doctest::Approx(1.5));
  CHECK_THROWS_AS(isotropic_material("bad", 2000.0, 3000.0, 3000.0), ValidationError);
}

TEST_CASE("builtin library") {
  for (const char* name : {"si", "sapphire", "ln", "sio2", "al"}) {
    CAPTURE(name);
    const auto& m = builtin_material(name);
    CHECK_NOTHROW(m.validate());
    CHECK(m.density > 0.0);
  }
  CHECK(builtin_material("ln").is_piezoelectric());
  CHECK_FALSE(builtin_material("si").is_piezoelectric());
  CHECK_THROWS_AS(builtin_material("unobtainium"), ValidationError);
}

TEST_CASE("material json round trip") {
  const auto& ln = builtin_material("ln");
  const auto back = material_from_json(material_to_json(ln));
  CHECK(back.name == ln.name);
  CHECK((back.stiffness - ln.stiffness).cwiseAbs().maxCoeff() <= 1e-12 * ln.stiffness.cwiseAbs().maxCoeff());
  CHECK((back.piezo - ln.piezo).cwiseAbs().maxCoeff() <= 1e-12 * ln.piezo.cwiseAbs().maxCoeff());
  CHECK(back.loss_tangent == ln.loss_tangent);
}
