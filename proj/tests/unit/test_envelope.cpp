#include "phonox/constants.hpp"
#include "phonox/envelope.hpp"
#include "phonox/error.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace phonox;

TEST_CASE("hard-wall chain matches the tight-binding spectrum") {
  const int n = 12;
  const double wx = 2.0 * constants::pi * 5e9, tau = 2.0 * constants::pi * 20e6;
  const auto model = uniform_chain(n, wx, tau);
  const auto modes = cavity_spectrum(model);
  REQUIRE(modes.size() == static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    const double exact = wx + 2.0 * tau - 2.0 * tau * std::cos(j * constants::pi / (n + 1));
    CHECK(modes[j - 1].omega.real() == doctest::Approx(exact).epsilon(1e-12));
    CHECK(modes[j - 1].envelope.norm() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(uniform_chain(2, wx, tau), ValidationError);
}

TEST_CASE("loss enters as a negative imaginary part") {
  const double gamma = 1e5;
  const auto modes = cavity_spectrum(uniform_chain(6, 1e10, 1e8, gamma));
  for (const auto& m : modes) {
    CHECK(m.omega.imag() == doctest::Approx(-0.5 * gamma));
    CHECK(m.q() == doctest::Approx(m.omega.real() / gamma));
  }
}

TEST_CASE("anti-crossing against a 2x2 eigenproblem") {
  const double w1 = 1.00e10, w2 = 1.02e10, g = 3e7;
  Eigen::Matrix2d h;
  h << w1, g, g, w2;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
  const auto ac = anti_crossing(w1, w2, g);
  CHECK(ac.omega_minus == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-14));
  CHECK(ac.omega_plus == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-14));
  CHECK(ac.p1_plus == doctest::Approx(std::norm(es.eigenvectors()(0, 1))).epsilon(1e-10));
  CHECK(ac.p1_plus + ac.p1_minus == doctest::Approx(1.0));

  const auto d0 = anti_crossing(w1, w1, g);
  CHECK(d0.omega_plus - d0.omega_minus == doctest::Approx(2.0 * g));

  const double p = 0.2;
  const double delta = detuning_for_participation(g, p);
  const auto at = anti_crossing(w1 + delta, w1, g);
  CHECK(at.p1_minus == doctest::Approx(p).epsilon(1e-10));
  CHECK_THROWS_AS(detuning_for_participation(g, 0.7), ValidationError);
}

TEST_CASE("fourier peak of a pure carrier") {
  const int n = 32;
  const double a = 400e-9, k = 0.3 * constants::pi / a;
  Eigen::VectorXcd s(n);
  for (int i = 0; i < n; ++i) s(i) = std::polar(1.0, k * a * i);
  CHECK(fourier_peak(s, a) == doctest::Approx(k).epsilon(1.0 / 64.0));
}

TEST_CASE("bound state decay") {
  // (onsite - omega) = 2 tau cosh(kappa)
  const double tau = 2.0, kappa = 0.7;
  CHECK(bound_state_decay(2.0 * tau * std::cosh(kappa), tau) == doctest::Approx(kappa));
}

TEST_CASE("preset chains build from the default table") {
  const auto layout = device_preset("sOMC-transducer");
  const auto& table = AnchorBandTable::default_table();
  const auto mech = build_envelope(layout, table, Chain::mechanical);
  const auto opt = build_envelope(layout, table, Chain::optical);
  CHECK(mech.size() == layout.cell_count());
  CHECK(opt.size() == layout.cell_count());
  CHECK(mech.heuristic_loss);

  const auto r = transducer_modes(layout.cells(), table);
  REQUIRE(r.best_g_om >= 0);
  CHECK(r.g_om.size() == r.mech_modes.size());
  CHECK(r.optical.frequency_hz() > 150e12);
  CHECK(r.optical.frequency_hz() < 250e12);
  CHECK(defect_participation(r.opt, r.optical) > 0.5);
  for (double g : r.g_om) CHECK(g <= r.g_om[static_cast<std::size_t>(r.best_g_om)]);
}

TEST_CASE("missing role is reported") {
  auto layout = device_preset("sOMC-transducer");
  layout.regions[0].start.role = "no_such_role";
  layout.regions[0].end.role = "no_such_role";
  CHECK_THROWS_AS(build_envelope(layout, AnchorBandTable::default_table(), Chain::mechanical), ValidationError);
}

TEST_CASE("emc period scaling") {
  const auto layout = device_preset("sOMC-transducer");
  const auto scaled = scale_emc_period(layout, 1.02);
  for (std::size_t i = 0; i < layout.regions.size(); ++i)
    if (layout.regions[i].start.role == "emc_defect" && layout.regions[i].end.role == "emc_defect")
      CHECK(scaled.regions[i].start.a == doctest::Approx(1.02 * layout.regions[i].start.a));
}
