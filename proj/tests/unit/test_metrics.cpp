#include "phonox/constants.hpp"
#include "phonox/error.hpp"
#include "phonox/materials.hpp"
#include "phonox/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace phonox;
using constants::two_pi;

namespace {

TransducerParams sample(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lg(-2.0, 2.0);
  const auto r = [&](double scale) { return scale * std::pow(10.0, lg(rng)); };
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
  p.omega_o = two_pi * 195e12;
  return p;
}

}  // namespace

TEST_CASE("cooperativities and efficiency") {
  TransducerParams p;
  p.g_om = two_pi * 0.43e6;
  p.g_em = two_pi * 6.3e6;
  p.kappa_oi = two_pi * 50e6;
  p.kappa_oe = two_pi * 50e6;
  p.kappa_o = two_pi * 100e6;
  p.kappa_mu = two_pi * 1e6;
  p.kappa_mue = two_pi * 0.5e6;
  p.gamma_m = two_pi * 50e3;
  p.n_c = 100;
  p.omega_o = two_pi * 195e12;
  const auto m = compute_metrics(p);
  const double com = 4 * p.g_om * p.g_om * p.n_c / (p.kappa_o * p.gamma_m);
  const double cem = 4 * p.g_em * p.g_em / (p.kappa_mu * p.gamma_m);
  CHECK(m.C_om == doctest::Approx(com));
  CHECK(m.C_em == doctest::Approx(cem));
  CHECK(m.eta_ext == doctest::Approx(4 * 0.5 * 0.5 * com * cem / std::pow(1 + com + cem, 2)));
  CHECK(m.bandwidth == doctest::Approx(p.gamma_m * (1 + com + cem)));
  CHECK(m.photon_dissipation == doctest::Approx(p.kappa_oi * p.n_c));
  const double eq = constants::hbar * p.omega_o / (0.5 * 0.5 * cem / (1 + cem)) * p.kappa_o * p.kappa_oi /
                    (4 * p.g_om * p.g_om);
  CHECK(m.energy_per_qubit == doctest::Approx(eq));
}

TEST_CASE("efficiency-bandwidth forms agree") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto p = sample(rng);
    const double lhs = efficiency_bandwidth_exact(p) * approximation_factor(p);
    CHECK(lhs == doctest::Approx(efficiency_bandwidth_from_energy(p)).epsilon(1e-12));
    CHECK(efficiency_bandwidth_approx(p) == doctest::Approx(lhs).epsilon(1e-12));
  }
}

TEST_CASE("invalid parameters") {
  TransducerParams p;
  p.kappa_oi = 1.0;
  p.kappa_oe = 1.0;
  p.kappa_o = 3.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.kappa_o = 2.0;
  p.kappa_mu = 1.0;
  p.kappa_mue = 2.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.kappa_mue = 0.5;
  CHECK_THROWS_AS(compute_metrics(p), ValidationError);  // gamma_m = 0
  p.gamma_m = 1.0;
  const auto m = compute_metrics(p);  // g_om = 0
  CHECK(std::isinf(m.energy_per_qubit));
}

TEST_CASE("json uses /2pi values") {
  const auto p = TransducerParams::from_json(
      {{"g_om", 1e5}, {"g_em", 1e6}, {"kappa_o_i", 1e7}, {"kappa_o_e", 2e7}, {"kappa_mu", 1e6},
       {"kappa_mu_e", 1e5}, {"gamma_m", 1e4}, {"n_c", 10.0}, {"omega_o", 1.9e14}});
  CHECK(p.g_om == doctest::Approx(two_pi * 1e5));
  CHECK(p.kappa_o == doctest::Approx(two_pi * 3e7));
  CHECK(p.to_json()["g_em"].get<double>() == doctest::Approx(1e6));
}

TEST_CASE("comparison rows are recomputed from their loss rates") {
  const std::string csv =
      "label,type,g_om [MHz],g_em [MHz],C_em_est,E_qubit_est [pJ],kappa_o [MHz],kappa_o_i [MHz],kappa_mu [MHz],"
      "kappa_mu_e [MHz],gamma_m [MHz],omega_o [THz],eta_em,g_om_scale\n"
      "A,1-D OMC,0.5,2,(10),-,1000,500,1,0.5,0.1,195,,\n"
      "B,2-D OMC,0.4,-,-,-,,,,,,,,\n";
  const auto rep = ingest_comparison_text(csv, 0.2);
  REQUIRE(rep.rows.size() == 2);
  const auto& a = rep.rows[0];
  CHECK(a.assumption_derived);
  REQUIRE(a.C_em);
  const double cem = 4 * 2.0 * 2.0 / (1.0 * 0.1);
  CHECK(*a.C_em == doctest::Approx(cem));
  CHECK(a.C_em_deviates);  // 160 against a tabulated 10
  REQUIRE(a.E_qubit_pJ);
  const double eta = 0.5 * 0.5 * cem / (1 + cem);  // eta_mu, eta_o, eta_em
  const double eq = constants::hbar * two_pi * 195e12 / eta * (two_pi * 1000e6) * (two_pi * 500e6) /
                    (4 * std::pow(two_pi * 0.5e6, 2));
  CHECK(*a.E_qubit_pJ == doctest::Approx(eq * 1e12));
  CHECK_FALSE(rep.rows[1].incomputable.empty());
  CHECK_FALSE(rep.text_table().empty());
}

TEST_CASE("shipped comparison table loads") {
  const auto rep = ingest_comparison(data_dir() / "comparison" / "literature_comparison.csv");
  CHECK(rep.rows.size() >= 5);
}
