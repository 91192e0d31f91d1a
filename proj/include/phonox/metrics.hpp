#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace phonox {

/// Transducer rates, all angular (rad/s). n_c is the intracavity pump photon number.
struct TransducerParams {
  double g_om = 0.0, g_em = 0.0;
  double kappa_o = 0.0, kappa_oi = 0.0, kappa_oe = 0.0;
  double kappa_mu = 0.0, kappa_mue = 0.0;
  double gamma_m = 0.0;
  double n_c = 0.0;
  double omega_o = 0.0;

  /// kappa_o = kappa_oi + kappa_oe (relative 1e-9), kappa_mue <= kappa_mu, all >= 0.
  void validate() const;
  /// Keys: g_om, g_em, kappa_o, kappa_o_i, kappa_o_e, kappa_mu, kappa_mu_e,
  /// gamma_m, omega_o as /2pi values in Hz, and n_c. kappa_o may be omitted
  /// (sum of its parts).
  static TransducerParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct TransducerMetrics {
  double C_om = 0.0, C_em = 0.0;
  double eta_o = 0.0, eta_mu = 0.0, eta_em = 0.0, eta_ext = 0.0;
  double bandwidth = 0.0;               // rad/s
  double efficiency_bandwidth = 0.0;    // rad/s, exact first line
  double photon_dissipation = 0.0;      // Phi_i, photons/s
  double energy_per_qubit = 0.0;        // J; +inf when g_om = 0

  nlohmann::json to_json() const;
};

double cooperativity_om(const TransducerParams& p);
double cooperativity_em(const TransducerParams& p);

/// Throws ValidationError when gamma_m = 0 or the parameters are invalid.
TransducerMetrics compute_metrics(const TransducerParams& p);

/// E_qubit = hbar omega_o / (eta_mu eta_o eta_em) * kappa_o kappa_oi / (4 g_om^2), J.
/// Throws when an efficiency factor or g_om is zero.
double energy_per_qubit(const TransducerParams& p);

/// Separately named forms of the efficiency-bandwidth product:
/// exact (first line), the C_om << 1 + C_em approximation, and
/// 4 hbar omega_o Phi_i / E_qubit.
double efficiency_bandwidth_exact(const TransducerParams& p);
double efficiency_bandwidth_approx(const TransducerParams& p);
double efficiency_bandwidth_from_energy(const TransducerParams& p);
/// (1 + C_em + C_om) / (1 + C_em): E_qubit eta_ext dw / (4 hbar omega_o Phi_i).
double approximation_factor(const TransducerParams& p);

/// Literature comparison row. Rates in MHz (/2pi) as tabulated; loss-rate
/// assumptions in MHz (/2pi), optical frequency in THz.
struct ComparisonRow {
  std::string label, type;
  std::optional<double> g_om_MHz, g_em_MHz, C_em_tab, E_qubit_tab_pJ;
  bool assumption_derived = false;  // parenthesized tabulated values
  std::optional<double> kappa_o, kappa_oi, kappa_mu, kappa_mue, gamma_m, omega_o_THz;
  std::optional<double> eta_em;     // assumed instead of C_em/(1+C_em)
  double g_om_scale = 1.0;          // e.g. 0.5 for "half the reported g_om"

  std::optional<double> C_em, E_qubit_pJ;  // recomputed
  std::vector<std::string> incomputable;   // reasons
  bool C_em_deviates = false, E_qubit_deviates = false;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double threshold = 0.2;

  nlohmann::json to_json() const;
  std::string text_table() const;
};

/// Columns (header "name [unit]"): label, type, g_om [MHz], g_em [MHz],
/// C_em_est, E_qubit_est [pJ], kappa_o [MHz], kappa_o_i [MHz], kappa_mu [MHz],
/// kappa_mu_e [MHz], gamma_m [MHz], omega_o [THz], eta_em, g_om_scale.
/// Empty or "-" cells are missing; "(x)" marks an assumption-derived value.
/// Only label and type are required columns.
ComparisonReport ingest_comparison(const std::filesystem::path& csv, double threshold = 0.2);
ComparisonReport ingest_comparison_text(const std::string& csv_text, double threshold = 0.2);
void recompute_row(ComparisonRow& row, double threshold = 0.2);

}  // namespace phonox
