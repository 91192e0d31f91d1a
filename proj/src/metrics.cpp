#include "phonox/metrics.hpp"

#include "phonox/constants.hpp"
#include "phonox/error.hpp"
#include "phonox/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace phonox {

using constants::hbar;
using constants::two_pi;

void TransducerParams::validate() const {
  const double vals[] = {g_om, g_em, kappa_o, kappa_oi, kappa_oe, kappa_mu, kappa_mue, gamma_m, n_c, omega_o};
  const char* names[] = {"g_om", "g_em", "kappa_o", "kappa_o_i", "kappa_o_e", "kappa_mu", "kappa_mu_e",
                         "gamma_m", "n_c", "omega_o"};
  for (int i = 0; i < 10; ++i)
    if (!std::isfinite(vals[i]) || vals[i] < 0.0)
      throw ValidationError(std::string("transducer parameter ") + names[i] + " must be finite and >= 0");
  if (std::abs(kappa_o - (kappa_oi + kappa_oe)) > 1e-9 * std::max(kappa_o, 1.0))
    throw ValidationError("kappa_o must equal kappa_o_i + kappa_o_e");
  if (kappa_mue > kappa_mu * (1.0 + 1e-12)) throw ValidationError("kappa_mu_e must not exceed kappa_mu");
}

TransducerParams TransducerParams::from_json(const nlohmann::json& j) {
  const auto rate = [&](const char* k, bool required = true) {
    if (!j.contains(k)) {
      if (required) throw ValidationError(std::string("transducer parameters: missing '") + k + "'");
      return 0.0;
    }
    if (!j.at(k).is_number()) throw ValidationError(std::string("transducer parameters: '") + k + "' is not a number");
    return two_pi * j.at(k).get<double>();
  };
  TransducerParams p;
  p.g_om = rate("g_om");
  p.g_em = rate("g_em");
  p.kappa_oi = rate("kappa_o_i");
  p.kappa_oe = rate("kappa_o_e");
  p.kappa_o = j.contains("kappa_o") ? rate("kappa_o") : p.kappa_oi + p.kappa_oe;
  p.kappa_mu = rate("kappa_mu");
  p.kappa_mue = rate("kappa_mu_e");
  p.gamma_m = rate("gamma_m");
  p.omega_o = rate("omega_o");
  if (!j.contains("n_c") || !j.at("n_c").is_number()) throw ValidationError("transducer parameters: missing 'n_c'");
  p.n_c = j.at("n_c").get<double>();
  p.validate();
  return p;
}

nlohmann::json TransducerParams::to_json() const {
  return {{"g_om", g_om / two_pi},         {"g_em", g_em / two_pi},       {"kappa_o", kappa_o / two_pi},
          {"kappa_o_i", kappa_oi / two_pi}, {"kappa_o_e", kappa_oe / two_pi}, {"kappa_mu", kappa_mu / two_pi},
          {"kappa_mu_e", kappa_mue / two_pi}, {"gamma_m", gamma_m / two_pi}, {"omega_o", omega_o / two_pi},
          {"n_c", n_c},                     {"units", "Hz (rate/2pi); n_c photons"}};
}

namespace {
nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
}  // namespace

nlohmann::json TransducerMetrics::to_json() const {
  return {{"C_om", C_om},
          {"C_em", C_em},
          {"eta_o", eta_o},
          {"eta_mu", eta_mu},
          {"eta_em", eta_em},
          {"eta_ext", eta_ext},
          {"bandwidth_over_2pi_Hz", bandwidth / two_pi},
          {"eta_ext_bandwidth_over_2pi_Hz", efficiency_bandwidth / two_pi},
          {"photon_dissipation_per_s", photon_dissipation},
          {"E_qubit_J", finite_or_null(energy_per_qubit)},
          {"E_qubit_pJ", finite_or_null(energy_per_qubit * 1e12)}};
}

double cooperativity_om(const TransducerParams& p) {
  if (!(p.kappa_o > 0.0) || !(p.gamma_m > 0.0)) throw ValidationError("C_om needs kappa_o > 0 and gamma_m > 0");
  return 4.0 * p.g_om * p.g_om * p.n_c / (p.kappa_o * p.gamma_m);
}

double cooperativity_em(const TransducerParams& p) {
  if (!(p.kappa_mu > 0.0) || !(p.gamma_m > 0.0)) throw ValidationError("C_em needs kappa_mu > 0 and gamma_m > 0");
  return 4.0 * p.g_em * p.g_em / (p.kappa_mu * p.gamma_m);
}

double efficiency_bandwidth_exact(const TransducerParams& p) {
  const double com = cooperativity_om(p), cem = cooperativity_em(p);
  const double s = 1.0 + cem + com;
  const double eta_mu = p.kappa_mue / p.kappa_mu, eta_o = p.kappa_oe / p.kappa_o;
  return 4.0 * eta_mu * eta_o * cem * com / (s * s) * p.gamma_m * s;
}

double efficiency_bandwidth_approx(const TransducerParams& p) {
  const double com = cooperativity_om(p), cem = cooperativity_em(p);
  const double eta_mu = p.kappa_mue / p.kappa_mu, eta_o = p.kappa_oe / p.kappa_o;
  return 4.0 * eta_mu * eta_o * cem * com / (1.0 + cem) * p.gamma_m;
}

double energy_per_qubit(const TransducerParams& p) {
  p.validate();
  const double cem = cooperativity_em(p);
  const double eta_mu = p.kappa_mue / p.kappa_mu, eta_o = p.kappa_oe / p.kappa_o, eta_em = cem / (1.0 + cem);
  if (!(eta_mu > 0.0) || !(eta_o > 0.0) || !(eta_em > 0.0))
    throw ValidationError("energy_per_qubit: an efficiency factor is zero");
  if (!(p.g_om > 0.0)) throw ValidationError("energy_per_qubit: g_om must be > 0");
  return hbar * p.omega_o / (eta_mu * eta_o * eta_em) * p.kappa_o * p.kappa_oi / (4.0 * p.g_om * p.g_om);
}

double efficiency_bandwidth_from_energy(const TransducerParams& p) {
  return 4.0 * hbar * p.omega_o * p.kappa_oi * p.n_c / energy_per_qubit(p);
}

double approximation_factor(const TransducerParams& p) {
  const double com = cooperativity_om(p), cem = cooperativity_em(p);
  return (1.0 + cem + com) / (1.0 + cem);
}

TransducerMetrics compute_metrics(const TransducerParams& p) {
  p.validate();
  if (!(p.gamma_m > 0.0)) throw ValidationError("compute_metrics: gamma_m must be > 0");
  TransducerMetrics m;
  m.C_om = cooperativity_om(p);
  m.C_em = cooperativity_em(p);
  m.eta_o = p.kappa_oe / p.kappa_o;
  m.eta_mu = p.kappa_mue / p.kappa_mu;
  m.eta_em = m.C_em / (1.0 + m.C_em);
  const double s = 1.0 + m.C_em + m.C_om;
  m.eta_ext = 4.0 * m.eta_mu * m.eta_o * m.C_em * m.C_om / (s * s);
  m.bandwidth = p.gamma_m * s;
  m.efficiency_bandwidth = efficiency_bandwidth_exact(p);
  m.photon_dissipation = p.kappa_oi * p.n_c;
  if (p.g_om > 0.0 && m.eta_o > 0.0 && m.eta_mu > 0.0 && m.eta_em > 0.0)
    m.energy_per_qubit = energy_per_qubit(p);
  else
    m.energy_per_qubit = std::numeric_limits<double>::infinity();
  return m;
}

// ---------------------------------------------------------------------------
// Literature comparison

namespace {

struct Cell {
  std::optional<double> value;
  bool parenthesized = false;
};

Cell parse_cell(const std::string& raw, const std::string& what) {
  std::string s = raw;
  Cell c;
  if (s.empty() || s == "-") return c;
  if (s.front() == '(' && s.back() == ')') {
    c.parenthesized = true;
    s = s.substr(1, s.size() - 2);
  }
  try {
    c.value = parse_number(s);
  } catch (const ValidationError&) {
    throw ValidationError("comparison table: " + what + " cell '" + raw + "' is not a number");
  }
  return c;
}

bool deviates(double recomputed, double tabulated, double threshold) {
  if (tabulated == 0.0) return recomputed != 0.0;
  return std::abs(recomputed - tabulated) / std::abs(tabulated) > threshold;
}

}  // namespace

void recompute_row(ComparisonRow& r, double threshold) {
  r.incomputable.clear();
  r.C_em.reset();
  r.E_qubit_pJ.reset();
  const auto need = [&](const std::optional<double>& v, const char* name) {
    if (!v) r.incomputable.push_back(std::string("missing ") + name);
    return v.has_value();
  };
  if (r.g_em_MHz) {
    if (*r.g_em_MHz == 0.0) {
      r.C_em = 0.0;
    } else {
      bool ok = need(r.kappa_mu, "kappa_mu");
      ok = need(r.gamma_m, "gamma_m") && ok;
      if (ok && (*r.kappa_mu <= 0.0 || *r.gamma_m <= 0.0)) {
        r.incomputable.push_back("kappa_mu and gamma_m must be > 0");
        ok = false;
      }
      if (ok) r.C_em = 4.0 * *r.g_em_MHz * *r.g_em_MHz / (*r.kappa_mu * *r.gamma_m);
    }
  } else {
    r.incomputable.push_back("missing g_em");
  }

  std::optional<double> eta_em = r.eta_em;
  if (!eta_em && r.C_em) eta_em = *r.C_em / (1.0 + *r.C_em);
  bool ok = need(r.g_om_MHz, "g_om");
  ok = need(r.kappa_o, "kappa_o") && ok;
  ok = need(r.kappa_oi, "kappa_o_i") && ok;
  ok = need(r.kappa_mu, "kappa_mu") && ok;
  ok = need(r.kappa_mue, "kappa_mu_e") && ok;
  ok = need(r.omega_o_THz, "omega_o") && ok;
  if (!eta_em) {
    r.incomputable.push_back("no eta_em (needs C_em or an assumed eta_em)");
    ok = false;
  }
  if (ok) {
    const double g = *r.g_om_MHz * r.g_om_scale * 1e6 * two_pi;
    const double ko = *r.kappa_o * 1e6 * two_pi, koi = *r.kappa_oi * 1e6 * two_pi;
    const double eta_o = (ko - koi) / ko, eta_mu = *r.kappa_mue / *r.kappa_mu;
    if (g > 0.0 && eta_o > 0.0 && eta_mu > 0.0 && *eta_em > 0.0) {
      const double e = hbar * *r.omega_o_THz * 1e12 * two_pi / (eta_mu * eta_o * *eta_em) * ko * koi / (4.0 * g * g);
      r.E_qubit_pJ = e * 1e12;
    } else {
      r.incomputable.push_back("zero efficiency factor or g_om");
    }
  }
  r.C_em_deviates = r.C_em && r.C_em_tab && deviates(*r.C_em, *r.C_em_tab, threshold);
  r.E_qubit_deviates = r.E_qubit_pJ && r.E_qubit_tab_pJ && deviates(*r.E_qubit_pJ, *r.E_qubit_tab_pJ, threshold);
}

ComparisonReport ingest_comparison_text(const std::string& text, double threshold) {
  const CsvTable t = parse_csv(text);
  const int il = t.find("label"), it = t.find("type");
  if (il < 0 || it < 0) throw ValidationError("comparison table: 'label' and 'type' columns are required");
  ComparisonReport rep;
  rep.threshold = threshold;
  for (const auto& row : t.rows) {
    ComparisonRow r;
    r.label = row[static_cast<std::size_t>(il)];
    r.type = row[static_cast<std::size_t>(it)];
    const auto get = [&](const char* col, std::optional<double>& dst) {
      const int i = t.find(col);
      if (i < 0) return;
      const Cell c = parse_cell(row[static_cast<std::size_t>(i)], col);
      dst = c.value;
      if (c.parenthesized) r.assumption_derived = true;
    };
    get("g_om", r.g_om_MHz);
    get("g_em", r.g_em_MHz);
    get("C_em_est", r.C_em_tab);
    get("E_qubit_est", r.E_qubit_tab_pJ);
    get("kappa_o", r.kappa_o);
    get("kappa_o_i", r.kappa_oi);
    get("kappa_mu", r.kappa_mu);
    get("kappa_mu_e", r.kappa_mue);
    get("gamma_m", r.gamma_m);
    get("omega_o", r.omega_o_THz);
    get("eta_em", r.eta_em);
    std::optional<double> scale;
    get("g_om_scale", scale);
    if (scale) {
      r.g_om_scale = *scale;
      if (*scale != 1.0) r.assumption_derived = true;
    }
    if (r.eta_em) r.assumption_derived = true;
    recompute_row(r, threshold);
    rep.rows.push_back(std::move(r));
  }
  return rep;
}

ComparisonReport ingest_comparison(const std::filesystem::path& csv, double threshold) {
  std::ifstream probe(csv);
  if (!probe) throw ValidationError("comparison table not found: " + csv.string());
  std::ostringstream os;
  os << probe.rdbuf();
  return ingest_comparison_text(os.str(), threshold);
}

nlohmann::json ComparisonReport::to_json() const {
  const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_j.push_back({{"label", r.label},
                      {"type", r.type},
                      {"g_om_over_2pi_MHz", opt(r.g_om_MHz)},
                      {"g_em_over_2pi_MHz", opt(r.g_em_MHz)},
                      {"C_em_tabulated", opt(r.C_em_tab)},
                      {"E_qubit_tabulated_pJ", opt(r.E_qubit_tab_pJ)},
                      {"C_em_recomputed", opt(r.C_em)},
                      {"E_qubit_recomputed_pJ", opt(r.E_qubit_pJ)},
                      {"assumption_derived", r.assumption_derived},
                      {"incomputable", r.incomputable},
                      {"C_em_deviates", r.C_em_deviates},
                      {"E_qubit_deviates", r.E_qubit_deviates}});
  }
  return {{"schema", "phonox.comparison/1"}, {"deviation_threshold", threshold}, {"rows", rows_j}};
}

std::string ComparisonReport::text_table() const {
  const auto f = [](const std::optional<double>& v, bool paren = false) {
    if (!v) return std::string("-");
    char b[32];
    std::snprintf(b, sizeof(b), paren ? "(%.3g)" : "%.3g", *v);
    return std::string(b);
  };
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %-22s %8s %8s %8s %8s %9s %9s  %s\n", "label", "type", "g_om/MHz",
                "g_em/MHz", "C_em tab", "C_em new", "E_q tab", "E_q new", "flags");
  os << line;
  for (const auto& r : rows) {
    std::string flags;
    if (r.assumption_derived) flags += "assumed ";
    if (r.C_em_deviates) flags += "C_em>20% ";
    if (r.E_qubit_deviates) flags += "E_qubit>20% ";
    if (!r.C_em && !r.E_qubit_pJ) flags += "incomputable";
    std::snprintf(line, sizeof(line), "%-28s %-22s %8s %8s %8s %8s %9s %9s  %s\n", r.label.c_str(), r.type.c_str(),
                  f(r.g_om_MHz).c_str(), f(r.g_em_MHz).c_str(), f(r.C_em_tab).c_str(), f(r.C_em).c_str(),
                  f(r.E_qubit_tab_pJ, r.assumption_derived && !r.E_qubit_pJ).c_str(), f(r.E_qubit_pJ).c_str(),
                  flags.c_str());
    os << line;
  }
  return os.str();
}

}  // namespace phonox
