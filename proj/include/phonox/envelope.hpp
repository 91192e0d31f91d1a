#pragma once

#include "phonox/geometry.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace phonox {

enum class Chain { mechanical, optical };
std::string to_string(Chain c);

/// Local X-point band of one cell. Near the band edge
/// omega(k) = omega_x + tau * (k a - pi)^2, so tau > 0 for a band minimum.
struct LocalBand {
  double omega_x = 0.0;    // rad/s
  double tau = 0.0;        // rad/s
  double gamma = 0.0;      // rad/s, energy decay rate of the local Bloch mode
  double g_om_uc = 0.0;    // rad/s, unit-cell optomechanical rate (mechanical chain)
  double g_em_cell = 0.0;  // rad/s, single-cell electromechanical rate (mechanical chain)
};

/// Source of per-cell band data for the envelope chain.
class BandSource {
 public:
  virtual ~BandSource() = default;
  virtual std::optional<LocalBand> band(const UnitCell& cell, Chain chain) const = 0;
  virtual std::string name() const = 0;
  /// True when the loss entries are estimates rather than computed leakage.
  virtual bool heuristic_loss() const { return true; }
};

/// Anchor table: band data of each role's defining cell plus linear
/// geometric sensitivities. Cells inside a transition blend the two endpoint
/// predictions with the cell's smooth-step weight.
class AnchorBandTable : public BandSource {
 public:
  struct Sensitivity {
    double a = 0.0, hx = 0.0, hy = 0.0, w = 0.0;  // d omega_x / d p, rad/s per m
    double tau_a = 0.0, tau_hy = 0.0;             // relative d tau / d p, 1/m
  };
  struct Reference {
    double a = 0.0, hx = 0.0, hy = 0.0, w = 0.0;
  };
  struct Anchor {
    Reference ref;
    LocalBand mechanical;
    LocalBand optical;
  };

  static AnchorBandTable from_json(const nlohmann::json& j);
  static AnchorBandTable load(const std::string& path);
  /// data/bands/default_band_table.json
  static const AnchorBandTable& default_table();

  std::optional<LocalBand> band(const UnitCell& cell, Chain chain) const override;
  std::string name() const override { return name_; }

  bool has_role(const std::string& role) const { return anchors_.count(role) > 0; }
  const Anchor& anchor(const std::string& role) const;
  void set_anchor(const std::string& role, const Anchor& a) { anchors_[role] = a; }
  const Sensitivity& sensitivity(Chain c) const { return c == Chain::mechanical ? mech_sens_ : opt_sens_; }

 private:
  std::optional<LocalBand> predict(const std::string& role, const UnitCell& cell, Chain chain) const;

  std::string name_ = "anchor-table";
  std::map<std::string, Anchor> anchors_;
  Sensitivity mech_sens_, opt_sens_;
};

/// Band data from the top-view finite-element cell solver: X-point mode and
/// curvature from a second solve at k = (1 - dk) pi/a. Coupling rates are not
/// computed here and stay zero.
class SolverBandSource : public BandSource {
 public:
  explicit SolverBandSource(double dk = 0.1) : dk_(dk) {}
  std::optional<LocalBand> band(const UnitCell& cell, Chain chain) const override;
  std::string name() const override { return "fe-top-view"; }

 private:
  double dk_;
  mutable std::map<std::string, LocalBand> cache_;
};

/// Tight-binding chain along the beam. H has diagonal `onsite` and
/// off-diagonal -hopping; losses enter as -i gamma/2 on the diagonal.
struct EnvelopeModel {
  Chain chain = Chain::mechanical;
  std::vector<double> band_edge;  // omega_x per cell, rad/s
  std::vector<double> onsite;     // H_nn (band edge plus adjacent hopping), rad/s
  std::vector<double> hopping;    // bond n <-> n+1; one extra closing bond for rings
  std::vector<double> loss;       // gamma_n >= 0
  std::vector<std::string> tags;
  std::vector<std::string> regions;
  std::vector<double> period;      // a_n, m
  std::vector<double> g_om_uc;     // rad/s
  std::vector<double> g_em_cell;   // rad/s
  std::vector<double> defect_weight;  // share of "omc_defect" in each cell's band data
  bool ring = false;
  bool heuristic_loss = true;
  /// Phase advance of the carrier per cell (pi for X-point bands).
  double carrier = 3.141592653589793;

  int size() const { return static_cast<int>(onsite.size()); }
  void validate() const;
  Eigen::MatrixXcd hamiltonian() const;
};

/// N identical cells with hard walls (or closed into a ring).
EnvelopeModel uniform_chain(int n, double omega_x, double tau, double gamma = 0.0, bool ring = false,
                            const std::string& tag = "OMC");

/// Chain for the flattened layout. Throws ValidationError naming the first
/// cell without band data.
EnvelopeModel build_envelope(const std::vector<DeviceLayout::Cell>& cells, const BandSource& bands, Chain chain);
EnvelopeModel build_envelope(const DeviceLayout& layout, const BandSource& bands, Chain chain);

struct CavityMode {
  std::complex<double> omega;
  Eigen::VectorXcd envelope;
  std::map<std::string, double> participations;  // by region tag
  double carrier = 3.141592653589793;

  double frequency_hz() const;
  double q() const;
};

/// Eigenmodes of the chain sorted by Re omega. With n_modes > 0 only the
/// n_modes nearest `target` (rad/s, default: lowest) are returned.
/// Envelopes have unit norm and a real positive largest component.
std::vector<CavityMode> cavity_spectrum(const EnvelopeModel& model, int n_modes = 0,
                                        std::optional<double> target = std::nullopt);

struct AntiCrossing {
  double omega_plus = 0.0, omega_minus = 0.0;
  // Participation of bare mode 1 in the upper and lower hybrid; bare mode 2
  // carries the complement.
  double p1_plus = 0.0, p1_minus = 0.0;
};
AntiCrossing anti_crossing(double omega1, double omega2, double g);
/// |Delta| at which the minority bare-mode participation of a hybrid equals p (0 < p <= 1/2).
double detuning_for_participation(double g, double p);

/// Dominant |k| in [0, pi/a] of envelope_n * exp(i carrier n), from a
/// zero-padded DFT.
double fourier_mode(const CavityMode& mode, double a);
double fourier_peak(const Eigen::VectorXcd& samples, double a, int pad_factor = 64);

/// Decay constant per cell of a bound state at omega below a band with edge
/// term (onsite - omega) = 2 tau cosh(kappa).
double bound_state_decay(double onsite_minus_omega, double tau);

/// Fraction of |envelope|^2 on cells whose band data stem from the OMC defect.
double defect_participation(const EnvelopeModel& model, const CavityMode& mode);

/// Zero-point optomechanical rate of a mechanical chain mode with an optical
/// chain mode: |sum_n g_om_uc,n conj(psi_n) |phi_n|^2| (phase matching of the
/// unit-cell rate assumed).
double mode_g_om(const EnvelopeModel& mech, const CavityMode& m, const CavityMode& o);
/// |sum_n g_em_cell,n psi_n|.
double mode_g_em(const EnvelopeModel& mech, const CavityMode& m);

/// Optical mode of interest: the most confined (largest inverse participation)
/// among modes near the OMC defect band edge.
CavityMode fundamental_optical_mode(const EnvelopeModel& optical);

struct TransducerModes {
  EnvelopeModel mech, opt;
  std::vector<CavityMode> mech_modes;
  CavityMode optical;
  std::vector<double> g_om, g_em;  // per mechanical mode
  int best_g_om = -1;              // index of the highest-g_om mechanical mode
};
struct TransducerModeOptions {
  int mech_modes = 12;
  double mech_target = 0.0;  // rad/s; 0 = OMC defect band edge plus its hopping
};
TransducerModes transducer_modes(const std::vector<DeviceLayout::Cell>& cells, const BandSource& bands,
                                 const TransducerModeOptions& opts = {});

struct EmcSweepOptions {
  int modes = 8;
  /// Bonds touching cells with this tag are cut (zero hopping); empty = none.
  std::string cut_tag;
};
struct EmcSweepRow {
  double scale = 1.0;
  int mode = 0;
  std::complex<double> omega;
  std::map<std::string, double> participations;
  double g_om = 0.0, g_em = 0.0;
};
struct EmcSweep {
  std::vector<double> scales;
  std::vector<EmcSweepRow> rows;
  // Per scale: the hybrid with the largest g_om * g_em.
  std::vector<int> hybrid_row;
  double crossing_scale = 1.0;
  double half_width = 0.0;  // relative scale offset where hybrid g_em halves (0 if not reached)
  bool heuristic_loss = true;
};
/// Scales the period of every EMC-defect cell (and so the interpolated
/// neighbours) and records hybrid frequencies, participations and rates.
EmcSweep emc_period_sweep(const DeviceLayout& layout, const std::vector<double>& scales, const BandSource& bands,
                          const EmcSweepOptions& opts = {});
/// Layout with every EMC-defect cell's period multiplied by s.
DeviceLayout scale_emc_period(const DeviceLayout& layout, double s);

}  // namespace phonox
