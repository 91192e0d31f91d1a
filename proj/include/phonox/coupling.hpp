#pragma once

#include "phonox/assemble.hpp"
#include "phonox/eigensolve.hpp"
#include "phonox/geometry.hpp"

#include <json.hpp>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace phonox {

enum class Propagation { co, counter };
std::string to_string(Propagation p);

/// Quadrature point on a material interface in grid-plane coordinates. The
/// normal points from the "inside" material into the "outside" one; weight is
/// the in-plane length element (the out-of-plane length is applied separately).
struct InterfacePoint {
  double p0 = 0.0, p1 = 0.0;
  double n0 = 0.0, n1 = 0.0;
  double weight = 0.0;
  double eps_in = 1.0, eps_out = 1.0;  // relative optical permittivity
};
using InterfaceSet = std::vector<InterfacePoint>;

/// Flat interface at grid coordinate p0 = x0 of a laterally invariant line
/// grid (lateral width 1), normal +1 or -1 along axis 0.
InterfacePoint line_interface(double x0, int normal_sign, double eps_in, double eps_out);

/// Top-view unit cell: elliptical hole of the mean film geometry plus the two
/// beam edges, sampled with `samples` points on the ellipse.
InterfaceSet cell_interfaces(const UnitCell& cell, double eps_in, double eps_out = 1.0, int samples = 720);

/// Complex rate with both the signed value (fixed global phase convention) and
/// the magnitude. Units rad/s.
struct Rate {
  std::complex<double> value{0.0, 0.0};
  double magnitude() const { return std::abs(value); }
};

/// Frequency shift per unit outward displacement of every interface point,
/// d omega / d delta = -(omega/2) sum (Deps |E_par|^2 - D(1/eps) |D_perp|^2) dA / int eps |E|^2 dV.
double boundary_shift_rate(const ModeField& opt, const InterfaceSet& interfaces);

/// Moving-boundary g_om. The mechanical field is normalized by
/// sqrt(hbar / (2 omega_m int rho |u|^2)); counter-propagation uses E^2 in
/// place of |E|^2. Throws when the interface set is empty or the grids differ.
Rate g_om_moving_boundary(const ModeField& opt, const ModeField& mech, const InterfaceSet& interfaces,
                          Propagation prop = Propagation::counter);

/// Photoelastic g_om from the strain of the mechanical field and the
/// photoelastic tensors of the mechanical grid's materials.
Rate g_om_photoelastic(const ModeField& opt, const ModeField& mech, Propagation prop = Propagation::counter);

/// Shift of the optical frequency caused by a prescribed displacement field
/// (no zero-point normalization): photoelastic part.
std::complex<double> photoelastic_shift(const ModeField& opt, const ModeField& mech, Propagation prop);
std::complex<double> moving_boundary_shift(const ModeField& opt, const ModeField& mech, const InterfaceSet& interfaces,
                                           Propagation prop);

/// Zero-point normalization sqrt(hbar / (2 omega_m int rho |u|^2 dV)) of a mechanical field.
double zero_point_scale(const ModeField& mech);

/// Sum of unit-cell contributions over n_cells cells for Bloch fields with
/// optical k_o and mechanical k_m: counter uses exp(i (2 k_o - k_m) n a), co
/// uses exp(-i k_m n a).
std::complex<double> cell_chain_sum(std::complex<double> per_cell, int n_cells, double a, double k_o, double k_m,
                                    Propagation prop);

/// int d_m' . conj(e') dV with d_m' = e_piezo S(u') from the mechanical grid
/// materials and e' = -grad phi of the static solution.
std::complex<double> piezo_overlap(const ModeField& mech, const ElectrostaticSolution& estatic);

/// g_em = sqrt(omega_mu omega_m) / sqrt(U_m' U_mu') |int d_m' . e'* dV| with
/// U_m' = 2 omega_m^2 int rho |u'|^2 and U_mu' = 2 (C_IDT + C_mu) V0^2.
double g_em(const ModeField& mech, const ElectrostaticSolution& estatic, double C_idt, double C_mu, double omega_mu);

struct MicrowaveQuantities {
  double Z_mu = 0.0;      // Ohm
  double kappa_ln = 0.0;  // rad/s
};
MicrowaveQuantities microwave_quantities(double C_idt, double C_mu, double omega_mu, double tan_delta);

struct CouplingReport {
  std::optional<Rate> g_om_mb, g_om_pe;
  std::optional<double> g_em;
  std::optional<double> C_idt, C_mu, Z_mu, kappa_ln;
  std::optional<double> f_m_hz, f_o_hz;  // frequencies of the modes entering the rates
  Propagation propagation = Propagation::counter;
  std::vector<std::string> notes;

  /// |g_mb + g_pe| under the common phase convention.
  std::optional<double> g_om_total() const;
  /// Phase of g_pe relative to g_mb, radians.
  std::optional<double> relative_phase() const;
  nlohmann::json to_json() const;
};

/// Unit-cell g_om of a top-view cell: mechanical breathing mode at k = pi/a
/// and fundamental optical mode at k = pi/(2a) on grids with identical nodes.
struct UnitCellCouplingOptions {
  double spacing = 15e-9;
  double mech_target_hz = 5e9;
  Propagation propagation = Propagation::counter;
};
CouplingReport unit_cell_coupling(const UnitCell& cell, const UnitCellCouplingOptions& opts = {});

/// Side view (x, z) through the hole centre of an electrode-bearing cell:
/// two periods with alternating electrode polarity on a sapphire half-space.
/// The piezoelectric mode with the largest g_em near the target is reported
/// together with C_IDT of the electrode set scaled to the cell's electrode count.
struct EmcCouplingOptions {
  double C_mu = 70e-15;
  double omega_mu = 0.0;         // 0: use the mechanical frequency
  double spacing = 10e-9;
  double substrate_depth = 1.2e-6;
  double target_hz = 5e9;
  int modes = 10;
};
struct EmcCoupling {
  CouplingReport report;
  double frequency_hz = 0.0;
};
EmcCoupling emc_cell_coupling(const UnitCell& cell, const EmcCouplingOptions& opts = {});

}  // namespace phonox
