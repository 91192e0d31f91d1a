#include "phonox/coupling.hpp"

#include "phonox/bands.hpp"
#include "phonox/constants.hpp"
#include "phonox/error.hpp"
#include "phonox/structures.hpp"

#include <cmath>

namespace phonox {

std::string to_string(Propagation p) { return p == Propagation::co ? "co" : "counter"; }

namespace {

constexpr double kGauss = 0.57735026918962576451;
constexpr std::array<double, 2> kGp{-kGauss, kGauss};

void require_same_nodes(const Grid2D& a, const Grid2D& b) {
  for (int ax = 0; ax < 2; ++ax) {
    const auto& x = a.axis(ax).nodes;
    const auto& y = b.axis(ax).nodes;
    if (x.size() != y.size()) throw ValidationError("coupling: optical and mechanical grids differ");
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::abs(x[i] - y[i]) > 1e-9 * std::max(1e-12, std::abs(x.back() - x.front())))
        throw ValidationError("coupling: optical and mechanical grids differ");
  }
  if (a.physical_axes() != b.physical_axes()) throw ValidationError("coupling: grid axes differ");
}

double cell_area(const Grid2D& g, int c) {
  const int i = c % g.cells(0), j = c / g.cells(0);
  return (g.coord(0, i + 1) - g.coord(0, i)) * (g.coord(1, j + 1) - g.coord(1, j));
}

// Field component c of a mode interpolated at local coordinates of a cell.
cplx interp(const ModeField& m, int cell, double xi, double eta, int c) {
  std::array<double, 4> n, dxi, deta;
  q1_shape(xi, eta, n, dxi, deta);
  const auto nodes = m.grid->cell_nodes(cell);
  cplx v = 0.0;
  for (int a = 0; a < 4; ++a) v += n[static_cast<std::size_t>(a)] * m.at(nodes[static_cast<std::size_t>(a)], c);
  return v;
}

// Optical scalar field and local permittivity component at a Gauss point.
double eps_pol(const MaterialMix& mix, int pol) { return mix.eps_optical(pol, pol); }

double optical_norm(const ModeField& opt) {
  const Grid2D& g = *opt.grid;
  double s = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) {
    const double e = eps_pol(cell_mix(g, c), opt.pol_axis);
    const double w = 0.25 * cell_area(g, c);
    for (double xi : kGp)
      for (double eta : kGp) s += e * std::norm(interp(opt, c, xi, eta, 0)) * w;
  }
  return s * g.out_of_plane_length();
}

double mechanical_norm(const ModeField& mech) {
  const Grid2D& g = *mech.grid;
  double s = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) {
    const double rho = cell_mix(g, c).density;
    if (rho == 0.0) continue;
    const double w = 0.25 * cell_area(g, c);
    for (double xi : kGp)
      for (double eta : kGp) {
        double u2 = 0.0;
        for (int q = 0; q < mech.ncomp; ++q) u2 += std::norm(interp(mech, c, xi, eta, q));
        s += rho * u2 * w;
      }
  }
  return s * g.out_of_plane_length();
}

Eigen::Matrix<cplx, 6, 1> strain_at(const ModeField& mech, int cell, double xi, double eta) {
  const auto grads = shape_gradients(*mech.grid, cell, xi, eta, mech.bloch.k_out);
  const auto nodes = mech.grid->cell_nodes(cell);
  Eigen::Matrix<cplx, 6, 1> s = Eigen::Matrix<cplx, 6, 1>::Zero();
  for (int a = 0; a < 4; ++a) {
    Eigen::Vector3cd u;
    for (int q = 0; q < 3; ++q) u(q) = mech.at(nodes[static_cast<std::size_t>(a)], q);
    s += strain_block(grads[static_cast<std::size_t>(a)]) * u;
  }
  return s;
}

// Point lookup: cell and local coordinates, optionally nudged along -normal
// so that the mechanical field is sampled on the solid side.
bool locate_point(const Grid2D& g, double p0, double p1, int& cell, double& xi, double& eta) {
  return g.locate(p0, p1, cell, xi, eta);
}

}  // namespace

InterfacePoint line_interface(double x0, int normal_sign, double eps_in, double eps_out) {
  InterfacePoint p;
  p.p0 = x0;
  p.p1 = 0.5;
  p.n0 = normal_sign >= 0 ? 1.0 : -1.0;
  p.n1 = 0.0;
  p.weight = 1.0;
  p.eps_in = eps_in;
  p.eps_out = eps_out;
  return p;
}

InterfaceSet cell_interfaces(const UnitCell& cell, double eps_in, double eps_out, int samples) {
  if (samples < 8) throw ValidationError("cell_interfaces: need at least 8 samples");
  const auto eff = effective_layers(cell);
  double total = 0.0, hx = 0.0, hy = 0.0, w = 0.0;
  for (const auto& e : eff) total += e.thickness;
  for (const auto& e : eff) {
    hx += e.hx * e.thickness / total;
    hy += e.hy * e.thickness / total;
    w += e.w * e.thickness / total;
  }
  InterfaceSet out;
  const double rx = 0.5 * hx, ry = 0.5 * hy;
  const double dt = constants::two_pi / samples;
  for (int s = 0; s < samples; ++s) {
    const double t = (s + 0.5) * dt;
    InterfacePoint p;
    p.p0 = rx * std::cos(t);
    p.p1 = ry * std::sin(t);
    if (std::abs(p.p1) >= 0.5 * w) continue;  // hole wider than the beam
    // Outward normal of the ellipse points into the hole's surroundings; the
    // solid lies outside the ellipse, so the material normal points inward.
    const double gx = std::cos(t) / rx, gy = std::sin(t) / ry;
    const double gn = std::hypot(gx, gy);
    p.n0 = -gx / gn;
    p.n1 = -gy / gn;
    p.weight = dt * std::hypot(rx * std::sin(t), ry * std::cos(t));
    p.eps_in = eps_in;
    p.eps_out = eps_out;
    out.push_back(p);
  }
  // Beam edges at y = +-w/2, sampled along x outside the hole.
  const int ne = samples / 4;
  const double a = cell.a;
  for (int side : {-1, 1}) {
    for (int s = 0; s < ne; ++s) {
      const double x = -0.5 * a + (s + 0.5) * a / ne;
      const double y = side * 0.5 * w;
      if ((x / rx) * (x / rx) + (y / ry) * (y / ry) < 1.0) continue;
      InterfacePoint p;
      p.p0 = x;
      p.p1 = y;
      p.n0 = 0.0;
      p.n1 = side;
      p.weight = a / ne;
      p.eps_in = eps_in;
      p.eps_out = eps_out;
      out.push_back(p);
    }
  }
  return out;
}

double zero_point_scale(const ModeField& mech) {
  const double wm = mech.omega.real();
  const double norm = mechanical_norm(mech);
  if (!(wm > 0.0) || !(norm > 0.0)) throw ValidationError("zero-point scale needs a mechanical mode with omega > 0");
  return std::sqrt(constants::hbar / (2.0 * wm * norm));
}

double boundary_shift_rate(const ModeField& opt, const InterfaceSet& interfaces) {
  if (interfaces.empty()) throw ValidationError("boundary_shift_rate: no interface points");
  if (opt.physics != Physics::optical) throw ValidationError("boundary_shift_rate: optical mode required");
  const Grid2D& g = *opt.grid;
  const auto phys = g.physical_axes();
  double num = 0.0;
  for (const auto& ip : interfaces) {
    int c;
    double xi, eta;
    if (!locate_point(g, ip.p0, ip.p1, c, xi, eta)) throw ValidationError("interface point outside the optical grid");
    const cplx e = interp(opt, c, xi, eta, 0);
    // Scalar field along pol_axis: split into parallel and normal parts.
    double npol = 0.0;
    if (phys[0] == opt.pol_axis) npol = ip.n0;
    if (phys[1] == opt.pol_axis) npol = ip.n1;
    const double e2 = std::norm(e);
    const double e_par2 = e2 * (1.0 - npol * npol);
    const double d_perp2 = ip.eps_in * ip.eps_in * e2 * npol * npol;  // D_perp from the inside value
    num += (( ip.eps_in - ip.eps_out) * e_par2 - (1.0 / ip.eps_in - 1.0 / ip.eps_out) * d_perp2) * ip.weight;
  }
  num *= g.out_of_plane_length();
  return -0.5 * opt.omega.real() * num / optical_norm(opt);
}

std::complex<double> moving_boundary_shift(const ModeField& opt, const ModeField& mech, const InterfaceSet& interfaces,
                                           Propagation prop) {
  if (interfaces.empty()) throw ValidationError("g_om_moving_boundary: missing interface normals");
  if (opt.physics != Physics::optical) throw ValidationError("g_om_moving_boundary: first field must be optical");
  require_same_nodes(*opt.grid, *mech.grid);
  const Grid2D& g = *opt.grid;
  const Grid2D& gm = *mech.grid;
  const auto phys = g.physical_axes();
  const double nudge = 1e-3 * g.min_spacing();
  cplx num = 0.0;
  for (const auto& ip : interfaces) {
    int c;
    double xi, eta;
    if (!locate_point(g, ip.p0, ip.p1, c, xi, eta)) throw ValidationError("interface point outside the grid");
    const cplx e = interp(opt, c, xi, eta, 0);
    int cm;
    double xm, em;
    if (!locate_point(gm, ip.p0 - nudge * ip.n0, ip.p1 - nudge * ip.n1, cm, xm, em))
      throw ValidationError("interface point outside the mechanical grid");
    const cplx un = std::conj(interp(mech, cm, xm, em, phys[0])) * ip.n0 +
                    std::conj(interp(mech, cm, xm, em, phys[1])) * ip.n1;
    double npol = 0.0;
    if (phys[0] == opt.pol_axis) npol = ip.n0;
    if (phys[1] == opt.pol_axis) npol = ip.n1;
    const cplx e2 = prop == Propagation::counter ? e * e : cplx(std::norm(e), 0.0);
    const cplx e_par2 = e2 * (1.0 - npol * npol);
    const cplx d_perp2 = ip.eps_in * ip.eps_in * e2 * npol * npol;
    num += un * ((ip.eps_in - ip.eps_out) * e_par2 - (1.0 / ip.eps_in - 1.0 / ip.eps_out) * d_perp2) * ip.weight;
  }
  num *= g.out_of_plane_length();
  return -0.5 * opt.omega.real() * num / optical_norm(opt);
}

Rate g_om_moving_boundary(const ModeField& opt, const ModeField& mech, const InterfaceSet& interfaces,
                          Propagation prop) {
  return {moving_boundary_shift(opt, mech, interfaces, prop) * zero_point_scale(mech)};
}

std::complex<double> photoelastic_shift(const ModeField& opt, const ModeField& mech, Propagation prop) {
  if (opt.physics != Physics::optical) throw ValidationError("g_om_photoelastic: first field must be optical");
  require_same_nodes(*opt.grid, *mech.grid);
  const Grid2D& g = *opt.grid;
  const Grid2D& gm = *mech.grid;
  const int q = opt.pol_axis;
  cplx num = 0.0;
  for (int c = 0; c < gm.cell_count(); ++c) {
    const MaterialMix mm = cell_mix(gm, c);
    if (mm.photoelastic.isZero()) continue;
    const Mat3& eps = mm.eps_optical;
    const double w = 0.25 * cell_area(gm, c);
    for (double xi : kGp)
      for (double eta : kGp) {
        const Eigen::Matrix<cplx, 6, 1> s = strain_at(mech, c, xi, eta).conjugate();
        const Eigen::Matrix<cplx, 6, 1> deta = mm.photoelastic.cast<cplx>() * s;  // delta(eps^-1), Voigt
        Eigen::Matrix3cd dinv;
        for (int I = 0; I < 6; ++I) {
          const auto pr = voigt_pair(I);
          dinv(pr[0], pr[1]) = deta(I);
          dinv(pr[1], pr[0]) = deta(I);
        }
        const Eigen::Matrix3cd deps = -eps.cast<cplx>() * dinv * eps.cast<cplx>();
        const cplx e = interp(opt, c, xi, eta, 0);
        const cplx e2 = prop == Propagation::counter ? e * e : cplx(std::norm(e), 0.0);
        num += deps(q, q) * e2 * w;
      }
  }
  num *= g.out_of_plane_length();
  return -0.5 * opt.omega.real() * num / optical_norm(opt);
}

Rate g_om_photoelastic(const ModeField& opt, const ModeField& mech, Propagation prop) {
  return {photoelastic_shift(opt, mech, prop) * zero_point_scale(mech)};
}

std::complex<double> cell_chain_sum(std::complex<double> per_cell, int n_cells, double a, double k_o, double k_m,
                                    Propagation prop) {
  if (n_cells < 1) throw ValidationError("cell_chain_sum: need at least one cell");
  const double dk = prop == Propagation::counter ? 2.0 * k_o - k_m : -k_m;
  std::complex<double> s = 0.0;
  for (int n = 0; n < n_cells; ++n) s += per_cell * std::polar(1.0, dk * n * a);
  return s;
}

std::complex<double> piezo_overlap(const ModeField& mech, const ElectrostaticSolution& es) {
  require_same_nodes(*mech.grid, *es.grid);
  const Grid2D& g = *mech.grid;
  cplx s = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) {
    const MaterialMix mm = cell_mix(g, c);
    if (mm.piezo.isZero()) continue;
    const double w = 0.25 * cell_area(g, c);
    for (double xi : kGp)
      for (double eta : kGp) {
        const Eigen::Vector3cd d = mm.piezo.cast<cplx>() * strain_at(mech, c, xi, eta);
        const Vec3 e = es.field(c, xi, eta);
        s += d.dot(e.cast<cplx>()) * w;  // e is real, so conj(e) = e
      }
  }
  return s * g.out_of_plane_length();
}

double g_em(const ModeField& mech, const ElectrostaticSolution& es, double C_idt, double C_mu, double omega_mu) {
  if (es.V0 == 0.0) throw ValidationError("g_em: static solution has V0 = 0");
  if (!(C_idt + C_mu > 0.0)) throw ValidationError("g_em: total capacitance must be positive");
  const double wm = mech.omega.real();
  const double um = 2.0 * wm * wm * mechanical_norm(mech);
  const double umu = 2.0 * (C_idt + C_mu) * es.V0 * es.V0;
  return std::sqrt(omega_mu * wm) / std::sqrt(um * umu) * std::abs(piezo_overlap(mech, es));
}

MicrowaveQuantities microwave_quantities(double C_idt, double C_mu, double omega_mu, double tan_delta) {
  if (!(C_idt > 0.0) || !(C_mu > 0.0) || !(omega_mu > 0.0))
    throw ValidationError("microwave_quantities: capacitances and frequency must be positive");
  if (!(tan_delta >= 0.0)) throw ValidationError("microwave_quantities: tan delta must be >= 0");
  MicrowaveQuantities q;
  q.Z_mu = 1.0 / (omega_mu * (C_idt + C_mu));
  q.kappa_ln = C_idt / (C_idt + C_mu) * omega_mu * tan_delta;
  return q;
}

std::optional<double> CouplingReport::g_om_total() const {
  if (!g_om_mb && !g_om_pe) return std::nullopt;
  cplx s = 0.0;
  if (g_om_mb) s += g_om_mb->value;
  if (g_om_pe) s += g_om_pe->value;
  return std::abs(s);
}

std::optional<double> CouplingReport::relative_phase() const {
  if (!g_om_mb || !g_om_pe || g_om_mb->magnitude() == 0.0 || g_om_pe->magnitude() == 0.0) return std::nullopt;
  return std::arg(g_om_pe->value / g_om_mb->value);
}

nlohmann::json CouplingReport::to_json() const {
  using constants::hertz;
  nlohmann::json j;
  j["schema"] = "phonox.coupling/1";
  j["propagation"] = to_string(propagation);
  j["units"] = {{"rates", "Hz (g/2pi)"}, {"capacitance", "F"}, {"impedance", "Ohm"}};
  if (g_om_mb) j["g_om_mb_over_2pi_Hz"] = hertz(g_om_mb->magnitude());
  if (g_om_pe) j["g_om_pe_over_2pi_Hz"] = hertz(g_om_pe->magnitude());
  if (auto t = g_om_total()) j["g_om_total_over_2pi_Hz"] = hertz(*t);
  if (auto p = relative_phase()) j["pe_mb_relative_phase_rad"] = *p;
  if (g_em) j["g_em_over_2pi_Hz"] = hertz(*g_em);
  if (C_idt) j["C_IDT_F"] = *C_idt;
  if (C_mu) j["C_mu_F"] = *C_mu;
  if (Z_mu) j["Z_mu_Ohm"] = *Z_mu;
  if (kappa_ln) j["kappa_mu_LN_over_2pi_Hz"] = hertz(*kappa_ln);
  if (f_m_hz) j["f_m_Hz"] = *f_m_hz;
  if (f_o_hz) j["f_o_Hz"] = *f_o_hz;
  j["notes"] = notes;
  return j;
}

CouplingReport unit_cell_coupling(const UnitCell& cell, const UnitCellCouplingOptions& opts) {
  BandOptions bo;
  bo.spacing = opts.spacing;
  bo.optical_extent = true;
  const double a = cell.a;
  auto mech_modes = cell_modes(cell, constants::pi / a, CellView::mechanical, 8, bo);
  const ModeField& mech = select_breathing_mode(mech_modes, opts.mech_target_hz);
  auto opt_modes = cell_modes(cell, constants::pi / (2.0 * a), CellView::optical, 1, bo);
  const ModeField& opt = opt_modes.front();
  const auto& m = opt.grid->material(0);
  const InterfaceSet ifs = cell_interfaces(cell, m.permittivity_optical(1, 1), 1.0);
  CouplingReport r;
  r.propagation = opts.propagation;
  r.g_om_mb = g_om_moving_boundary(opt, mech, ifs, opts.propagation);
  r.g_om_pe = g_om_photoelastic(opt, mech, opts.propagation);
  r.f_m_hz = mech.frequency_hz();
  r.f_o_hz = opt.frequency_hz();
  r.notes.push_back("top-view unit cell: mechanical " + std::to_string(mech.frequency_hz() / 1e9) +
                    " GHz at k=pi/a, optical " + std::to_string(opt.frequency_hz() / 1e12) + " THz at k=pi/(2a)");
  r.notes.push_back("photoelastic term uses the thickness-blended film tensor of the mechanical grid");
  return r;
}

namespace {

struct SideView {
  std::shared_ptr<Grid2D> grid;
  std::vector<ElectrodeGroup> groups;
};

SideView emc_side_view(const UnitCell& cell, const EmcCouplingOptions& o) {
  if (!cell.electrodes) throw ValidationError("emc_cell_coupling: cell has no electrodes");
  const auto eff = effective_layers(cell);
  const ElectrodeSpec& el = *cell.electrodes;
  const double a = cell.a;
  double film_top = 0.0;
  for (const auto& e : eff) film_top += e.thickness;
  const double el_top = film_top + el.thickness;
  const double air = 0.3e-6;
  const double h = o.spacing;
  GridAxis ax = GridAxis::uniform(-a, a, std::max(16, static_cast<int>(std::ceil(2.0 * a / h))), Boundary::periodic,
                                  Boundary::periodic);
  // z: graded substrate, uniform films and electrodes, graded air.
  std::vector<double> z;
  GridAxis sub = graded_axis(-o.substrate_depth, 0.0, 8.0 * h, h, Boundary::fixed, Boundary::free);
  z = sub.nodes;
  const int nf = std::max(4, static_cast<int>(std::ceil(el_top / h)));
  for (int i = 1; i <= nf; ++i) z.push_back(el_top * i / nf);
  GridAxis top = graded_axis(el_top, el_top + air, h, 6.0 * h, Boundary::free, Boundary::free);
  for (std::size_t i = 1; i < top.nodes.size(); ++i) z.push_back(top.nodes[i]);
  GridAxis az;
  az.nodes = z;
  az.lo = Boundary::fixed;
  az.hi = Boundary::free;
  auto g = std::make_shared<Grid2D>(std::move(ax), std::move(az), std::array<int, 2>{0, 2}, cell.w());
  const int sub_id = g->add_material(film_material("sapphire"));
  std::vector<int> ids;
  for (const auto& e : eff) ids.push_back(g->add_material(film_material(e.material)));
  const int el_id = g->add_material(film_material(el.material));
  const std::array<double, 2> holes{-0.5 * a, 0.5 * a};
  const std::array<double, 2> pads{0.0, a};
  g->paint(
      [&](double x, double zz) {
        if (zz < 0.0) return sub_id;
        double z0 = 0.0;
        for (std::size_t l = 0; l < eff.size(); ++l) {
          const double z1 = z0 + eff[l].thickness;
          if (zz < z1) {
            for (double xc : holes)
              if (std::abs(x - xc) < 0.5 * eff[l].hx) return -1;
            return ids[l];
          }
          z0 = z1;
        }
        if (zz < el_top)
          for (double xc : pads) {
            double d = std::abs(x - xc);
            d = std::min(d, std::abs(x - xc + 2.0 * a));
            if (d < 0.5 * el.width) return el_id;
          }
        return -1;
      },
      4);
  SideView sv;
  sv.grid = g;
  ElectrodeGroup plus{"plus", 0.5, {}}, minus{"minus", -0.5, {}};
  plus.boxes.push_back({-0.5 * el.width, 0.5 * el.width, film_top, el_top});
  minus.boxes.push_back({a - 0.5 * el.width, a, film_top, el_top});
  minus.boxes.push_back({-a, -a + 0.5 * el.width, film_top, el_top});
  sv.groups = {plus, minus};
  return sv;
}

}  // namespace

EmcCoupling emc_cell_coupling(const UnitCell& cell, const EmcCouplingOptions& opts) {
  const SideView sv = emc_side_view(cell, opts);
  const ElectrostaticSolution es = assemble_electrostatic(sv.grid, sv.groups).solve();
  const double C_idt = es.capacitance();
  BlochSpec b;
  const auto ops = assemble_elastic(sv.grid, b, nullptr, true);
  const double target = constants::angular(opts.target_hz);
  const auto modes = solve_modes(ops, opts.modes, target);
  EmcCoupling out;
  double best = -1.0;
  for (const auto& m : modes) {
    if (!(m.omega.real() > 0.0)) continue;
    const double wmu = opts.omega_mu > 0.0 ? opts.omega_mu : m.omega.real();
    const double g = g_em(m, es, C_idt, opts.C_mu, wmu);
    if (g > best) {
      best = g;
      out.frequency_hz = m.frequency_hz();
      out.report.f_m_hz = out.frequency_hz;
      out.report.g_em = g;
      const auto mq = microwave_quantities(C_idt, opts.C_mu, wmu, film_material("ln").loss_tangent);
      out.report.Z_mu = mq.Z_mu;
      out.report.kappa_ln = mq.kappa_ln;
    }
  }
  if (best < 0.0) throw NumericalError("emc_cell_coupling: no mechanical mode found");
  out.report.C_idt = C_idt;
  out.report.C_mu = opts.C_mu;
  out.report.notes.push_back("side view through the hole centre, two periods, alternating electrodes, open-circuit "
                             "piezoelectric modes; C_IDT of one electrode pair over the beam width");
  return out;
}

}  // namespace phonox
