#include "phonox/assemble.hpp"

#include "phonox/constants.hpp"
#include "phonox/error.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace phonox {

namespace {

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)
constexpr std::array<double, 2> kGp{-kGauss, kGauss};

using Trip = Eigen::Triplet<cplx>;

bool fixed_on(const GridAxis& ax, int i) {
  const int last = static_cast<int>(ax.nodes.size()) - 1;
  return (i == 0 && ax.lo == Boundary::fixed) || (i == last && ax.hi == Boundary::fixed);
}

// Master node and Bloch factor for every node.
void periodic_images(const Grid2D& g, const BlochSpec& b, std::vector<int>& master, std::vector<cplx>& phase) {
  const int n0 = g.nodes(0), n1 = g.nodes(1);
  master.resize(static_cast<std::size_t>(g.node_count()));
  phase.assign(static_cast<std::size_t>(g.node_count()), cplx(1.0, 0.0));
  const bool per0 = g.axis(0).lo == Boundary::periodic;
  const bool per1 = g.axis(1).lo == Boundary::periodic;
  const cplx f0 = std::exp(cplx(0.0, b.k_in[0] * g.axis(0).length()));
  const cplx f1 = std::exp(cplx(0.0, b.k_in[1] * g.axis(1).length()));
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i) {
      int mi = i, mj = j;
      cplx ph(1.0, 0.0);
      if (per0 && i == n0 - 1) {
        mi = 0;
        ph *= f0;
      }
      if (per1 && j == n1 - 1) {
        mj = 0;
        ph *= f1;
      }
      master[static_cast<std::size_t>(g.node(i, j))] = g.node(mi, mj);
      phase[static_cast<std::size_t>(g.node(i, j))] = ph;
    }
}

bool node_fixed(const Grid2D& g, int n) {
  const int i = n % g.nodes(0), j = n / g.nodes(0);
  return fixed_on(g.axis(0), i) || fixed_on(g.axis(1), j);
}

DofMap build_dofs(const Grid2D& g, const BlochSpec& b, int ncomp, bool solid_only, bool potential) {
  DofMap d;
  d.ncomp = ncomp;
  periodic_images(g, b, d.master, d.phase);
  const int nn = g.node_count();
  std::vector<char> active(static_cast<std::size_t>(nn), 0), fixed(static_cast<std::size_t>(nn), 0);
  for (int n = 0; n < nn; ++n) {
    const auto m = static_cast<std::size_t>(d.master[static_cast<std::size_t>(n)]);
    bool act = !solid_only;
    if (solid_only)
      for (int c : g.node_cells(n)) act = act || g.cell_is_solid(c);
    if (act) active[m] = 1;
    if (node_fixed(g, n)) fixed[m] = 1;
  }
  d.field_dof.assign(static_cast<std::size_t>(nn * ncomp), -1);
  int next = 0;
  for (int n = 0; n < nn; ++n) {
    if (d.master[static_cast<std::size_t>(n)] != n) continue;
    if (!active[static_cast<std::size_t>(n)] || fixed[static_cast<std::size_t>(n)]) continue;
    for (int c = 0; c < ncomp; ++c) d.field_dof[static_cast<std::size_t>(n * ncomp + c)] = next++;
  }
  d.n_field = next;
  d.potential_dof.assign(static_cast<std::size_t>(nn), -1);
  if (potential) {
    bool any_fixed = false;
    for (int n = 0; n < nn; ++n) {
      if (d.master[static_cast<std::size_t>(n)] != n) continue;
      if (fixed[static_cast<std::size_t>(n)]) {
        any_fixed = true;
        continue;
      }
      d.potential_dof[static_cast<std::size_t>(n)] = next++;
    }
    // a pure Neumann problem at zero Bloch phase has a constant null space: ground one node
    bool trivial_phase = b.k_out == 0.0;
    for (const auto& p : d.phase) trivial_phase = trivial_phase && std::abs(p - cplx(1.0, 0.0)) < 1e-14;
    if (!any_fixed && trivial_phase) {
      d.potential_dof[0] = -1;
      next = d.n_field;
      for (int n = 0; n < nn; ++n)
        if (d.potential_dof[static_cast<std::size_t>(n)] >= 0) d.potential_dof[static_cast<std::size_t>(n)] = next++;
    }
    d.n_potential = next - d.n_field;
  }
  return d;
}

double cell_pml(const Grid2D& g, int cell, double xi, double eta, const PMLProfile* pml) {
  if (pml == nullptr) return 0.0;
  const int i = cell % g.cells(0), j = cell / g.cells(0);
  const double p0 = 0.5 * (g.coord(0, i) + g.coord(0, i + 1)) + 0.5 * xi * (g.coord(0, i + 1) - g.coord(0, i));
  const double p1 = 0.5 * (g.coord(1, j) + g.coord(1, j + 1)) + 0.5 * eta * (g.coord(1, j + 1) - g.coord(1, j));
  return pml_value(pml->distance(p0, p1), *pml);
}

double cell_jacobian(const Grid2D& g, int cell) {
  const int i = cell % g.cells(0), j = cell / g.cells(0);
  return 0.25 * (g.coord(0, i + 1) - g.coord(0, i)) * (g.coord(1, j + 1) - g.coord(1, j));
}

}  // namespace

MaterialMix cell_mix(const Grid2D& g, int cell) {
  const CellMaterial& cm = g.cell_material(cell);
  MaterialMix mix;
  mix.eps_static.setZero();
  mix.eps_optical.setZero();
  const auto add = [&](int id, double f) {
    if (f <= 0.0) return;
    if (id < 0) {
      mix.eps_static += f * constants::eps0 * Mat3::Identity();
      mix.eps_optical += f * Mat3::Identity();
      return;
    }
    const MaterialRecord& m = g.material(id);
    mix.stiffness += f * m.stiffness;
    mix.piezo += f * m.piezo;
    mix.eps_static += f * m.permittivity_static;
    mix.eps_optical += f * m.permittivity_optical;
    mix.photoelastic += f * m.photoelastic;
    mix.density += f * m.density;
    mix.solid_fraction += f;
  };
  if (cm.a == cm.b) {
    add(cm.a, 1.0);
  } else {
    add(cm.a, cm.frac_a);
    add(cm.b, 1.0 - cm.frac_a);
  }
  return mix;
}

Eigen::Matrix<cplx, 6, 3> strain_block(const Eigen::Vector3cd& g) {
  Eigen::Matrix<cplx, 6, 3> b = Eigen::Matrix<cplx, 6, 3>::Zero();
  b(0, 0) = g(0);
  b(1, 1) = g(1);
  b(2, 2) = g(2);
  b(3, 1) = g(2);
  b(3, 2) = g(1);
  b(4, 0) = g(2);
  b(4, 2) = g(0);
  b(5, 0) = g(1);
  b(5, 1) = g(0);
  return b;
}

std::array<Eigen::Vector3cd, 4> shape_gradients(const Grid2D& g, int cell, double xi, double eta, double k_out,
                                                std::array<double, 4>* values) {
  const int i = cell % g.cells(0), j = cell / g.cells(0);
  const double h0 = g.coord(0, i + 1) - g.coord(0, i);
  const double h1 = g.coord(1, j + 1) - g.coord(1, j);
  std::array<double, 4> n, dxi, deta;
  q1_shape(xi, eta, n, dxi, deta);
  const auto phys = g.physical_axes();
  const int nrm = g.normal_axis();
  std::array<Eigen::Vector3cd, 4> out;
  for (int a = 0; a < 4; ++a) {
    Eigen::Vector3cd v = Eigen::Vector3cd::Zero();
    v(phys[0]) = 2.0 * dxi[static_cast<std::size_t>(a)] / h0;
    v(phys[1]) = 2.0 * deta[static_cast<std::size_t>(a)] / h1;
    v(nrm) = cplx(0.0, k_out * n[static_cast<std::size_t>(a)]);
    out[static_cast<std::size_t>(a)] = v;
  }
  if (values != nullptr) *values = n;
  return out;
}

OperatorPair assemble_elastic(std::shared_ptr<const Grid2D> grid, const BlochSpec& bloch, const PMLProfile* pml,
                              bool include_piezo) {
  if (!grid) throw ValidationError("assemble_elastic: null grid");
  if (pml != nullptr) pml->validate();
  const Grid2D& g = *grid;
  bool piezo = false;
  if (include_piezo)
    for (const auto& m : g.materials()) piezo = piezo || m.is_piezoelectric();

  OperatorPair ops;
  ops.physics = piezo ? Physics::piezo : Physics::elastic;
  ops.grid = grid;
  ops.bloch = bloch;
  ops.has_pml = pml != nullptr && pml->A > 0.0;
  ops.dofs = build_dofs(g, bloch, 3, true, piezo);
  const DofMap& d = ops.dofs;
  const double L = g.out_of_plane_length();

  std::vector<Trip> kt, mt;
  kt.reserve(static_cast<std::size_t>(g.cell_count()) * (piezo ? 256 : 144));
  mt.reserve(static_cast<std::size_t>(g.cell_count()) * 48);

  for (int c = 0; c < g.cell_count(); ++c) {
    const MaterialMix mix = cell_mix(g, c);
    const bool solid = mix.solid_fraction > 0.0;
    const bool has_e = piezo && mix.piezo.cwiseAbs().maxCoeff() > 0.0;
    if (!solid && !piezo) continue;
    if (piezo) {
      Eigen::LLT<Mat3> llt(mix.eps_static);
      if (llt.info() != Eigen::Success) throw ValidationError("assemble_elastic: singular static permittivity");
    }
    const auto nodes = g.cell_nodes(c);
    std::array<int, 4> mnode;
    std::array<cplx, 4> ph;
    for (int a = 0; a < 4; ++a) {
      mnode[static_cast<std::size_t>(a)] = d.master[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)])];
      ph[static_cast<std::size_t>(a)] = d.phase[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)])];
    }
    Eigen::Matrix<cplx, 12, 12> ke = Eigen::Matrix<cplx, 12, 12>::Zero();
    Eigen::Matrix<cplx, 12, 4> kup = Eigen::Matrix<cplx, 12, 4>::Zero();
    Eigen::Matrix<cplx, 4, 4> kpp = Eigen::Matrix<cplx, 4, 4>::Zero();
    Eigen::Matrix<cplx, 4, 4> me = Eigen::Matrix<cplx, 4, 4>::Zero();
    const double jac = cell_jacobian(g, c) * L;
    for (double xi : kGp)
      for (double eta : kGp) {
        std::array<double, 4> nv;
        const auto grad = shape_gradients(g, c, xi, eta, bloch.k_out, &nv);
        if (solid) {
          std::array<Eigen::Matrix<cplx, 6, 3>, 4> b;
          for (int a = 0; a < 4; ++a) b[static_cast<std::size_t>(a)] = strain_block(grad[static_cast<std::size_t>(a)]);
          for (int a = 0; a < 4; ++a) {
            const Eigen::Matrix<cplx, 3, 6> bh = b[static_cast<std::size_t>(a)].adjoint();
            const Eigen::Matrix<cplx, 3, 6> bhc = bh * mix.stiffness.cast<cplx>();
            for (int q = 0; q < 4; ++q) ke.block<3, 3>(3 * a, 3 * q) += jac * bhc * b[static_cast<std::size_t>(q)];
            if (has_e) {
              const Eigen::Matrix<cplx, 3, 3> bhe = bh * mix.piezo.transpose().cast<cplx>();
              for (int q = 0; q < 4; ++q) kup.block<3, 1>(3 * a, q) += jac * bhe * grad[static_cast<std::size_t>(q)];
            }
          }
          const double f = pml != nullptr && pml->target == PmlTarget::mechanical ? cell_pml(g, c, xi, eta, pml) : 0.0;
          const cplx rho = mix.density * cplx(1.0, f);
          for (int a = 0; a < 4; ++a)
            for (int q = 0; q < 4; ++q)
              me(a, q) += jac * rho * nv[static_cast<std::size_t>(a)] * nv[static_cast<std::size_t>(q)];
        }
        if (piezo) {
          for (int a = 0; a < 4; ++a)
            for (int q = 0; q < 4; ++q)
              kpp(a, q) += jac * grad[static_cast<std::size_t>(a)].dot(mix.eps_static.cast<cplx>() * grad[static_cast<std::size_t>(q)]);
        }
      }
    for (int a = 0; a < 4; ++a) {
      const cplx pa = std::conj(ph[static_cast<std::size_t>(a)]);
      for (int q = 0; q < 4; ++q) {
        const cplx pq = ph[static_cast<std::size_t>(q)];
        const cplx w = pa * pq;
        for (int ca = 0; ca < 3; ++ca) {
          const int ra = d.field_dof[static_cast<std::size_t>(mnode[static_cast<std::size_t>(a)] * 3 + ca)];
          if (ra < 0) continue;
          for (int cq = 0; cq < 3; ++cq) {
            const int rq = d.field_dof[static_cast<std::size_t>(mnode[static_cast<std::size_t>(q)] * 3 + cq)];
            if (rq < 0) continue;
            if (solid) kt.emplace_back(ra, rq, w * ke(3 * a + ca, 3 * q + cq));
            if (solid && ca == cq) mt.emplace_back(ra, rq, w * me(a, q));
          }
          if (has_e) {
            const int pq_dof = d.potential_dof[static_cast<std::size_t>(mnode[static_cast<std::size_t>(q)])];
            if (pq_dof >= 0) {
              const cplx v = w * kup(3 * a + ca, q);
              kt.emplace_back(ra, pq_dof, v);
              kt.emplace_back(pq_dof, ra, std::conj(v));
            }
          }
        }
        if (piezo) {
          const int pa_dof = d.potential_dof[static_cast<std::size_t>(mnode[static_cast<std::size_t>(a)])];
          const int pq_dof = d.potential_dof[static_cast<std::size_t>(mnode[static_cast<std::size_t>(q)])];
          if (pa_dof >= 0 && pq_dof >= 0) kt.emplace_back(pa_dof, pq_dof, -w * kpp(a, q));
        }
      }
    }
  }
  const int n = d.size();
  if (n == 0) throw ValidationError("assemble_elastic: no active degrees of freedom");
  ops.K.resize(n, n);
  ops.M.resize(n, n);
  ops.K.setFromTriplets(kt.begin(), kt.end());
  ops.M.setFromTriplets(mt.begin(), mt.end());
  ops.K.makeCompressed();
  ops.M.makeCompressed();
  return ops;
}

OperatorPair assemble_optical(std::shared_ptr<const Grid2D> grid, const BlochSpec& bloch, int pol_axis,
                              const PMLProfile* pml, std::vector<std::string>* warnings) {
  if (!grid) throw ValidationError("assemble_optical: null grid");
  if (pml != nullptr) pml->validate();
  if (pol_axis < 0 || pol_axis > 2) throw ValidationError("assemble_optical: polarization axis must be 0, 1 or 2");
  const Grid2D& g = *grid;
  OperatorPair ops;
  ops.physics = Physics::optical;
  ops.grid = grid;
  ops.bloch = bloch;
  ops.pol_axis = pol_axis;
  ops.has_pml = pml != nullptr && pml->A > 0.0;
  ops.dofs = build_dofs(g, bloch, 1, false, false);
  const DofMap& d = ops.dofs;
  const double L = g.out_of_plane_length();
  const double inv_c2 = 1.0 / (constants::c0 * constants::c0);

  double n_max = 1.0;
  std::vector<Trip> kt, mt;
  kt.reserve(static_cast<std::size_t>(g.cell_count()) * 16);
  mt.reserve(static_cast<std::size_t>(g.cell_count()) * 16);
  for (int c = 0; c < g.cell_count(); ++c) {
    const MaterialMix mix = cell_mix(g, c);
    const double eps = mix.eps_optical(pol_axis, pol_axis);
    n_max = std::max(n_max, std::sqrt(eps));
    const auto nodes = g.cell_nodes(c);
    const double jac = cell_jacobian(g, c) * L;
    Eigen::Matrix<cplx, 4, 4> ke = Eigen::Matrix<cplx, 4, 4>::Zero(), me = ke;
    for (double xi : kGp)
      for (double eta : kGp) {
        std::array<double, 4> nv;
        const auto grad = shape_gradients(g, c, xi, eta, bloch.k_out, &nv);
        const double f = pml != nullptr && pml->target == PmlTarget::optical ? cell_pml(g, c, xi, eta, pml) : 0.0;
        const cplx ef = eps * cplx(1.0, f) * cplx(1.0, f);
        for (int a = 0; a < 4; ++a)
          for (int q = 0; q < 4; ++q) {
            ke(a, q) += jac * grad[static_cast<std::size_t>(a)].dot(grad[static_cast<std::size_t>(q)]);
            me(a, q) += jac * ef * inv_c2 * nv[static_cast<std::size_t>(a)] * nv[static_cast<std::size_t>(q)];
          }
      }
    for (int a = 0; a < 4; ++a) {
      const auto na = static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)]);
      const int ra = d.field_dof[static_cast<std::size_t>(d.master[na])];
      if (ra < 0) continue;
      for (int q = 0; q < 4; ++q) {
        const auto nq = static_cast<std::size_t>(nodes[static_cast<std::size_t>(q)]);
        const int rq = d.field_dof[static_cast<std::size_t>(d.master[nq])];
        if (rq < 0) continue;
        const cplx w = std::conj(d.phase[na]) * d.phase[nq];
        kt.emplace_back(ra, rq, w * ke(a, q));
        mt.emplace_back(ra, rq, w * me(a, q));
      }
    }
  }
  if (warnings != nullptr) {
    const double lam = 1550e-9 / n_max;
    double h_max = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i + 1 < g.nodes(a); ++i) h_max = std::max(h_max, g.coord(a, i + 1) - g.coord(a, i));
    if (h_max > lam / 8.0)
      warnings->push_back("optical grid is coarse: fewer than 8 nodes per material wavelength at 1550 nm");
  }
  const int n = d.size();
  ops.K.resize(n, n);
  ops.M.resize(n, n);
  ops.K.setFromTriplets(kt.begin(), kt.end());
  ops.M.setFromTriplets(mt.begin(), mt.end());
  ops.K.makeCompressed();
  ops.M.makeCompressed();
  return ops;
}

ElectrostaticSystem assemble_electrostatic(std::shared_ptr<const Grid2D> grid,
                                           const std::vector<ElectrodeGroup>& electrodes) {
  if (!grid) throw ValidationError("assemble_electrostatic: null grid");
  if (electrodes.size() < 2) throw ValidationError("assemble_electrostatic: at least two electrode groups required");
  const Grid2D& g = *grid;
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  std::vector<double> value(static_cast<std::size_t>(g.node_count()), std::numeric_limits<double>::quiet_NaN());
  for (const auto& grp : electrodes) {
    if (std::isnan(grp.potential))
      throw ValidationError("assemble_electrostatic: electrode group '" + grp.name + "' is floating");
    vmin = std::min(vmin, grp.potential);
    vmax = std::max(vmax, grp.potential);
    int hits = 0;
    for (int j = 0; j < g.nodes(1); ++j)
      for (int i = 0; i < g.nodes(0); ++i)
        for (const auto& b : grp.boxes) {
          const double p0 = g.coord(0, i), p1 = g.coord(1, j);
          const double tol = 1e-6 * g.min_spacing();
          if (p0 >= b[0] - tol && p0 <= b[1] + tol && p1 >= b[2] - tol && p1 <= b[3] + tol) {
            value[static_cast<std::size_t>(g.node(i, j))] = grp.potential;
            ++hits;
          }
        }
    if (hits == 0) throw ValidationError("assemble_electrostatic: electrode group '" + grp.name + "' covers no grid node");
  }
  ElectrostaticSystem sys;
  sys.grid = grid;
  sys.V0 = vmax - vmin;
  if (!(sys.V0 > 0.0)) throw ValidationError("assemble_electrostatic: electrode potentials must differ");
  for (int n = 0; n < g.node_count(); ++n) {
    if (node_fixed(g, n) && std::isnan(value[static_cast<std::size_t>(n)])) value[static_cast<std::size_t>(n)] = 0.0;
    if (!std::isnan(value[static_cast<std::size_t>(n)])) {
      sys.fixed_nodes.push_back(n);
      sys.fixed_values.push_back(value[static_cast<std::size_t>(n)]);
    }
  }
  // periodic sides are tied by identifying the images (zero Bloch phase)
  std::vector<int> master;
  std::vector<cplx> phase;
  periodic_images(g, BlochSpec{}, master, phase);
  std::vector<Eigen::Triplet<double>> t;
  const double L = g.out_of_plane_length();
  for (int c = 0; c < g.cell_count(); ++c) {
    const MaterialMix mix = cell_mix(g, c);
    const auto nodes = g.cell_nodes(c);
    const double jac = cell_jacobian(g, c) * L;
    Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
    for (double xi : kGp)
      for (double eta : kGp) {
        const auto grad = shape_gradients(g, c, xi, eta, 0.0);
        for (int a = 0; a < 4; ++a)
          for (int q = 0; q < 4; ++q)
            ke(a, q) += jac * grad[static_cast<std::size_t>(a)].real().dot(mix.eps_static * grad[static_cast<std::size_t>(q)].real());
      }
    for (int a = 0; a < 4; ++a)
      for (int q = 0; q < 4; ++q)
        t.emplace_back(master[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)])],
                       master[static_cast<std::size_t>(nodes[static_cast<std::size_t>(q)])], ke(a, q));
  }
  sys.K.resize(g.node_count(), g.node_count());
  sys.K.setFromTriplets(t.begin(), t.end());
  return sys;
}

ElectrostaticSolution ElectrostaticSystem::solve() const {
  const Grid2D& g = *grid;
  const int nn = g.node_count();
  std::vector<int> master;
  std::vector<cplx> phase;
  periodic_images(g, BlochSpec{}, master, phase);
  std::vector<double> fixed(static_cast<std::size_t>(nn), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < fixed_nodes.size(); ++i)
    fixed[static_cast<std::size_t>(master[static_cast<std::size_t>(fixed_nodes[i])])] = fixed_values[i];
  std::vector<int> free_index(static_cast<std::size_t>(nn), -1);
  int nf = 0;
  for (int n = 0; n < nn; ++n)
    if (master[static_cast<std::size_t>(n)] == n && std::isnan(fixed[static_cast<std::size_t>(n)]))
      free_index[static_cast<std::size_t>(n)] = nf++;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMatR::InnerIterator it(K, k); it; ++it) {
      const int r = free_index[static_cast<std::size_t>(it.row())];
      if (r < 0) continue;
      const int cidx = free_index[static_cast<std::size_t>(it.col())];
      if (cidx >= 0)
        t.emplace_back(r, cidx, it.value());
      else if (!std::isnan(fixed[static_cast<std::size_t>(it.col())]))
        rhs(r) -= it.value() * fixed[static_cast<std::size_t>(it.col())];
    }
  SpMatR A(nf, nf);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<SpMatR> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw NumericalError("electrostatic factorization failed", 1.0);
  const Eigen::VectorXd xf = ldlt.solve(rhs);
  ElectrostaticSolution sol;
  sol.grid = grid;
  sol.V0 = V0;
  sol.phi.resize(nn);
  for (int n = 0; n < nn; ++n) {
    const int m = master[static_cast<std::size_t>(n)];
    const int f = free_index[static_cast<std::size_t>(m)];
    sol.phi(n) = f >= 0 ? xf(f) : fixed[static_cast<std::size_t>(m)];
  }
  Eigen::VectorXd pm = Eigen::VectorXd::Zero(nn);
  for (int n = 0; n < nn; ++n)
    if (master[static_cast<std::size_t>(n)] == n) pm(n) = sol.phi(n);
  sol.energy = 0.5 * pm.dot(K * pm);
  return sol;
}

Vec3 ElectrostaticSolution::field(int cell, double xi, double eta) const {
  const auto nodes = grid->cell_nodes(cell);
  const auto grad = shape_gradients(*grid, cell, xi, eta, 0.0);
  Vec3 e = Vec3::Zero();
  for (int a = 0; a < 4; ++a) e -= phi(nodes[static_cast<std::size_t>(a)]) * grad[static_cast<std::size_t>(a)].real();
  return e;
}

void write_operator_triplets(const OperatorPair& ops, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  const char* kind = ops.physics == Physics::optical ? "optical" : ops.physics == Physics::piezo ? "piezo" : "elastic";
  out << "# phonox operator dump v1\n";
  out << "# physics " << kind << "\n";
  out << "# size " << ops.K.rows() << " field_dofs " << ops.dofs.n_field << " potential_dofs " << ops.dofs.n_potential
      << "\n";
  out << "# k_out " << ops.bloch.k_out << " k_in " << ops.bloch.k_in[0] << " " << ops.bloch.k_in[1] << "\n";
  out << std::setprecision(17);
  const auto dump = [&](const char* name, const SpMatC& m) {
    out << name << " " << m.nonZeros() << "\n";
    for (int k = 0; k < m.outerSize(); ++k)
      for (SpMatC::InnerIterator it(m, k); it; ++it)
        out << it.row() << " " << it.col() << " " << it.value().real() << " " << it.value().imag() << "\n";
  };
  dump("K", ops.K);
  dump("M", ops.M);
}

}  // namespace phonox
