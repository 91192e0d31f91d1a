#include "phonox/bands.hpp"

#include "phonox/constants.hpp"
#include "phonox/error.hpp"

#include <algorithm>
#include <cmath>

namespace phonox {

namespace {

// Negative shift below every physical eigenvalue: the lowest modes are the
// nearest ones, and rigid-body modes at k = 0 stay invertible.
double low_shift(const UnitCell& cell, CellView view) {
  const double scale = view == CellView::mechanical ? 5000.0 / cell.a : constants::c0 / cell.a;
  return -0.01 * scale * scale;
}

OperatorPair cell_ops(const UnitCell& cell, double k, CellView view, const BandOptions& opts) {
  UnitCellGridOptions go;
  go.spacing = opts.spacing;
  go.substrate = opts.substrate;
  go.optical_extent = opts.optical_extent;
  auto g = unit_cell_grid(cell, view, go);
  BlochSpec b;
  b.k_in = {k, 0.0};
  return view == CellView::mechanical ? assemble_elastic(g, b, nullptr, false) : assemble_optical(g, b, 1);
}

}  // namespace

std::vector<ModeField> cell_modes(const UnitCell& cell, double k, CellView view, int n, const BandOptions& opts) {
  const auto ops = cell_ops(cell, k, view, opts);
  SolveOptions so;
  so.lambda_shift = low_shift(cell, view);
  return solve_modes(ops, n, 0.0, so);
}

BandsTable band_structure(const UnitCell& cell, const std::vector<double>& k_list, CellView view,
                          const BandOptions& opts) {
  BandsTable t;
  t.view = view;
  const double kx = constants::pi / cell.a;
  for (double k : k_list) {
    if (k < -1e-12 * kx || k > kx * (1.0 + 1e-12)) throw ValidationError("band_structure: k outside [0, pi/a]");
    const auto modes = cell_modes(cell, k, view, opts.branches, opts);
    std::vector<cplx> w;
    for (const auto& m : modes) w.push_back(m.omega);
    t.k.push_back(k);
    t.omega.push_back(w);
  }
  if (view == CellView::mechanical) {
    double v = opts.sound_velocity;
    if (!(v > 0.0)) v = saw_sweep(builtin_material(opts.substrate), 16, 2.0 * constants::pi / 1e-6).v_min;
    t.sound_velocity = v;
    for (double k : t.k) t.sound_line.push_back(v * k);
  }
  return t;
}

double component_fraction(const ModeField& mode, int c) {
  double num = 0.0, den = 0.0;
  for (int n = 0; n < mode.grid->node_count(); ++n)
    for (int q = 0; q < mode.ncomp; ++q) {
      const double v = std::norm(mode.at(n, q));
      den += v;
      if (q == c) num += v;
    }
  return den > 0.0 ? num / den : 0.0;
}

double mirror_parity_y(const ModeField& mode) {
  const Grid2D& g = *mode.grid;
  const int ny = g.nodes(1);
  cplx overlap = 0.0;
  double norm = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < g.nodes(0); ++i) {
      const int n = g.node(i, j), m = g.node(i, ny - 1 - j);
      // breathing class: u_x(y) = u_x(-y), u_y(y) = -u_y(-y), u_z even
      overlap += std::conj(mode.at(n, 0)) * mode.at(m, 0) - std::conj(mode.at(n, 1)) * mode.at(m, 1) +
                 std::conj(mode.at(n, 2)) * mode.at(m, 2);
      norm += std::norm(mode.at(n, 0)) + std::norm(mode.at(n, 1)) + std::norm(mode.at(n, 2));
    }
  return norm > 0.0 ? overlap.real() / norm : 0.0;
}

const ModeField& select_breathing_mode(const std::vector<ModeField>& modes, double target_hz) {
  const ModeField* best = nullptr;
  double best_d = 0.0;
  for (const auto& m : modes) {
    if (mirror_parity_y(m) < 0.5 || component_fraction(m, 1) < 0.5) continue;
    const double d = std::abs(m.frequency_hz() - target_hz);
    if (best == nullptr || d < best_d) {
      best = &m;
      best_d = d;
    }
  }
  if (best == nullptr) throw NumericalError("no breathing-type mode among the computed branches", 1.0);
  return *best;
}

SawResult saw_mode(const MaterialRecord& material, double alpha, double k, const SawOptions& opts) {
  if (!(k > 0.0)) throw ValidationError("saw_velocity: k must be positive");
  if (opts.depth_wavelengths < 3.0) throw ValidationError("saw_velocity: depth must be at least 3 wavelengths");
  const double lambda = constants::two_pi / k;
  const double depth = opts.depth_wavelengths * lambda;
  const double h0 = lambda / opts.nodes_per_wavelength;
  GridAxis z = graded_axis(-depth, 0.0, 8.0 * h0, h0, Boundary::fixed, Boundary::free);
  auto g = line_grid(std::move(z), 2, 1);
  const MaterialRecord rotated = rotate_material(material, CrystalOrientation::about_axis(2, alpha));
  const int id = g->add_material(rotated);
  g->paint([id](double, double) { return id; }, 1);
  BlochSpec b;
  b.k_out = k;
  const auto ops = assemble_elastic(g, b, nullptr, false);
  SolveOptions so;
  so.lambda_shift = 0.0;
  const int n = opts.surface_only ? 12 : 3;
  const auto modes = solve_modes(ops, n, 0.0, so);
  const double zloc = -opts.localization_depth_wavelengths * lambda;
  const auto fraction = [&](const ModeField& m) {
    double top = 0.0, all = 0.0;
    for (int i = 0; i < g->nodes(0); ++i) {
      const int nd = g->node(i, 0);
      double v = 0.0;
      for (int c = 0; c < 3; ++c) v += std::norm(m.at(nd, c));
      all += v;
      if (g->coord(0, i) >= zloc) top += v;
    }
    return all > 0.0 ? top / all : 0.0;
  };
  for (const auto& m : modes) {
    const double f = fraction(m);
    if (!opts.surface_only || f >= opts.localization_threshold)
      return SawResult{m.omega.real() / k, m.omega.real(), f};
  }
  throw NumericalError("saw_velocity: no surface-confined branch below the bulk line (lowest surface fraction " +
                           std::to_string(fraction(modes.front())) + ")",
                       modes.front().residual);
}

double saw_velocity(const MaterialRecord& material, double alpha, double k, const SawOptions& opts) {
  return saw_mode(material, alpha, k, opts).velocity;
}

SawSweep saw_sweep(const MaterialRecord& material, int steps, double k, const SawOptions& opts) {
  if (steps < 1) throw ValidationError("saw sweep needs at least one step");
  SawSweep s;
  for (int i = 0; i < steps; ++i) {
    const double a = constants::pi * i / steps;
    s.alpha.push_back(a);
    s.velocity.push_back(saw_velocity(material, a, k, opts));
  }
  const auto mn = std::min_element(s.velocity.begin(), s.velocity.end());
  s.v_min = *mn;
  s.alpha_min = s.alpha[static_cast<std::size_t>(mn - s.velocity.begin())];
  s.v_max = *std::max_element(s.velocity.begin(), s.velocity.end());
  return s;
}

}  // namespace phonox
