#include "phonox/structures.hpp"

#include "phonox/assemble.hpp"
#include "phonox/constants.hpp"
#include "phonox/eigensolve.hpp"
#include "phonox/error.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace phonox {

GridAxis graded_axis(double x0, double x1, double h0, double h1, Boundary lo, Boundary hi) {
  if (!(x1 > x0) || !(h0 > 0.0) || !(h1 > 0.0)) throw ValidationError("graded_axis: invalid extent or spacing");
  GridAxis ax;
  ax.lo = lo;
  ax.hi = hi;
  const double L = x1 - x0;
  // spacing h(s) = h0 + (h1 - h0) s / L, steps taken on the fly, then rescaled to land on x1
  std::vector<double> pts{0.0};
  double s = 0.0;
  while (s < L) {
    const double h = h0 + (h1 - h0) * std::min(s / L, 1.0);
    s += h;
    pts.push_back(s);
  }
  if (pts.size() > 2 && (pts.back() - L) > 0.5 * (pts.back() - pts[pts.size() - 2])) pts.pop_back();
  const double scale = L / pts.back();
  for (double p : pts) ax.nodes.push_back(x0 + p * scale);
  ax.nodes.back() = x1;
  return ax;
}

std::shared_ptr<Grid2D> line_grid(GridAxis along, int phys_along, int phys_lateral) {
  GridAxis lat = GridAxis::uniform(0.0, 1.0, 1, Boundary::periodic, Boundary::periodic);
  return std::make_shared<Grid2D>(std::move(along), std::move(lat), std::array<int, 2>{phys_along, phys_lateral});
}

MaterialRecord film_material(const std::string& name) {
  if (name == "air") return air();
  return builtin_material(name);
}

namespace {

void append_segment(std::vector<double>& nodes, double x0, double x1, double h) {
  const int n = std::max(1, static_cast<int>(std::ceil((x1 - x0) / h - 1e-9)));
  for (int i = 1; i <= n; ++i) nodes.push_back(x0 + (x1 - x0) * i / n);
}

}  // namespace

std::shared_ptr<Grid2D> stack_grid(const std::vector<StackFilm>& films, const MaterialRecord& substrate,
                                   double substrate_depth, const StackGridOptions& opts) {
  if (!(substrate_depth > 0.0)) throw ValidationError("stack_grid: substrate depth must be positive");
  GridAxis z = graded_axis(-substrate_depth, 0.0, opts.substrate_spacing, opts.spacing, Boundary::fixed, Boundary::free);
  std::vector<double> bounds{0.0};
  double top = 0.0;
  for (const auto& f : films) {
    if (!(f.thickness > 0.0)) continue;  // zero-thickness films are skipped
    append_segment(z.nodes, top, top + f.thickness, opts.spacing);
    top += f.thickness;
    bounds.push_back(top);
  }
  if (opts.air_above > 0.0) {
    GridAxis air_ax = graded_axis(top, top + opts.air_above, opts.spacing, opts.air_spacing, Boundary::free,
                                  Boundary::fixed);
    for (std::size_t i = 1; i < air_ax.nodes.size(); ++i) z.nodes.push_back(air_ax.nodes[i]);
    z.hi = Boundary::fixed;
  }
  auto g = line_grid(std::move(z), 2, 1);
  const int sub = g->add_material(substrate);
  std::vector<int> ids;
  std::vector<StackFilm> kept;
  for (const auto& f : films) {
    if (!(f.thickness > 0.0)) continue;
    kept.push_back(f);
    ids.push_back(f.material == "air" ? -1 : g->add_material(film_material(f.material)));
  }
  g->paint(
      [&](double zc, double) {
        if (zc < 0.0) return sub;
        for (std::size_t i = 0; i < kept.size(); ++i)
          if (zc < bounds[i + 1]) return ids[i];
        return -1;
      },
      1);
  return g;
}

MaterialRecord blended_film_material(const UnitCell& cell) {
  if (cell.stack.size() == 1) return film_material(cell.stack.front().material);
  MaterialRecord out;
  out.name = "blend";
  out.density = 0.0;
  out.stiffness.setZero();
  out.piezo.setZero();
  out.permittivity_static.setZero();
  out.permittivity_optical.setZero();
  out.photoelastic.setZero();
  double total = 0.0;
  for (const auto& l : cell.stack) total += l.thickness;
  for (const auto& l : cell.stack) {
    const MaterialRecord m = film_material(l.material);
    const double f = l.thickness / total;
    out.name += "_" + m.name;
    out.density += f * m.density;
    out.stiffness += f * m.stiffness;
    out.piezo += f * m.piezo;
    out.permittivity_static += f * m.permittivity_static;
    out.permittivity_optical += f * m.permittivity_optical;
    out.photoelastic += f * m.photoelastic;
    out.loss_tangent += f * m.loss_tangent;
  }
  return out;
}

double slab_effective_index(const UnitCell& cell, const std::string& substrate, double wavelength) {
  static std::mutex mu;
  static std::map<std::string, double> cache;
  std::string key = substrate + "|" + std::to_string(wavelength);
  for (const auto& l : cell.stack) key += "|" + l.material + ":" + std::to_string(l.thickness);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  std::vector<StackFilm> films;
  for (const auto& l : cell.stack) films.push_back({l.material, l.thickness});
  StackGridOptions o;
  o.spacing = 5e-9;
  o.substrate_spacing = 40e-9;
  o.air_above = 1.5e-6;
  o.air_spacing = 40e-9;
  auto g = stack_grid(films, film_material(substrate), 1.5e-6, o);
  const double w0 = constants::two_pi * constants::c0 / wavelength;
  double n_eff = 2.5;
  for (int it = 0; it < 8; ++it) {
    const double k = n_eff * w0 / constants::c0;
    BlochSpec b;
    b.k_out = k;
    const auto ops = assemble_optical(g, b, 1);
    SolveOptions so;
    so.lambda_shift = 0.0;
    const auto modes = solve_modes(ops, 1, 0.0, so);
    const double w = modes.front().omega.real();
    const double next = constants::c0 * k / w;  // modal index at this k
    if (std::abs(next - n_eff) < 1e-12 * n_eff) {
      n_eff = next;
      break;
    }
    n_eff = next;
  }
  std::lock_guard<std::mutex> lock(mu);
  cache[key] = n_eff;
  return n_eff;
}

std::shared_ptr<Grid2D> unit_cell_grid(const UnitCell& cell, CellView view, const UnitCellGridOptions& opts) {
  cell.validate();
  const auto eff = effective_layers(cell);
  double total = 0.0, hx = 0.0, hy = 0.0, w = 0.0;
  for (const auto& e : eff) total += e.thickness;
  for (const auto& e : eff) {
    hx += e.hx * e.thickness / total;
    hy += e.hy * e.thickness / total;
    w += e.w * e.thickness / total;
  }
  const double a = cell.a;
  const int nx = std::max(8, static_cast<int>(std::ceil(a / opts.spacing)));
  GridAxis ax = GridAxis::uniform(-0.5 * a, 0.5 * a, nx, Boundary::periodic, Boundary::periodic);
  GridAxis ay;
  MaterialRecord mat;
  if (view == CellView::mechanical && opts.optical_extent) {
    const double half = 0.5 * w + opts.cladding;
    const int ny = std::max(8, static_cast<int>(std::ceil(2.0 * half / opts.spacing)));
    ay = GridAxis::uniform(-half, half, ny);
    mat = blended_film_material(cell);
  } else if (view == CellView::mechanical) {
    const int ny = std::max(8, static_cast<int>(std::ceil(w / opts.spacing)));
    ay = GridAxis::uniform(-0.5 * w, 0.5 * w, ny);
    mat = blended_film_material(cell);
  } else {
    const double half = 0.5 * w + opts.cladding;
    const int ny = std::max(8, static_cast<int>(std::ceil(2.0 * half / opts.spacing)));
    ay = GridAxis::uniform(-half, half, ny, Boundary::fixed, Boundary::fixed);
    const double n = opts.n_effective > 0.0 ? opts.n_effective : slab_effective_index(cell, opts.substrate);
    mat = isotropic_material("n_eff", 1.0, 1.0, 0.5, n);
  }
  auto g = std::make_shared<Grid2D>(std::move(ax), std::move(ay), std::array<int, 2>{0, 1}, total);
  const int id = g->add_material(mat);
  const double rx = 0.5 * hx, ry = 0.5 * hy, hw = 0.5 * w;
  g->paint(
      [=](double x, double y) {
        if (std::abs(y) > hw) return -1;
        if ((x / rx) * (x / rx) + (y / ry) * (y / ry) < 1.0) return -1;
        return id;
      },
      6);
  return g;
}

}  // namespace phonox
