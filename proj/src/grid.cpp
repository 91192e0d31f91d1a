#include "phonox/grid.hpp"

#include "phonox/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace phonox {

GridAxis GridAxis::uniform(double x0, double x1, int cells, Boundary lo, Boundary hi) {
  if (cells < 1 || !(x1 > x0)) throw ValidationError("GridAxis::uniform: need x1 > x0 and cells >= 1");
  GridAxis a;
  a.lo = lo;
  a.hi = hi;
  a.nodes.resize(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) a.nodes[static_cast<std::size_t>(i)] = x0 + (x1 - x0) * i / cells;
  return a;
}

Grid2D::Grid2D(GridAxis axis0, GridAxis axis1, std::array<int, 2> physical_axes, double out_of_plane_length)
    : axes_{std::move(axis0), std::move(axis1)}, phys_(physical_axes), thickness_(out_of_plane_length) {
  for (const auto& ax : axes_) {
    if (ax.nodes.size() < 2) throw ValidationError("grid axis needs at least two nodes");
    for (std::size_t i = 1; i < ax.nodes.size(); ++i)
      if (!(ax.nodes[i] > ax.nodes[i - 1])) throw ValidationError("grid spacings must be positive");
    if ((ax.lo == Boundary::periodic) != (ax.hi == Boundary::periodic))
      throw ValidationError("periodic boundary must be set on both ends of an axis");
  }
  if (phys_[0] == phys_[1] || phys_[0] < 0 || phys_[0] > 2 || phys_[1] < 0 || phys_[1] > 2)
    throw ValidationError("grid physical axes must be two distinct axes out of x, y, z");
  if (!(thickness_ > 0.0)) throw ValidationError("out-of-plane length must be positive");
  cell_mat_.assign(static_cast<std::size_t>(cell_count()), CellMaterial{});
}

double Grid2D::min_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& ax : axes_)
    for (std::size_t i = 1; i < ax.nodes.size(); ++i) h = std::min(h, ax.nodes[i] - ax.nodes[i - 1]);
  return h;
}

int Grid2D::add_material(const MaterialRecord& m) {
  materials_.push_back(m);
  return static_cast<int>(materials_.size()) - 1;
}

void Grid2D::paint(const std::function<int(double, double)>& material_at, int subsamples) {
  const int s = std::max(1, subsamples);
  for (int j = 0; j < cells(1); ++j) {
    for (int i = 0; i < cells(0); ++i) {
      std::map<int, int> hits;
      const double x0 = coord(0, i), x1 = coord(0, i + 1), y0 = coord(1, j), y1 = coord(1, j + 1);
      for (int q = 0; q < s; ++q)
        for (int p = 0; p < s; ++p)
          ++hits[material_at(x0 + (x1 - x0) * (p + 0.5) / s, y0 + (y1 - y0) * (q + 0.5) / s)];
      std::vector<std::pair<int, int>> ranked(hits.begin(), hits.end());
      std::stable_sort(ranked.begin(), ranked.end(), [](auto& l, auto& r) { return l.second > r.second; });
      CellMaterial cm;
      cm.a = ranked[0].first;
      if (ranked.size() > 1) {
        cm.b = ranked[1].first;
        cm.frac_a = double(ranked[0].second) / (ranked[0].second + ranked[1].second);
      } else {
        cm.b = cm.a;
        cm.frac_a = 1.0;
      }
      cell_mat_[static_cast<std::size_t>(cell(i, j))] = cm;
    }
  }
}

bool Grid2D::cell_is_solid(int c) const {
  const auto& m = cell_mat_[static_cast<std::size_t>(c)];
  return m.a >= 0 || (m.b >= 0 && m.frac_a < 1.0);
}

std::vector<int> Grid2D::node_cells(int n) const {
  const int i = n % nodes(0), j = n / nodes(0);
  std::vector<int> out;
  for (int dj = -1; dj <= 0; ++dj)
    for (int di = -1; di <= 0; ++di) {
      const int ci = i + di, cj = j + dj;
      if (ci >= 0 && cj >= 0 && ci < cells(0) && cj < cells(1)) out.push_back(cell(ci, cj));
    }
  return out;
}

std::array<int, 4> Grid2D::cell_nodes(int c) const {
  const int i = c % cells(0), j = c / cells(0);
  return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
}

bool Grid2D::locate(double p0, double p1, int& c, double& xi, double& eta) const {
  const auto find = [](const std::vector<double>& v, double x, int& idx, double& t) {
    if (x < v.front() - 1e-15 * std::abs(v.front()) || x > v.back() + 1e-15 * std::abs(v.back())) return false;
    auto it = std::upper_bound(v.begin(), v.end(), x);
    idx = static_cast<int>(it - v.begin()) - 1;
    idx = std::clamp(idx, 0, static_cast<int>(v.size()) - 2);
    const double a = v[static_cast<std::size_t>(idx)], b = v[static_cast<std::size_t>(idx) + 1];
    t = std::clamp(2.0 * (x - a) / (b - a) - 1.0, -1.0, 1.0);
    return true;
  };
  int i = 0, j = 0;
  if (!find(axes_[0].nodes, p0, i, xi) || !find(axes_[1].nodes, p1, j, eta)) return false;
  c = cell(i, j);
  return true;
}

void q1_shape(double xi, double eta, std::array<double, 4>& n, std::array<double, 4>& dxi,
              std::array<double, 4>& deta) {
  n = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta), 0.25 * (1 + xi) * (1 + eta),
       0.25 * (1 - xi) * (1 + eta)};
  dxi = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)};
  deta = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)};
}

void PMLProfile::validate() const {
  if (!(R_start > 0.0) || !(R_start < R_sim)) throw ValidationError("PML needs 0 < R_start < R_sim");
  if (!(R_0 > 0.0)) throw ValidationError("PML needs R_0 > 0");
  if (A < 0.0) throw ValidationError("PML amplitude A must be >= 0");
}

double PMLProfile::distance(double p0, double p1) const {
  double r2 = 0.0;
  if (use_axis[0]) r2 += (p0 - center[0]) * (p0 - center[0]);
  if (use_axis[1]) r2 += (p1 - center[1]) * (p1 - center[1]);
  return std::sqrt(r2);
}

double pml_value(double r, const PMLProfile& p) {
  if (r <= p.R_start) return 0.0;
  return p.A * (std::exp((r - p.R_start) / p.R_0) - 1.0);
}

}  // namespace phonox
