#pragma once

#include "phonox/materials.hpp"

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace phonox {

enum class Boundary { free, fixed, periodic };

/// Node coordinates along one in-plane axis (strictly increasing) plus the
/// boundary condition on each end. Periodic must be set on both ends.
struct GridAxis {
  std::vector<double> nodes;
  Boundary lo = Boundary::free;
  Boundary hi = Boundary::free;

  static GridAxis uniform(double x0, double x1, int cells, Boundary lo = Boundary::free,
                          Boundary hi = Boundary::free);
  double length() const { return nodes.back() - nodes.front(); }
};

/// Material of one grid cell: a volume-fraction mix of two entries of the grid
/// material table (-1 = void/air).
struct CellMaterial {
  int a = -1;
  int b = -1;
  double frac_a = 1.0;
};

/// Structured rectangular grid of bilinear elements. The two in-plane axes map
/// onto physical axes (0 = x, 1 = y, 2 = z); the remaining physical axis is the
/// out-of-plane direction, along which a Bloch wavevector can be imposed.
class Grid2D {
 public:
  Grid2D(GridAxis axis0, GridAxis axis1, std::array<int, 2> physical_axes, double out_of_plane_length = 1.0);

  int nodes(int axis) const { return static_cast<int>(axes_[axis].nodes.size()); }
  int cells(int axis) const { return nodes(axis) - 1; }
  int node_count() const { return nodes(0) * nodes(1); }
  int cell_count() const { return cells(0) * cells(1); }
  int node(int i, int j) const { return j * nodes(0) + i; }
  int cell(int i, int j) const { return j * cells(0) + i; }
  const GridAxis& axis(int a) const { return axes_[a]; }
  double coord(int a, int i) const { return axes_[a].nodes[static_cast<std::size_t>(i)]; }
  std::array<int, 2> physical_axes() const { return phys_; }
  int normal_axis() const { return 3 - phys_[0] - phys_[1]; }
  double out_of_plane_length() const { return thickness_; }
  double min_spacing() const;

  int add_material(const MaterialRecord& m);
  const std::vector<MaterialRecord>& materials() const { return materials_; }
  const MaterialRecord& material(int id) const { return materials_.at(static_cast<std::size_t>(id)); }
  const CellMaterial& cell_material(int c) const { return cell_mat_[static_cast<std::size_t>(c)]; }
  void set_cell_material(int c, CellMaterial m) { cell_mat_[static_cast<std::size_t>(c)] = m; }

  /// Assigns cell materials by sampling `material_at` (in-plane coordinates ->
  /// material id, -1 for void) on an s x s sub-grid per cell; the two most
  /// frequent ids form the volume-fraction mix.
  void paint(const std::function<int(double, double)>& material_at, int subsamples = 4);

  /// True when the cell carries any solid material.
  bool cell_is_solid(int c) const;
  /// Cells touching node n (up to four).
  std::vector<int> node_cells(int n) const;
  /// Element containing in-plane point (p0, p1) and local coordinates in [-1, 1]^2.
  bool locate(double p0, double p1, int& cell, double& xi, double& eta) const;
  std::array<int, 4> cell_nodes(int c) const;

 private:
  std::array<GridAxis, 2> axes_;
  std::array<int, 2> phys_;
  double thickness_;
  std::vector<MaterialRecord> materials_;
  std::vector<CellMaterial> cell_mat_;
};

/// Bilinear shape functions on [-1, 1]^2, node order (0,0) (1,0) (1,1) (0,1).
void q1_shape(double xi, double eta, std::array<double, 4>& n, std::array<double, 4>& dxi,
              std::array<double, 4>& deta);

enum class PmlTarget { optical, mechanical };

/// Absorbing-layer profile f(r) = A (exp((r - R_start)/R_0) - 1) beyond R_start.
/// Mechanics uses a complex density rho (1 + i f); optics a complex index
/// n (1 + i f), i.e. eps (1 + i f)^2. Both give Im(omega) < 0 for decaying modes
/// in the exp(-i omega t) convention. r is measured in the grid plane from
/// `center`, restricted to the in-plane axes flagged in `use_axis`.
struct PMLProfile {
  double A = 1.0;
  double R_start = 2e-6;
  double R_0 = 0.5e-6;
  double R_sim = 4e-6;
  PmlTarget target = PmlTarget::mechanical;
  std::array<double, 2> center{0.0, 0.0};
  std::array<bool, 2> use_axis{true, true};

  void validate() const;
  double distance(double p0, double p1) const;
};

double pml_value(double r, const PMLProfile& p);

}  // namespace phonox
