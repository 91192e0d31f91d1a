#pragma once

#include "phonox/geometry.hpp"
#include "phonox/grid.hpp"

#include <memory>
#include <string>
#include <vector>

namespace phonox {

/// Axis from x0 to x1 whose spacing grows linearly from h0 (at x0) to h1 (at x1).
GridAxis graded_axis(double x0, double x1, double h0, double h1, Boundary lo, Boundary hi);

/// Laterally invariant (1D) problem: axis 0 runs along physical axis
/// `phys_along`, axis 1 is a single periodic cell of unit width along
/// `phys_lateral`. Integrals are per unit lateral area.
std::shared_ptr<Grid2D> line_grid(GridAxis along, int phys_along, int phys_lateral);

/// Film of a 1D stack, listed bottom-up.
struct StackFilm {
  std::string material;  // builtin preset name or "air"
  double thickness;
};

/// Depth stack along z: substrate of `substrate_depth` below z = 0, films
/// above it, then `air_above` of air. Bottom fixed; top free. The lateral
/// axis is y and the Bloch axis x (out of plane).
struct StackGridOptions {
  double spacing = 5e-9;        // spacing in the films
  double substrate_spacing = 40e-9;
  double air_above = 0.0;
  double air_spacing = 40e-9;
};
std::shared_ptr<Grid2D> stack_grid(const std::vector<StackFilm>& films, const MaterialRecord& substrate,
                                   double substrate_depth, const StackGridOptions& opts = {});

/// Material of a film after orientation (builtin library or air).
MaterialRecord film_material(const std::string& name);

enum class CellView { mechanical, optical };

struct UnitCellGridOptions {
  double spacing = 15e-9;
  double cladding = 0.6e-6;        // optical: air margin beside the beam
  double n_effective = 0.0;        // optical: 0 = computed from the film stack
  std::string substrate = "sapphire";
  /// Mechanical view on the optical grid's nodes (beam plus void cladding),
  /// so both fields can enter one overlap integral.
  bool optical_extent = false;
};

/// Top view (x, y) of a unit cell centred on its hole, periodic along x over
/// one period. Multi-film cells use a thickness-weighted material and mean
/// mid-thickness geometry. Mechanical grids end at the beam edges (free);
/// optical grids add an air cladding with grounded outer edges and use the
/// slab effective index inside the beam.
std::shared_ptr<Grid2D> unit_cell_grid(const UnitCell& cell, CellView view, const UnitCellGridOptions& opts = {});

/// Thickness-weighted blend of the cell's film materials.
MaterialRecord blended_film_material(const UnitCell& cell);

/// Effective index of the fundamental TE slab mode of the cell's film stack on
/// the substrate at the given free-space wavelength.
double slab_effective_index(const UnitCell& cell, const std::string& substrate, double wavelength = 1550e-9);

}  // namespace phonox
