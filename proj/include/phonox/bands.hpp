#pragma once

#include "phonox/eigensolve.hpp"
#include "phonox/geometry.hpp"
#include "phonox/structures.hpp"

namespace phonox {

struct BandOptions {
  int branches = 6;
  double spacing = 15e-9;
  /// Substrate velocity for the sound line; 0 = minimum SAW velocity of the substrate.
  double sound_velocity = 0.0;
  std::string substrate = "sapphire";
  /// Mechanical grids share the optical grid's nodes (see UnitCellGridOptions).
  bool optical_extent = false;
};

struct BandsTable {
  CellView view = CellView::mechanical;
  std::vector<double> k;
  std::vector<std::vector<cplx>> omega;  // [k index][branch], sorted by Re omega
  std::vector<double> sound_line;        // v_substrate * k (mechanical only)
  double sound_velocity = 0.0;
};

/// Band structure of the top-view unit cell for k in [0, pi/a].
BandsTable band_structure(const UnitCell& cell, const std::vector<double>& k_list, CellView view,
                          const BandOptions& opts = {});

/// The lowest `n` modes of the top-view cell at Bloch wavevector k.
std::vector<ModeField> cell_modes(const UnitCell& cell, double k, CellView view, int n, const BandOptions& opts = {});

/// Parity of an in-plane mechanical mode under the y -> -y mirror of a cell
/// centred on y = 0: +1 for the breathing class (u_x even, u_y odd), -1 for
/// the opposite class, values in between for mixed fields.
double mirror_parity_y(const ModeField& mode);
/// Fraction of |u|^2 carried by component c.
double component_fraction(const ModeField& mode, int c);

/// Breathing-type mode of interest at the X point: mirror-symmetric
/// (parity > 0.5), dominated by u_y, closest to the target frequency.
const ModeField& select_breathing_mode(const std::vector<ModeField>& modes, double target_hz = 5e9);

struct SawOptions {
  double depth_wavelengths = 4.0;
  int nodes_per_wavelength = 60;   // at the surface; grading to 1/8 of that at depth
  bool surface_only = false;       // paper default: lowest branch, whatever its depth profile
  double localization_threshold = 0.8;
  double localization_depth_wavelengths = 1.0;
};

struct SawResult {
  double velocity = 0.0;
  double omega = 0.0;
  double surface_fraction = 0.0;  // |u|^2 fraction within the localization depth
};

/// Lowest branch of a deep, laterally periodic strip of `material` whose
/// crystal is rotated by alpha about the surface normal z, at Bloch k along x.
SawResult saw_mode(const MaterialRecord& material, double alpha, double k, const SawOptions& opts = {});
double saw_velocity(const MaterialRecord& material, double alpha, double k, const SawOptions& opts = {});

struct SawSweep {
  std::vector<double> alpha;
  std::vector<double> velocity;
  double v_min = 0.0, v_max = 0.0, alpha_min = 0.0;
};
/// v(alpha) over [0, pi) in `steps` equal steps.
SawSweep saw_sweep(const MaterialRecord& material, int steps, double k, const SawOptions& opts = {});

}  // namespace phonox
