#pragma once

#include "phonox/grid.hpp"

#include <Eigen/Sparse>

#include <complex>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace phonox {

using cplx = std::complex<double>;
using SpMatC = Eigen::SparseMatrix<cplx>;
using SpMatR = Eigen::SparseMatrix<double>;

enum class Physics { elastic, piezo, optical };

/// Degree-of-freedom numbering. Periodic images share the DOFs of their master
/// node and carry the Bloch factor `phase` (u_image = phase * u_master).
struct DofMap {
  int ncomp = 0;
  std::vector<int> field_dof;      // node * ncomp + c -> dof, -1 if constrained/absent
  std::vector<int> potential_dof;  // node -> dof (piezo only), -1 if constrained
  std::vector<int> master;
  std::vector<cplx> phase;
  int n_field = 0;
  int n_potential = 0;

  int size() const { return n_field + n_potential; }
};

struct BlochSpec {
  double k_out = 0.0;                 // along the out-of-plane axis, rad/m
  std::array<double, 2> k_in{0, 0};   // along periodic in-plane axes, rad/m
};

/// Generalized problem K x = omega^2 M x. For piezoelectric assemblies the
/// potential block is kept (M has a zero block there), which is equivalent to
/// the Schur complement in displacement space.
struct OperatorPair {
  SpMatC K;
  SpMatC M;
  Physics physics = Physics::elastic;
  DofMap dofs;
  std::shared_ptr<const Grid2D> grid;
  BlochSpec bloch;
  bool has_pml = false;
  int pol_axis = 1;
};

OperatorPair assemble_elastic(std::shared_ptr<const Grid2D> grid, const BlochSpec& bloch,
                              const PMLProfile* pml = nullptr, bool include_piezo = true);

/// Scalar Helmholtz operator for the field component along physical axis
/// `pol_axis`. Appends a warning when the grid has fewer than 8 nodes per
/// material wavelength at 1550 nm.
OperatorPair assemble_optical(std::shared_ptr<const Grid2D> grid, const BlochSpec& bloch, int pol_axis,
                              const PMLProfile* pml = nullptr, std::vector<std::string>* warnings = nullptr);

struct ElectrodeGroup {
  std::string name;
  double potential = 0.0;  // NaN marks a floating group
  std::vector<std::array<double, 4>> boxes;  // in-plane [p0_min, p0_max, p1_min, p1_max]
};

struct ElectrostaticSolution {
  std::shared_ptr<const Grid2D> grid;
  Eigen::VectorXd phi;  // node potentials, V
  double V0 = 0.0;      // spread of the applied potentials
  double energy = 0.0;  // J, integrated over the out-of-plane length
  double capacitance() const { return 2.0 * energy / (V0 * V0); }
  /// E = -grad(phi) at local coordinates of a cell (physical components).
  Vec3 field(int cell, double xi, double eta) const;
};

/// Laplace problem with Dirichlet electrode boxes and natural (D.n = 0)
/// outer boundaries except fixed sides, which are grounded.
struct ElectrostaticSystem {
  std::shared_ptr<const Grid2D> grid;
  SpMatR K;
  std::vector<int> fixed_nodes;
  std::vector<double> fixed_values;
  double V0 = 0.0;

  ElectrostaticSolution solve() const;
};

ElectrostaticSystem assemble_electrostatic(std::shared_ptr<const Grid2D> grid,
                                           const std::vector<ElectrodeGroup>& electrodes);

/// Sparse triplet text dump: a header block, then "K" and "M" sections with
/// one "row col re im" line per stored entry.
void write_operator_triplets(const OperatorPair& ops, const std::filesystem::path& path);

/// Element-level helpers shared with the coupling integrals.
struct MaterialMix {
  Mat6 stiffness = Mat6::Zero();
  Mat36 piezo = Mat36::Zero();
  Mat3 eps_static;
  Mat3 eps_optical;
  Mat6 photoelastic = Mat6::Zero();
  double density = 0.0;
  double solid_fraction = 0.0;
};
MaterialMix cell_mix(const Grid2D& g, int cell);

/// Strain-displacement row block for one node: S (6) = B (6x3) u (3), given the
/// physical gradient of the shape function.
Eigen::Matrix<cplx, 6, 3> strain_block(const Eigen::Vector3cd& grad);

/// Physical gradient of the four shape functions at (xi, eta) of a cell,
/// including i k_out N along the out-of-plane axis.
std::array<Eigen::Vector3cd, 4> shape_gradients(const Grid2D& g, int cell, double xi, double eta, double k_out,
                                                std::array<double, 4>* values = nullptr);

}  // namespace phonox
