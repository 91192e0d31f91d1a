#pragma once

#include "phonox/assemble.hpp"

#include <optional>

namespace phonox {

/// Discretized eigenmode. `u` holds every grid node (ncomp values per node,
/// Bloch factors of periodic images applied, zeros at void/constrained nodes);
/// `phi` holds the quasi-static potential for piezoelectric solves.
struct ModeField {
  cplx omega{0.0, 0.0};
  Physics physics = Physics::elastic;
  BlochSpec bloch;
  int ncomp = 3;
  int pol_axis = 1;
  std::shared_ptr<const Grid2D> grid;
  Eigen::VectorXcd u;
  Eigen::VectorXcd phi;
  /// Discrete M-norm x^H M x after normalization (1 for mass-normalized modes).
  double mass_norm = 1.0;
  double residual = 0.0;

  double frequency_hz() const;
  /// Component c of node n.
  cplx at(int n, int c = 0) const { return u(static_cast<Eigen::Index>(n) * ncomp + c); }
};

struct SolveOptions {
  double tol = 1e-8;
  int max_restarts = 8;
  /// Overrides the spectral shift sigma (in omega^2 units); default target^2.
  std::optional<double> lambda_shift;
};

/// n eigenpairs of K x = omega^2 M x nearest the target angular frequency,
/// by shift-invert Arnoldi with sparse LU inner solves. Hermitian problems
/// are finished by a Rayleigh-Ritz step so that returned modes are
/// M-orthonormal. Results are sorted by (Re omega, field centroid).
/// Throws NumericalError carrying the best residual when the cap is hit.
std::vector<ModeField> solve_modes(const OperatorPair& ops, int n, double target_omega,
                                   const SolveOptions& opts = {});

/// Relative residual ||K x - lambda M x|| / (||K x|| + |lambda| ||M x||).
double relative_residual(const SpMatC& K, const SpMatC& M, const Eigen::VectorXcd& x, cplx lambda);

/// Q = Re(omega) / (2 |Im(omega)|); +infinity when Im(omega) = 0.
double radiative_q(const ModeField& mode);
double radiative_q(cplx omega);

/// Expands a DOF vector into node-indexed field and potential arrays.
void expand_dofs(const OperatorPair& ops, const Eigen::VectorXcd& x, Eigen::VectorXcd& u, Eigen::VectorXcd& phi);
/// Inverse of expand_dofs (master-node values only).
Eigen::VectorXcd gather_dofs(const OperatorPair& ops, const ModeField& m);

}  // namespace phonox
