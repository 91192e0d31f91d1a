#include "phonox/eigensolve.hpp"

#include "phonox/constants.hpp"
#include "phonox/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace phonox {

namespace {

using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

struct Ritz {
  cplx lambda;
  VecC x;
  double residual;
};

VecC start_vector(int n) {
  // deterministic, non-symmetric start so that no symmetry class is missed
  VecC v(n);
  std::uint64_t s = 0x9E3779B97F4A7C15ull;
  for (int i = 0; i < n; ++i) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    v(i) = cplx(double(s % 1000003) / 1000003.0 - 0.5, double((s >> 20) % 1000003) / 1000003.0 - 0.5);
  }
  return v.normalized();
}

double node_centroid(const ModeField& m) {
  const Grid2D& g = *m.grid;
  double wsum = 0.0, acc = 0.0;
  for (int j = 0; j < g.nodes(1); ++j)
    for (int i = 0; i < g.nodes(0); ++i) {
      const int n = g.node(i, j);
      double w = 0.0;
      for (int c = 0; c < m.ncomp; ++c) w += std::norm(m.at(n, c));
      acc += w * (g.coord(0, i) + 1e-3 * g.coord(1, j));
      wsum += w;
    }
  return wsum > 0.0 ? acc / wsum : 0.0;
}

}  // namespace

double ModeField::frequency_hz() const { return omega.real() / constants::two_pi; }

double relative_residual(const SpMatC& K, const SpMatC& M, const VecC& x, cplx lambda) {
  const VecC kx = K * x;
  const VecC mx = M * x;
  const double den = kx.norm() + std::abs(lambda) * mx.norm();
  if (den == 0.0) return 0.0;
  return (kx - lambda * mx).norm() / den;
}

double radiative_q(cplx omega) {
  if (omega.imag() == 0.0) return std::numeric_limits<double>::infinity();
  return omega.real() / (2.0 * std::abs(omega.imag()));
}

double radiative_q(const ModeField& mode) { return radiative_q(mode.omega); }

void expand_dofs(const OperatorPair& ops, const VecC& x, VecC& u, VecC& phi) {
  const DofMap& d = ops.dofs;
  const int nn = ops.grid->node_count();
  u = VecC::Zero(static_cast<Eigen::Index>(nn) * d.ncomp);
  phi = d.n_potential > 0 ? VecC::Zero(nn) : VecC();
  for (int n = 0; n < nn; ++n) {
    const auto m = static_cast<std::size_t>(d.master[static_cast<std::size_t>(n)]);
    const cplx ph = d.phase[static_cast<std::size_t>(n)];
    for (int c = 0; c < d.ncomp; ++c) {
      const int dof = d.field_dof[m * static_cast<std::size_t>(d.ncomp) + static_cast<std::size_t>(c)];
      if (dof >= 0) u(static_cast<Eigen::Index>(n) * d.ncomp + c) = ph * x(dof);
    }
    if (d.n_potential > 0) {
      const int dof = d.potential_dof[m];
      if (dof >= 0) phi(n) = ph * x(dof);
    }
  }
}

VecC gather_dofs(const OperatorPair& ops, const ModeField& mode) {
  const DofMap& d = ops.dofs;
  VecC x = VecC::Zero(d.size());
  const int nn = ops.grid->node_count();
  for (int n = 0; n < nn; ++n) {
    if (d.master[static_cast<std::size_t>(n)] != n) continue;
    for (int c = 0; c < d.ncomp; ++c) {
      const int dof = d.field_dof[static_cast<std::size_t>(n * d.ncomp + c)];
      if (dof >= 0) x(dof) = mode.u(static_cast<Eigen::Index>(n) * d.ncomp + c);
    }
    if (d.n_potential > 0 && d.potential_dof[static_cast<std::size_t>(n)] >= 0 && mode.phi.size() > 0)
      x(d.potential_dof[static_cast<std::size_t>(n)]) = mode.phi(n);
  }
  return x;
}

std::vector<ModeField> solve_modes(const OperatorPair& ops, int n, double target_omega, const SolveOptions& opts) {
  const int N = static_cast<int>(ops.K.rows());
  if (n < 1) throw ValidationError("solve_modes: requested mode count must be >= 1");
  if (N == 0) throw ValidationError("solve_modes: empty operator");
  n = std::min(n, ops.dofs.n_field);

  // Potential unknowns are ~1e10 larger than displacements in SI units; a
  // symmetric rescale of the potential block keeps both in the working digits.
  VecC dscale = VecC::Ones(N);
  SpMatC Ks = ops.K, Ms = ops.M;
  if (ops.dofs.n_potential > 0) {
    double kf = 0.0, kp = 0.0;
    for (int i = 0; i < N; ++i) (i < ops.dofs.n_field ? kf : kp) += std::abs(ops.K.coeff(i, i));
    kf /= std::max(ops.dofs.n_field, 1);
    kp /= std::max(ops.dofs.n_potential, 1);
    if (kp > 0.0 && kf > 0.0) {
      dscale.tail(ops.dofs.n_potential).setConstant(std::sqrt(kf / kp));
      Ks = dscale.asDiagonal() * ops.K * dscale.asDiagonal();
      Ms = dscale.asDiagonal() * ops.M * dscale.asDiagonal();
    }
  }

  double sigma = opts.lambda_shift ? *opts.lambda_shift : target_omega * target_omega;
  Eigen::SparseLU<SpMatC, Eigen::COLAMDOrdering<int>> lu;
  for (int attempt = 0;; ++attempt) {
    SpMatC A = Ks - cplx(sigma, 0.0) * Ms;
    A.makeCompressed();
    lu.compute(A);
    if (lu.info() == Eigen::Success) break;
    if (attempt == 3) throw NumericalError("solve_modes: shifted operator is singular", 1.0);
    // shift landed on an eigenvalue: nudge it
    const double scale = std::max(std::abs(sigma), 1.0);
    sigma += 1e-6 * scale * (attempt + 1);
  }
  const auto apply = [&](const VecC& v) -> VecC { return lu.solve(Ms * v); };
  // Eigenvalue floor of the residual denominator: for rigid-body modes
  // (lambda ~ 0) both K x and lambda M x vanish.
  double kd = 0.0, md = 0.0;
  for (int i = 0; i < ops.dofs.n_field; ++i) {
    kd += std::abs(Ks.coeff(i, i));
    md += std::abs(Ms.coeff(i, i));
  }
  const double lambda_floor = std::max(std::abs(sigma), md > 0.0 ? 1e-6 * kd / md : 0.0);
  const auto residual = [&](const VecC& x, cplx lambda) {
    const VecC Mx = Ms * x;
    const VecC Kx = Ks * x;
    const double den = Kx.norm() + std::max(std::abs(lambda), lambda_floor) * Mx.norm();
    return den > 0.0 ? (Kx - lambda * Mx).norm() / den : 0.0;
  };

  const int m0 = std::min(std::max(2 * n + 20, 30), N);
  int m = m0;
  // Starting inside the range of the operator keeps the Krylov space free of
  // the infinite eigenvalues of a singular mass matrix (piezo potential block).
  VecC v0 = apply(start_vector(N));
  double best_res = std::numeric_limits<double>::infinity();
  std::vector<Ritz> wanted;

  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    MatC V = MatC::Zero(N, m + 1);
    MatC H = MatC::Zero(m + 1, m);
    V.col(0) = v0.normalized();
    int steps = m;
    for (int j = 0; j < m; ++j) {
      VecC w = apply(V.col(j));
      const double wnorm0 = w.norm();
      for (int pass = 0; pass < 2; ++pass) {
        const VecC h = V.leftCols(j + 1).adjoint() * w;
        w -= V.leftCols(j + 1) * h;
        H.block(0, j, j + 1, 1) += h;
      }
      const double beta = w.norm();
      H(j + 1, j) = beta;
      if (beta <= 1e-13 * std::max(wnorm0, 1e-300)) {
        steps = j + 1;
        break;
      }
      V.col(j + 1) = w / beta;
    }
    Eigen::ComplexEigenSolver<MatC> es(H.topLeftCorner(steps, steps));
    if (es.info() != Eigen::Success) throw NumericalError("solve_modes: Hessenberg eigensolve failed", best_res);
    std::vector<int> order(static_cast<std::size_t>(steps));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b)); });
    wanted.clear();
    double worst = 0.0;
    for (int idx = 0; idx < steps && static_cast<int>(wanted.size()) < n; ++idx) {
      const cplx theta = es.eigenvalues()(order[static_cast<std::size_t>(idx)]);
      if (std::abs(theta) < 1e-300) continue;
      Ritz r;
      r.lambda = sigma + 1.0 / theta;
      r.x = V.leftCols(steps) * es.eigenvectors().col(order[static_cast<std::size_t>(idx)]);
      // one inverse-iteration step purifies the vector of null-space drift
      r.x = apply(r.x);
      r.x.normalize();
      r.residual = residual(r.x, r.lambda);
      worst = std::max(worst, r.residual);
      wanted.push_back(std::move(r));
    }
    best_res = std::min(best_res, worst);
    if (static_cast<int>(wanted.size()) == n && worst < opts.tol) break;
    if (restart == opts.max_restarts)
      throw NumericalError("solve_modes: no convergence within the restart cap", best_res);
    VecC next = VecC::Zero(N);
    for (const auto& r : wanted)
      if (r.residual >= opts.tol) next += r.x;
    if (next.norm() == 0.0) next = start_vector(N);
    v0 = apply(next + 1e-3 * start_vector(N));
    m = std::min({2 * m, 8 * m0, N});
  }

  // Hermitian problems: Rayleigh-Ritz on the converged subspace for exactly
  // real eigenvalues and M-orthonormal vectors inside degenerate clusters.
  if (!ops.has_pml) {
    MatC X(N, static_cast<Eigen::Index>(wanted.size()));
    for (std::size_t i = 0; i < wanted.size(); ++i) X.col(static_cast<Eigen::Index>(i)) = wanted[i].x;
    // orthonormalize first so that the projected mass matrix is well conditioned
    Eigen::HouseholderQR<MatC> qr(X);
    X = qr.householderQ() * MatC::Identity(N, X.cols());
    MatC Kr = X.adjoint() * (Ks * X);
    MatC Mr = X.adjoint() * (Ms * X);
    Kr = 0.5 * (Kr + Kr.adjoint()).eval();
    Mr = 0.5 * (Mr + Mr.adjoint()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<MatC> ges(Kr, Mr);
    if (ges.info() == Eigen::Success) {
      const MatC Y = X * ges.eigenvectors();
      for (std::size_t i = 0; i < wanted.size(); ++i) {
        wanted[i].lambda = cplx(ges.eigenvalues()(static_cast<Eigen::Index>(i)), 0.0);
        wanted[i].x = Y.col(static_cast<Eigen::Index>(i));
        wanted[i].residual = residual(wanted[i].x, wanted[i].lambda);
      }
    }
  }

  std::vector<ModeField> modes;
  double worst = 0.0;
  for (auto& r : wanted) {
    worst = std::max(worst, r.residual);
    r.x = dscale.cwiseProduct(r.x);
    cplx mn = r.x.dot(ops.M * r.x);
    if (std::abs(mn) > 0.0) r.x /= std::sqrt(std::abs(mn));
    // deterministic global phase: largest field component real and positive
    Eigen::Index imax = 0;
    r.x.head(ops.dofs.n_field).cwiseAbs().maxCoeff(&imax);
    const cplx p = r.x(imax);
    if (std::abs(p) > 0.0) r.x *= std::conj(p) / std::abs(p);
    ModeField mf;
    mf.physics = ops.physics;
    mf.bloch = ops.bloch;
    mf.ncomp = ops.dofs.ncomp;
    mf.pol_axis = ops.pol_axis;
    mf.grid = ops.grid;
    cplx w = std::sqrt(r.lambda);
    if (w.real() < 0.0) w = -w;
    mf.omega = w;
    mf.residual = r.residual;
    mf.mass_norm = std::abs(r.x.dot(ops.M * r.x));
    expand_dofs(ops, r.x, mf.u, mf.phi);
    modes.push_back(std::move(mf));
  }
  if (worst >= opts.tol) throw NumericalError("solve_modes: residual bound violated after post-processing", worst);
  std::vector<double> centroid;
  for (const auto& md : modes) centroid.push_back(node_centroid(md));
  std::vector<int> idx(modes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ra = modes[static_cast<std::size_t>(a)].omega.real(), rb = modes[static_cast<std::size_t>(b)].omega.real();
    if (std::abs(ra - rb) > 1e-9 * std::max(std::abs(ra), std::abs(rb))) return ra < rb;
    return centroid[static_cast<std::size_t>(a)] < centroid[static_cast<std::size_t>(b)];
  });
  std::vector<ModeField> sorted;
  for (int i : idx) sorted.push_back(std::move(modes[static_cast<std::size_t>(i)]));
  return sorted;
}

}  // namespace phonox
