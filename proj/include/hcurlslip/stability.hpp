#pragma once

#include "assembly.hpp"
#include "solver.hpp"

namespace hcurlslip {

struct StabilityEstimate {
  double constant = 0.0;
  double eigenvalue = 0.0;  // smallest eigenvalue of the underlying pencil
  int iterations = 0;
  bool converged = false;
};

struct EigenOptions {
  int block = 6;
  double tolerance = 1e-10;
  int max_iterations = 500;
  unsigned seed = 7u;
};

/// C_h = 1 / sqrt(lambda_min) with lambda_min the smallest eigenvalue of
/// (curl u, curl v) = lambda (u, v) on the discrete divergence-free space
/// {v : B v = 0}. The constraint is carried by the saddle pencil
/// ([[C, B^T, 0], [B, 0, m], [0, m^T, 0]], diag(M, 0, 0)).
inline StabilityEstimate estimate_discrete_poincare(const SparseMatrix& curl_curl, const SparseMatrix& mass,
                                                    const SparseMatrix& B, const Vector& m,
                                                    const EigenOptions& opts = {}) {
  const SaddleFactorization factor(curl_curl, B, m);
  const SparseMatrix N = detail::block_diagonal(mass, int(B.rows()) + 1);
  const EigenEstimate est = smallest_eigenpairs(factor, N, 1, opts.block, opts.tolerance, opts.max_iterations, opts.seed);
  if (!est.converged)
    throw SolverError("discrete Poincare eigen-iteration did not converge in " + std::to_string(opts.max_iterations) +
                      " iterations");
  StabilityEstimate r;
  r.eigenvalue = est.values(0);
  r.constant = r.eigenvalue > 0 ? 1.0 / std::sqrt(r.eigenvalue) : std::numeric_limits<double>::infinity();
  r.iterations = est.iterations;
  r.converged = true;
  return r;
}

inline StabilityEstimate estimate_discrete_poincare(const Mesh& mesh, int k, const EigenOptions& opts = {}) {
  const DofMap V = DofMap::nedelec(mesh, k), Q = DofMap::lagrange(mesh, k);
  return estimate_discrete_poincare(assemble_curl_curl(mesh, V), assemble_mass(mesh, V), assemble_b(mesh, V, Q),
                                    assemble_pressure_mean(mesh, Q), opts);
}

/// beta_h = min over mean-zero q of sup_v b(v, q) / (|v|_{H(curl)} |q|_{H^1}),
/// the square root of the smallest eigenvalue of B G_u^{-1} B^T q = beta^2 G_p q.
/// Solved as the symmetric pencil ([[G_u, B^T, 0], [B, 0, m], [0, m^T, 0]],
/// diag(0, G_p, 0)) whose eigenvalues are -beta^2.
inline StabilityEstimate estimate_infsup_b(const SparseMatrix& velocity_gram, const SparseMatrix& pressure_gram,
                                           const SparseMatrix& B, const Vector& m, const EigenOptions& opts = {}) {
  const int nu = int(velocity_gram.rows()), np = int(B.rows());
  const SaddleFactorization factor(velocity_gram, B, m);
  std::vector<Triplet> t;
  for (int k = 0; k < pressure_gram.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(pressure_gram, k); it; ++it)
      t.emplace_back(nu + it.row(), nu + it.col(), it.value());
  SparseMatrix N(nu + np + 1, nu + np + 1);
  N.setFromTriplets(t.begin(), t.end());
  const EigenEstimate est = smallest_eigenpairs(factor, N, 1, opts.block, opts.tolerance, opts.max_iterations, opts.seed);
  if (!est.converged)
    throw SolverError("inf-sup eigen-iteration did not converge in " + std::to_string(opts.max_iterations) +
                      " iterations");
  StabilityEstimate r;
  r.eigenvalue = est.values(0);
  r.constant = std::sqrt(std::max(0.0, -r.eigenvalue));
  r.iterations = est.iterations;
  r.converged = true;
  return r;
}

/// Inf-sup constant for Nedelec degree k and Lagrange degree kp (kp = k is
/// the compatible pair; kp = k + 1 is the incompatible negative control).
inline StabilityEstimate estimate_infsup_b(const Mesh& mesh, int k, int kp, const EigenOptions& opts = {}) {
  const DofMap V = DofMap::nedelec(mesh, k), Q = DofMap::lagrange(mesh, kp);
  const SparseMatrix Gu = assemble_mass(mesh, V) + assemble_curl_curl(mesh, V);
  const SparseMatrix Gp = assemble_pressure_mass(mesh, Q) + assemble_pressure_laplacian(mesh, Q);
  return estimate_infsup_b(Gu, Gp, assemble_b(mesh, V, Q, kp != k), assemble_pressure_mean(mesh, Q), opts);
}

}  // namespace hcurlslip
