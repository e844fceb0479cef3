#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include "common.hpp"

namespace hcurlslip {

/// Blocks of [[A, B^T, 0], [B, 0, m], [0, m^T, 0]] [u; p; lambda] = [F; G; 0].
/// The mass and Gram matrices are optional: the velocity mass weights the
/// kernel probe, the Gram blocks feed the MINRES preconditioner.
struct SaddleSystem {
  SparseMatrix A;
  SparseMatrix B;
  Vector F;
  Vector G;
  Vector m;
  std::optional<SparseMatrix> velocity_mass;
  std::optional<SparseMatrix> velocity_gram;
  std::optional<SparseMatrix> pressure_gram;
};

struct SolverOptions {
  bool iterative = false;      // MINRES with block-diagonal preconditioning
  double tolerance = 1e-13;    // MINRES relative residual
  int max_iterations = 20000;  // MINRES
  bool probe_kernel = true;    // smallest-eigenvalue probe after factorization
  double kernel_ratio = 1e-3;  // flag when |theta_1| < ratio * |theta_2|
  int probe_iterations = 60;
  unsigned seed = 20240521u;
};

/// Outcome of the kernel probe on the pencil (K, diag(M_u, 0, 0)).
struct KernelReport {
  bool probed = false;
  bool suspected = false;
  double smallest = 0.0;  // theta_1, smallest in magnitude
  double second = 0.0;    // theta_2
  Vector velocity;        // u-part of the theta_1 eigenvector, unit M_u-norm
  std::string message;
};

struct Solution {
  Vector u;
  Vector p;
  double lambda = 0.0;
  double momentum_residual = 0.0;    // |A u + B^T p - F| / |F|
  double constraint_residual = 0.0;  // |B u + m lambda - G| / (|G| + 1)
  double mean_pressure = 0.0;        // m^T p
  std::string method;
  int iterations = 0;
  KernelReport kernel;
};

/// Generalized eigenpairs K x = theta N x of smallest |theta|.
struct EigenEstimate {
  Vector values;  // sorted by increasing magnitude
  Matrix vectors;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline SparseMatrix saddle_matrix(const SparseMatrix& A, const SparseMatrix& B, const Vector& m) {
  const int nu = int(A.rows()), np = int(B.rows());
  std::vector<Triplet> t;
  t.reserve(A.nonZeros() + 2 * B.nonZeros() + 2 * m.size());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
      t.emplace_back(nu + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), nu + it.row(), it.value());
    }
  for (int j = 0; j < np; ++j)
    if (m(j) != 0.0) {
      t.emplace_back(nu + j, nu + np, m(j));
      t.emplace_back(nu + np, nu + j, m(j));
    }
  SparseMatrix K(nu + np + 1, nu + np + 1);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

/// [[L, m], [m^T, 0]] for mean-zero scalar problems.
inline SparseMatrix bordered(const SparseMatrix& L, const Vector& m) {
  const int n = int(L.rows());
  std::vector<Triplet> t;
  for (int k = 0; k < L.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(L, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int j = 0; j < n; ++j)
    if (m(j) != 0.0) {
      t.emplace_back(j, n, m(j));
      t.emplace_back(n, j, m(j));
    }
  SparseMatrix K(n + 1, n + 1);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

inline SparseMatrix block_diagonal(const SparseMatrix& top, int zeros) {
  const int n = int(top.rows());
  std::vector<Triplet> t;
  for (int k = 0; k < top.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(top, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  SparseMatrix N(n + zeros, n + zeros);
  N.setFromTriplets(t.begin(), t.end());
  return N;
}

}  // namespace detail

/// Sparse LU of a saddle matrix. Throws SolverError on breakdown.
///
/// The three-block constructor takes [[A, B^T, 0], [B, 0, m], [0, m^T, 0]].
/// The border m is a dense row, which ruins the fill of the LU. When the
/// rows of B sum to zero (Lagrange pressures form a partition of unity) the
/// border is eliminated instead: lambda = 1^T b_p / 1^T m from the summed
/// constraint rows, one pressure is pinned to zero, and the pressure is
/// shifted afterwards to meet the mean condition. Otherwise the bordered
/// matrix is factored as is.
class SaddleFactorization {
 public:
  explicit SaddleFactorization(SparseMatrix K) : K_(std::move(K)) { factor(K_); }

  SaddleFactorization(const SparseMatrix& A, const SparseMatrix& B, const Vector& m)
      : K_(detail::saddle_matrix(A, B, m)), nu_(int(A.rows())), np_(int(B.rows())), m_(m) {
    const Vector column_sums = B.transpose() * Vector::Ones(np_);
    const double scale = B.norm();
    eliminated_ = np_ > 0 && std::abs(m.sum()) > 0 && column_sums.norm() <= 1e-10 * (scale > 0 ? scale : 1.0);
    if (!eliminated_) {
      factor(K_);
      return;
    }
    std::vector<Triplet> t;
    t.reserve(A.nonZeros() + 2 * B.nonZeros() + 1);
    for (int k = 0; k < A.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < B.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
        if (it.row() == kPinned) continue;
        t.emplace_back(nu_ + it.row(), it.col(), it.value());
        t.emplace_back(it.col(), nu_ + it.row(), it.value());
      }
    t.emplace_back(nu_ + kPinned, nu_ + kPinned, 1.0);
    SparseMatrix pinned(nu_ + np_, nu_ + np_);
    pinned.setFromTriplets(t.begin(), t.end());
    factor(pinned);
  }

  Vector solve(const Vector& b) const {
    if (!eliminated_) return lu_.solve(b);
    const double lambda = b.segment(nu_, np_).sum() / m_.sum();
    Vector rhs = b.head(nu_ + np_);
    rhs.segment(nu_, np_) -= lambda * m_;
    rhs(nu_ + kPinned) = 0.0;
    Vector x(nu_ + np_ + 1);
    x.head(nu_ + np_) = lu_.solve(rhs);
    const double shift = (b(nu_ + np_) - m_.dot(x.segment(nu_, np_))) / m_.sum();
    x.segment(nu_, np_).array() += shift;
    x(nu_ + np_) = lambda;
    return x;
  }

  /// The full (bordered) matrix, whichever way it was factored.
  const SparseMatrix& matrix() const { return K_; }
  bool border_eliminated() const { return eliminated_; }

 private:
  static constexpr int kPinned = 0;

  void factor(SparseMatrix M) {
    M.makeCompressed();
    lu_.analyzePattern(M);
    lu_.factorize(M);
    if (lu_.info() != Eigen::Success)
      throw SolverError("factorization breakdown (" + lu_.lastErrorMessage() +
                        "): possible nontrivial kernel of the slip problem");
  }

  SparseMatrix K_;
  int nu_ = 0, np_ = 0;
  Vector m_;
  bool eliminated_ = false;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

/// Inverse subspace iteration with Rayleigh-Ritz on the pencil (K, N), N
/// positive semidefinite. Only the N-visible part of the spectrum is found.
/// Stops when the `count` wanted Ritz values change by less than `tolerance`
/// relative to their magnitude.
inline EigenEstimate smallest_eigenpairs(const SaddleFactorization& factor, const SparseMatrix& N, int count,
                                         int block, double tolerance, int max_iterations, unsigned seed) {
  const SparseMatrix& K = factor.matrix();
  const int n = int(K.rows());
  block = std::max(block, count + 2);
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  Matrix X(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = normal(rng);

  EigenEstimate est;
  Vector previous = Vector::Constant(count, std::numeric_limits<double>::infinity());
  for (int it = 1; it <= max_iterations; ++it) {
    const Matrix NX = N * X;
    for (int j = 0; j < block; ++j) X.col(j) = factor.solve(NX.col(j));
    // Near a singular K one direction dominates every column; a Euclidean QR
    // keeps the others at full precision before the N-orthonormalization.
    X = Eigen::HouseholderQR<Matrix>(X).householderQ() * Matrix::Identity(n, block);
    // N-orthonormalize, then Rayleigh-Ritz.
    Matrix Nr = X.transpose() * (N * X);
    Nr = 0.5 * (Nr + Nr.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> gram(Nr);
    const double top = gram.eigenvalues().maxCoeff();
    std::vector<int> keep;
    for (int j = 0; j < block; ++j)
      if (gram.eigenvalues()(j) > 1e-13 * top) keep.push_back(j);
    Matrix basis(n, keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j)
      basis.col(j) = X * gram.eigenvectors().col(keep[j]) / std::sqrt(gram.eigenvalues()(keep[j]));
    Matrix Kr = basis.transpose() * (K * basis);
    Kr = 0.5 * (Kr + Kr.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(Kr);
    std::vector<int> order(keep.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = int(j);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(ritz.eigenvalues()(a)) < std::abs(ritz.eigenvalues()(b));
    });
    if (int(order.size()) < count) throw SolverError("eigen-iteration lost rank in the probe subspace");
    Matrix Y(n, block);
    Vector values(order.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
      values(j) = ritz.eigenvalues()(order[j]);
      Y.col(j) = basis * ritz.eigenvectors().col(order[j]);
    }
    for (int j = int(order.size()); j < block; ++j)
      for (int i = 0; i < n; ++i) Y(i, j) = normal(rng);
    X = Y;
    est.values = values.head(count);
    est.vectors = Y.leftCols(count);
    est.iterations = it;
    // Values far below the top of the block only need absolute accuracy.
    const double floor = 1e-4 * values.cwiseAbs().maxCoeff();
    double change = 0.0;
    for (int j = 0; j < count; ++j)
      change = std::max(change, std::abs(values(j) - previous(j)) / std::max(std::abs(values(j)), floor));
    previous = values.head(count);
    if (change < tolerance) {
      est.converged = true;
      break;
    }
  }
  return est;
}

/// Block-diagonal SPD preconditioner diag(P_u, P_p, s) for MINRES.
class BlockDiagonalPreconditioner {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  BlockDiagonalPreconditioner() = default;

  void set_blocks(const SparseMatrix& velocity, const SparseMatrix& pressure, const Vector& m) {
    nu_ = int(velocity.rows());
    np_ = int(pressure.rows());
    velocity_ = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(velocity);
    pressure_ = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(pressure);
    if (velocity_->info() != Eigen::Success || pressure_->info() != Eigen::Success)
      throw SolverError("preconditioner factorization failed");
    const Vector pm = pressure_->solve(m);
    multiplier_ = m.dot(pm);
  }

  template <class M> BlockDiagonalPreconditioner& analyzePattern(const M&) { return *this; }
  template <class M> BlockDiagonalPreconditioner& factorize(const M&) { return *this; }
  template <class M> BlockDiagonalPreconditioner& compute(const M&) { return *this; }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

  Vector solve(const Vector& b) const {
    Vector x(b.size());
    x.head(nu_) = velocity_->solve(b.head(nu_));
    x.segment(nu_, np_) = pressure_->solve(b.segment(nu_, np_));
    x(nu_ + np_) = b(nu_ + np_) / multiplier_;
    return x;
  }

 private:
  int nu_ = 0, np_ = 0;
  double multiplier_ = 1.0;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> velocity_, pressure_;
};

inline void check_saddle_dimensions(const SaddleSystem& s) {
  const auto nu = s.A.rows(), np = s.B.rows();
  if (s.A.cols() != nu || s.B.cols() != nu || s.F.size() != nu || s.G.size() != np || s.m.size() != np)
    throw std::invalid_argument("saddle system blocks have inconsistent dimensions");
  if (np > 0 && s.m.norm() == 0.0) throw std::invalid_argument("pressure mean vector must be nonzero");
}

/// Kernel probe: smallest |theta| of K x = theta diag(M_u, 0, 0) x.
inline KernelReport probe_kernel(const SaddleFactorization& factor, const SparseMatrix& velocity_mass, int np,
                                 const SolverOptions& opts) {
  const SparseMatrix N = detail::block_diagonal(velocity_mass, np + 1);
  const EigenEstimate est = smallest_eigenpairs(factor, N, 2, 4, 1e-10, opts.probe_iterations, opts.seed);
  KernelReport r;
  r.probed = true;
  r.smallest = est.values(0);
  r.second = est.values(1);
  const int nu = int(velocity_mass.rows());
  r.velocity = est.vectors.col(0).head(nu);
  r.velocity /= std::sqrt(r.velocity.dot(velocity_mass * r.velocity));
  r.suspected = std::abs(r.smallest) < opts.kernel_ratio * std::abs(r.second);
  if (r.suspected)
    r.message = "near-singular saddle system: smallest eigenvalue " + std::to_string(r.smallest) + " vs next " +
                std::to_string(r.second) +
                "; the slip problem likely has a nontrivial kernel (e.g. a rigid rotation of a full-slip disk)";
  return r;
}

/// Solves the bordered saddle-point system. The multiplier lambda equals
/// the mean of the constraint data and vanishes for compatible data.
inline Solution solve_saddle(const SaddleSystem& s, const SolverOptions& opts = {}) {
  check_saddle_dimensions(s);
  const int nu = int(s.A.rows()), np = int(s.B.rows());
  SparseMatrix K = detail::saddle_matrix(s.A, s.B, s.m);
  Vector rhs = Vector::Zero(nu + np + 1);
  rhs.head(nu) = s.F;
  rhs.segment(nu, np) = s.G;

  Solution sol;
  Vector x;
  std::optional<SaddleFactorization> factor;
  if (!opts.iterative) {
    factor.emplace(s.A, s.B, s.m);
    x = factor->solve(rhs);
    sol.method = "sparse LU";
  } else {
    if (!s.velocity_gram || !s.pressure_gram)
      throw std::invalid_argument("MINRES needs velocity and pressure Gram matrices for its preconditioner");
    Eigen::MINRES<SparseMatrix, Eigen::Lower | Eigen::Upper, BlockDiagonalPreconditioner> minres;
    minres.preconditioner().set_blocks(*s.velocity_gram, *s.pressure_gram, s.m);
    minres.setTolerance(opts.tolerance);
    minres.setMaxIterations(opts.max_iterations);
    minres.compute(K);
    x = minres.solve(rhs);
    sol.iterations = int(minres.iterations());
    sol.method = "MINRES";
    if (minres.info() != Eigen::Success)
      throw SolverError("MINRES did not converge in " + std::to_string(opts.max_iterations) + " iterations");
  }
  sol.u = x.head(nu);
  sol.p = x.segment(nu, np);
  sol.lambda = x(nu + np);
  sol.mean_pressure = s.m.dot(sol.p);
  const double fnorm = s.F.norm();
  sol.momentum_residual = (s.A * sol.u + s.B.transpose() * sol.p - s.F).norm() / (fnorm > 0 ? fnorm : 1.0);
  sol.constraint_residual = (s.B * sol.u + s.m * sol.lambda - s.G).norm() / (s.G.norm() + 1.0);

  if (opts.probe_kernel && s.velocity_mass) {
    if (!factor) factor.emplace(s.A, s.B, s.m);
    sol.kernel = probe_kernel(*factor, *s.velocity_mass, np, opts);
  }
  return sol;
}

/// Solves [[L, m], [m^T, 0]] x = [b; 0]: the mean-zero solution of a
/// singular Neumann-type problem.
class MeanZeroSolver {
 public:
  MeanZeroSolver(const SparseMatrix& L, const Vector& m) : factor_(detail::bordered(L, m)), n_(int(L.rows())) {}
  Vector solve(const Vector& b) const {
    Vector rhs = Vector::Zero(n_ + 1);
    rhs.head(n_) = b;
    return factor_.solve(rhs).head(n_);
  }

 private:
  SaddleFactorization factor_;
  int n_;
};

/// Pressure from the discrete pressure-Poisson identity
///   (grad p_h, grad q_h) = F(grad q_h) - a(u_h, grad q_h),
/// where grad q_h is represented in V_h through the gradient matrix.
inline Vector recover_pressure(const SparseMatrix& A, const Vector& F, const Vector& u, const SparseMatrix& gradient,
                               const SparseMatrix& laplacian, const Vector& m) {
  const Vector rhs = gradient.transpose() * (F - A * u);
  return MeanZeroSolver(laplacian, m).solve(rhs);
}

/// L2 projection of v onto discrete gradients: grad phi_h with
/// (grad phi_h, grad psi_h) = (v, grad psi_h) and phi_h mean-zero.
inline Vector project_to_discrete_gradients(const Vector& v, const SparseMatrix& B, const SparseMatrix& gradient,
                                            const SparseMatrix& laplacian, const Vector& m) {
  return gradient * MeanZeroSolver(laplacian, m).solve(B * v);
}

}  // namespace hcurlslip
