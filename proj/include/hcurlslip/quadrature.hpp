#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "common.hpp"

namespace hcurlslip {

/// Quadrature on the reference triangle; weights sum to 1/2.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness = 0;

  std::size_t size() const { return points.size(); }
};

/// Quadrature on the unit interval [0, 1]; weights sum to 1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int exactness = 0;

  std::size_t size() const { return points.size(); }
};

inline constexpr int kMaxExactness = 20;

namespace detail {

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix of
// the Legendre recurrence.
inline EdgeRule gauss_legendre(int n) {
  Matrix jacobi = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double beta = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = beta;
    jacobi(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  EdgeRule rule;
  rule.exactness = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    rule.points.push_back(0.5 * (eig.eigenvalues()(i) + 1.0));
    rule.weights.push_back(v0 * v0);
  }
  return rule;
}

inline void check_exactness(int exactness) {
  if (exactness < 0 || exactness > kMaxExactness)
    throw std::invalid_argument("quadrature exactness " + std::to_string(exactness) +
                                " unavailable (supported: 0.." + std::to_string(kMaxExactness) + ")");
}

}  // namespace detail

/// Gauss-Legendre rule on [0, 1] exact for polynomials up to `exactness`.
inline const EdgeRule& quad_edge(int exactness) {
  detail::check_exactness(exactness);
  static std::mutex mutex;
  static std::map<int, EdgeRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(exactness);
  if (it == cache.end()) {
    EdgeRule rule = detail::gauss_legendre(exactness / 2 + 1);
    rule.exactness = exactness;
    it = cache.emplace(exactness, std::move(rule)).first;
  }
  return it->second;
}

/// Collapsed (Duffy) tensor Gauss rule on the reference triangle.
/// (u, v) in [0,1]^2 maps to (u, (1-u) v); all weights are positive.
inline const QuadratureRule& quad_triangle(int exactness) {
  detail::check_exactness(exactness);
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(exactness);
  if (it == cache.end()) {
    const EdgeRule gu = detail::gauss_legendre((exactness + 3) / 2);
    const EdgeRule gv = detail::gauss_legendre((exactness + 2) / 2);
    QuadratureRule rule;
    rule.exactness = exactness;
    for (std::size_t i = 0; i < gu.size(); ++i) {
      for (std::size_t j = 0; j < gv.size(); ++j) {
        const double u = gu.points[i];
        rule.points.emplace_back(u, (1.0 - u) * gv.points[j]);
        rule.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - u));
      }
    }
    it = cache.emplace(exactness, std::move(rule)).first;
  }
  return it->second;
}

}  // namespace hcurlslip
