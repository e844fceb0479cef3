#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "common.hpp"
#include "quadrature.hpp"

namespace hcurlslip {

/// Nedelec edge element of the first kind, degree k in {1, 2, 3}.
///
/// Local space P_{k-1}^2 + {psi * (-y, x) : psi homogeneous of degree k-1},
/// dimension k(k+2). Degrees of freedom:
///   edge e, j < k:  int_0^1 v(x(s)) . d_e  L_j(2s-1) ds   (d_e = unnormalized edge vector)
///   interior:       int_K v . e_c x^a y^b,  a+b <= k-2, c in {0,1}
/// Local numbering puts the k moments of edge e at [e*k, e*k+k) followed by
/// the interior moments. The basis is the dual basis of these functionals.
class NedelecElement {
 public:
  explicit NedelecElement(int degree) : degree_(degree) {
    if (degree < 1 || degree > 3)
      throw std::invalid_argument("Nedelec degree " + std::to_string(degree) + " unsupported");
    const int n = size();
    Matrix vandermonde(n, n);
    for (int j = 0; j < n; ++j) {
      const auto prime = [&](const Vec2& p) -> Vec2 {
        Eigen::MatrixX2d v;
        Vector c;
        prime_values(p, v, c);
        return v.row(j).transpose();
      };
      vandermonde.col(j) = apply_dofs(prime, 2 * degree_ + 2);
    }
    coefficients_ = vandermonde.inverse();
  }

  int degree() const { return degree_; }
  int size() const { return degree_ * (degree_ + 2); }
  int dofs_per_edge() const { return degree_; }
  int interior_size() const { return degree_ * (degree_ - 1); }
  int edge_dof(int e, int j) const { return e * degree_ + j; }

  /// Values (one row per basis function) and scalar curls at a reference point.
  void evaluate(const Vec2& p, Eigen::MatrixX2d& values, Vector& curls) const {
    Eigen::MatrixX2d pv;
    Vector pc;
    prime_values(p, pv, pc);
    values = coefficients_.transpose() * pv;
    curls = coefficients_.transpose() * pc;
  }

  /// Applies the degrees of freedom to a reference vector field.
  Vector apply_dofs(const std::function<Vec2(const Vec2&)>& field, int exactness) const {
    const int k = degree_;
    Vector dofs = Vector::Zero(size());
    const EdgeRule& er = quad_edge(std::min(exactness, kMaxExactness));
    for (int e = 0; e < 3; ++e) {
      const Vec2 d = ref_edge_direction(e);
      for (std::size_t q = 0; q < er.size(); ++q) {
        const double s = er.points[q];
        const double tangential = field(ref_edge_point(e, s)).dot(d);
        for (int j = 0; j < k; ++j) dofs(edge_dof(e, j)) += er.weights[q] * tangential * legendre(j, 2 * s - 1);
      }
    }
    if (k >= 2) {
      const QuadratureRule& tr = quad_triangle(std::min(exactness, kMaxExactness));
      for (std::size_t q = 0; q < tr.size(); ++q) {
        const Vec2& p = tr.points[q];
        const Vec2 v = field(p);
        int idx = 3 * k;
        for (int d = 0; d <= k - 2; ++d)
          for (int a = d; a >= 0; --a) {
            const double m = std::pow(p.x(), a) * std::pow(p.y(), d - a);
            dofs(idx++) += tr.weights[q] * v.x() * m;
            dofs(idx++) += tr.weights[q] * v.y() * m;
          }
      }
    }
    return dofs;
  }

  /// Sign relating a local edge basis function to the global one when the
  /// local edge runs against the global orientation (reversal maps
  /// L_j(s) -> (-1)^j L_j(s) and the tangent to its negative).
  static double edge_sign(int j, bool reversed) { return (reversed && j % 2 == 0) ? -1.0 : 1.0; }

 private:
  // Monomial spanning set: x^a y^b e_c for a+b <= k-1, then x^a y^b (-y, x)
  // for a+b = k-1.
  void prime_values(const Vec2& p, Eigen::MatrixX2d& values, Vector& curls) const {
    const int k = degree_;
    const double x = p.x(), y = p.y();
    const auto mono = [](double x, double y, int a, int b) { return std::pow(x, a) * std::pow(y, b); };
    values.resize(size(), 2);
    curls.resize(size());
    int idx = 0;
    for (int d = 0; d <= k - 1; ++d) {
      for (int a = d; a >= 0; --a) {
        const int b = d - a;
        const double m = mono(x, y, a, b);
        const double mx = a > 0 ? a * mono(x, y, a - 1, b) : 0.0;
        const double my = b > 0 ? b * mono(x, y, a, b - 1) : 0.0;
        values.row(idx) << m, 0.0;
        curls(idx++) = -my;
        values.row(idx) << 0.0, m;
        curls(idx++) = mx;
      }
    }
    for (int a = k - 1; a >= 0; --a) {
      const double psi = mono(x, y, a, k - 1 - a);
      values.row(idx) << -y * psi, x * psi;
      curls(idx++) = (k + 1) * psi;
    }
  }

  int degree_;
  Matrix coefficients_;
};

inline const NedelecElement& nedelec_element(int degree) {
  static std::mutex mutex;
  static std::array<std::unique_ptr<NedelecElement>, 4> cache;
  if (degree < 1 || degree > 3)
    throw std::invalid_argument("Nedelec degree " + std::to_string(degree) + " unsupported");
  std::lock_guard lock(mutex);
  if (!cache[degree]) cache[degree] = std::make_unique<NedelecElement>(degree);
  return *cache[degree];
}

}  // namespace hcurlslip
