#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

#include "common.hpp"

namespace hcurlslip {

/// Nodal Lagrange element of degree m on the reference triangle.
///
/// Node layout: the three vertices, then m-1 nodes per local edge ordered
/// from kRefEdges[e][0] to kRefEdges[e][1], then interior nodes. The same
/// element doubles as the geometry element of curved cells. Basis functions
/// use the product form phi = R_a(l0) R_b(l1) R_c(l2) in barycentric
/// coordinates, R_i(t) = prod_{s<i} (m t - s) / (s + 1), which stays
/// well conditioned at high degree.
class LagrangeElement {
 public:
  explicit LagrangeElement(int degree) : degree_(degree) {
    if (degree < 1 || degree > 6)
      throw std::invalid_argument("Lagrange degree " + std::to_string(degree) + " unsupported");
    const int m = degree;
    for (int v = 0; v < 3; ++v) nodes_.push_back(ref_vertex(v));
    for (int e = 0; e < 3; ++e)
      for (int i = 1; i < m; ++i) nodes_.push_back(ref_edge_point(e, double(i) / m));
    for (int j = 1; j < m; ++j)
      for (int i = 1; i + j < m; ++i) nodes_.emplace_back(double(i) / m, double(j) / m);
    for (const Vec2& p : nodes_) {
      const double l[3] = {1.0 - p.x() - p.y(), p.x(), p.y()};
      std::array<int, 3> idx;
      for (int c = 0; c < 3; ++c) idx[c] = int(std::lround(m * l[c]));
      indices_.push_back(idx);
    }
  }

  int degree() const { return degree_; }
  int size() const { return (degree_ + 1) * (degree_ + 2) / 2; }
  int nodes_per_edge() const { return degree_ - 1; }
  int interior_size() const { return (degree_ - 1) * (degree_ - 2) / 2; }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  int edge_node(int e, int i) const { return 3 + e * (degree_ - 1) + i; }
  int interior_node(int i) const { return 3 + 3 * (degree_ - 1) + i; }

  Vector values(const Vec2& p) const {
    const auto f = factors(p);
    Vector v(size());
    for (int n = 0; n < size(); ++n) {
      const auto& a = indices_[n];
      v(n) = f[0][a[0]][0] * f[1][a[1]][0] * f[2][a[2]][0];
    }
    return v;
  }

  /// Gradients, one row per basis function.
  Eigen::MatrixX2d gradients(const Vec2& p) const {
    const auto f = factors(p);
    Eigen::MatrixX2d g(size(), 2);
    for (int n = 0; n < size(); ++n) {
      const auto& a = indices_[n];
      const double r0 = f[0][a[0]][0], r1 = f[1][a[1]][0], r2 = f[2][a[2]][0];
      const double d0 = f[0][a[0]][1] * r1 * r2, d1 = r0 * f[1][a[1]][1] * r2, d2 = r0 * r1 * f[2][a[2]][1];
      g(n, 0) = d1 - d0;
      g(n, 1) = d2 - d0;
    }
    return g;
  }

  /// Second derivatives (xx, xy, yy), one row per basis function.
  Eigen::MatrixX3d hessians(const Vec2& p) const {
    const auto f = factors(p);
    Eigen::MatrixX3d h(size(), 3);
    for (int n = 0; n < size(); ++n) {
      const auto& a = indices_[n];
      const auto& F0 = f[0][a[0]];
      const auto& F1 = f[1][a[1]];
      const auto& F2 = f[2][a[2]];
      // Second derivatives with respect to the barycentric coordinates.
      const double h00 = F0[2] * F1[0] * F2[0], h11 = F0[0] * F1[2] * F2[0], h22 = F0[0] * F1[0] * F2[2];
      const double h01 = F0[1] * F1[1] * F2[0], h02 = F0[1] * F1[0] * F2[1], h12 = F0[0] * F1[1] * F2[1];
      // x-derivative acts as d/dl1 - d/dl0, y-derivative as d/dl2 - d/dl0.
      h(n, 0) = h11 - 2 * h01 + h00;
      h(n, 1) = h12 - h01 - h02 + h00;
      h(n, 2) = h22 - 2 * h02 + h00;
    }
    return h;
  }

 private:
  // f[c][i] = {R_i, R_i', R_i''} evaluated at barycentric coordinate c.
  std::array<std::vector<std::array<double, 3>>, 3> factors(const Vec2& p) const {
    const int m = degree_;
    const double l[3] = {1.0 - p.x() - p.y(), p.x(), p.y()};
    std::array<std::vector<std::array<double, 3>>, 3> f;
    for (int c = 0; c < 3; ++c) {
      f[c].resize(m + 1);
      f[c][0] = {1.0, 0.0, 0.0};
      for (int i = 1; i <= m; ++i) {
        // R_i = R_{i-1} * (m t - (i-1)) / i
        const double lin = (m * l[c] - (i - 1)) / i, dlin = double(m) / i;
        const auto& r = f[c][i - 1];
        f[c][i] = {r[0] * lin, r[1] * lin + r[0] * dlin, r[2] * lin + 2 * r[1] * dlin};
      }
    }
    return f;
  }

  int degree_;
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 3>> indices_;
};

/// Shared immutable element instance for the given degree.
inline const LagrangeElement& lagrange_element(int degree) {
  static std::mutex mutex;
  static std::array<std::unique_ptr<LagrangeElement>, 7> cache;
  if (degree < 1 || degree > 6)
    throw std::invalid_argument("Lagrange degree " + std::to_string(degree) + " unsupported");
  std::lock_guard lock(mutex);
  if (!cache[degree]) cache[degree] = std::make_unique<LagrangeElement>(degree);
  return *cache[degree];
}

}  // namespace hcurlslip
