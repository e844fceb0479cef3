#pragma once

#include <utility>

#include "lagrange.hpp"
#include "mesh.hpp"

namespace hcurlslip {

/// Geometry of the cell map at one reference point.
struct ElementTransform {
  Vec2 point;
  Mat2 jacobian;
  double det = 0.0;
  Mat2 inverse_transpose;
};

/// Geometry of a facet parametrization x(s) = F(a + s (b - a)) at one point.
/// The tangent follows the counterclockwise cell orientation, so the domain
/// is on its left and the normal points outward.
struct FacetTransform {
  ElementTransform cell;
  Vec2 tangent;
  Vec2 normal;
  double speed = 0.0;  // |x'(s)|, the arclength weight
  Vec2 first_derivative;
  Vec2 second_derivative;
};

namespace detail {

inline ElementTransform finish_transform(const Vec2& x, const Mat2& J) {
  ElementTransform t;
  t.point = x;
  t.jacobian = J;
  t.det = J.determinant();
  const double scale = J.cwiseAbs().maxCoeff();
  if (!(std::abs(t.det) > 1e-14 * scale * scale)) throw GeometryError("singular element Jacobian");
  t.inverse_transpose = J.inverse().transpose();
  return t;
}

}  // namespace detail

inline Vec2 map_point(const Mesh& mesh, int c, const Vec2& ref) {
  if (!mesh.is_curved(c)) {
    const auto& v = mesh.cell(c);
    const Vec2& a = mesh.vertex(v[0]);
    return a + ref.x() * (mesh.vertex(v[1]) - a) + ref.y() * (mesh.vertex(v[2]) - a);
  }
  const auto& nodes = mesh.geometry_nodes(c);
  const Vector phi = lagrange_element(mesh.geometry_order()).values(ref);
  Vec2 x = Vec2::Zero();
  for (int i = 0; i < phi.size(); ++i) x += phi(i) * nodes[i];
  return x;
}

inline ElementTransform cell_transform(const Mesh& mesh, int c, const Vec2& ref) {
  if (!mesh.is_curved(c)) {
    const auto& v = mesh.cell(c);
    const Vec2& a = mesh.vertex(v[0]);
    Mat2 J;
    J.col(0) = mesh.vertex(v[1]) - a;
    J.col(1) = mesh.vertex(v[2]) - a;
    return detail::finish_transform(a + J * ref, J);
  }
  const auto& nodes = mesh.geometry_nodes(c);
  const auto& el = lagrange_element(mesh.geometry_order());
  const Vector phi = el.values(ref);
  const Eigen::MatrixX2d dphi = el.gradients(ref);
  Vec2 x = Vec2::Zero();
  Mat2 J = Mat2::Zero();
  for (int i = 0; i < phi.size(); ++i) {
    x += phi(i) * nodes[i];
    J += nodes[i] * dphi.row(i);
  }
  return detail::finish_transform(x, J);
}

inline FacetTransform facet_transform(const Mesh& mesh, int c, int le, double s) {
  const Vec2 ref = ref_edge_point(le, s);
  const Vec2 d = ref_edge_direction(le);
  FacetTransform f;
  f.cell = cell_transform(mesh, c, ref);
  f.first_derivative = f.cell.jacobian * d;
  f.second_derivative = Vec2::Zero();
  if (mesh.is_curved(c)) {
    const auto& nodes = mesh.geometry_nodes(c);
    const Eigen::MatrixX3d H = lagrange_element(mesh.geometry_order()).hessians(ref);
    for (int i = 0; i < H.rows(); ++i) {
      const double dd = H(i, 0) * d.x() * d.x() + 2 * H(i, 1) * d.x() * d.y() + H(i, 2) * d.y() * d.y();
      f.second_derivative += dd * nodes[i];
    }
  }
  f.speed = f.first_derivative.norm();
  if (f.speed < 1e-12) throw GeometryError("degenerate facet parametrization");
  f.tangent = f.first_derivative / f.speed;
  f.normal = Vec2(f.tangent.y(), -f.tangent.x());
  return f;
}

/// H(curl) pullback inverse: v = J^{-T} v_ref, curl v = curl_ref / det J.
inline std::pair<Vec2, double> covariant_piola(const ElementTransform& t, const Vec2& ref_value, double ref_curl) {
  if (!(t.det > 0.0)) throw GeometryError("covariant Piola transform needs a positive Jacobian determinant");
  return {t.inverse_transpose * ref_value, ref_curl / t.det};
}

}  // namespace hcurlslip
