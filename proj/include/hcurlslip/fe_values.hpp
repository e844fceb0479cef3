#pragma once

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "dofmap.hpp"
#include "quadrature.hpp"
#include "transform.hpp"

namespace hcurlslip {

/// Default volume quadrature exactness: 2k+2 on affine cells, 2k+2g on curved ones.
inline int volume_exactness(const Mesh& mesh, int c, int k) {
  return std::min(kMaxExactness, mesh.is_curved(c) ? 2 * k + 2 * mesh.geometry_order() : 2 * k + 2);
}

/// Boundary quadrature exactness 2k+2g.
inline int boundary_exactness(const Mesh& mesh, int k) {
  return std::min(kMaxExactness, 2 * k + 2 * mesh.geometry_order());
}

/// Reference basis values at the points of a rule.
struct NedelecTable {
  std::vector<Eigen::MatrixX2d> values;
  std::vector<Vector> curls;
};

struct LagrangeTable {
  std::vector<Vector> values;
  std::vector<Eigen::MatrixX2d> gradients;
};

namespace detail {

// local_edge < 0 selects the triangle rule, otherwise the edge rule mapped to that local edge.
inline std::vector<Vec2> reference_points(int exactness, int local_edge) {
  if (local_edge < 0) return quad_triangle(exactness).points;
  std::vector<Vec2> pts;
  for (double s : quad_edge(exactness).points) pts.push_back(ref_edge_point(local_edge, s));
  return pts;
}

}  // namespace detail

inline const NedelecTable& nedelec_table(int k, int exactness, int local_edge = -1) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, NedelecTable> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(k, exactness, local_edge);
  auto it = cache.find(key);
  if (it == cache.end()) {
    NedelecTable t;
    const auto& el = nedelec_element(k);
    for (const Vec2& p : detail::reference_points(exactness, local_edge)) {
      Eigen::MatrixX2d v;
      Vector c;
      el.evaluate(p, v, c);
      t.values.push_back(v);
      t.curls.push_back(c);
    }
    it = cache.emplace(key, std::move(t)).first;
  }
  return it->second;
}

inline const LagrangeTable& lagrange_table(int m, int exactness, int local_edge = -1) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, LagrangeTable> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(m, exactness, local_edge);
  auto it = cache.find(key);
  if (it == cache.end()) {
    LagrangeTable t;
    const auto& el = lagrange_element(m);
    for (const Vec2& p : detail::reference_points(exactness, local_edge)) {
      t.values.push_back(el.values(p));
      t.gradients.push_back(el.gradients(p));
    }
    it = cache.emplace(key, std::move(t)).first;
  }
  return it->second;
}

/// Physical velocity basis (global signs applied) on one cell.
struct VelocityValues {
  std::vector<Vec2> points;
  std::vector<double> jxw;
  std::vector<Eigen::MatrixX2d> values;
  std::vector<Vector> curls;
};

inline VelocityValues velocity_values(const Mesh& mesh, const DofMap& V, int c, int exactness) {
  const auto& rule = quad_triangle(exactness);
  const auto& table = nedelec_table(V.degree(), exactness);
  const Eigen::Map<const Vector> signs(V.cell_signs(c).data(), V.local_size());
  VelocityValues out;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const ElementTransform t = cell_transform(mesh, c, rule.points[q]);
    if (!(t.det > 0.0)) throw GeometryError("nonpositive Jacobian in cell " + std::to_string(c));
    out.points.push_back(t.point);
    out.jxw.push_back(rule.weights[q] * t.det);
    out.values.push_back(signs.asDiagonal() * (table.values[q] * t.inverse_transpose.transpose()));
    out.curls.push_back(signs.cwiseProduct(table.curls[q]) / t.det);
  }
  return out;
}

/// Physical Lagrange basis on one cell.
struct ScalarValues {
  std::vector<Vec2> points;
  std::vector<double> jxw;
  std::vector<Vector> values;
  std::vector<Eigen::MatrixX2d> gradients;
};

inline ScalarValues scalar_values(const Mesh& mesh, const DofMap& Q, int c, int exactness) {
  const auto& rule = quad_triangle(exactness);
  const auto& table = lagrange_table(Q.degree(), exactness);
  ScalarValues out;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const ElementTransform t = cell_transform(mesh, c, rule.points[q]);
    if (!(t.det > 0.0)) throw GeometryError("nonpositive Jacobian in cell " + std::to_string(c));
    out.points.push_back(t.point);
    out.jxw.push_back(rule.weights[q] * t.det);
    out.values.push_back(table.values[q]);
    out.gradients.push_back(table.gradients[q] * t.inverse_transpose.transpose());
  }
  return out;
}

/// Velocity traces on a boundary facet: tangential components and curls of
/// the global basis functions of the owning cell.
struct FacetValues {
  std::vector<double> s;
  std::vector<double> weights;  // rule weight times arclength speed
  std::vector<Vec2> points;
  std::vector<Vec2> tangents;
  std::vector<Vec2> normals;
  std::vector<Vector> tangential;
  std::vector<Vector> curls;
};

inline FacetValues facet_values(const Mesh& mesh, const DofMap& V, const BoundaryFacet& facet, int exactness) {
  const auto& rule = quad_edge(exactness);
  const auto& table = nedelec_table(V.degree(), exactness, facet.local_edge);
  const Eigen::Map<const Vector> signs(V.cell_signs(facet.cell).data(), V.local_size());
  FacetValues out;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const FacetTransform f = facet_transform(mesh, facet.cell, facet.local_edge, rule.points[q]);
    if (!(f.cell.det > 0.0)) throw GeometryError("nonpositive Jacobian in cell " + std::to_string(facet.cell));
    out.s.push_back(rule.points[q]);
    out.weights.push_back(rule.weights[q] * f.speed);
    out.points.push_back(f.cell.point);
    out.tangents.push_back(f.tangent);
    out.normals.push_back(f.normal);
    // t . J^{-T} v_ref = (J^{-1} t) . v_ref
    const Vec2 pulled = f.cell.inverse_transpose.transpose() * f.tangent;
    out.tangential.push_back(signs.cwiseProduct(table.values[q] * pulled));
    out.curls.push_back(signs.cwiseProduct(table.curls[q]) / f.cell.det);
  }
  return out;
}

/// Lagrange basis values of the owning cell at the points of a boundary facet.
inline std::vector<Vector> facet_scalar_values(const DofMap& Q, const BoundaryFacet& facet, int exactness) {
  return lagrange_table(Q.degree(), exactness, facet.local_edge).values;
}

}  // namespace hcurlslip
