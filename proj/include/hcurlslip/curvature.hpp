#pragma once

#include <string>
#include <vector>

#include "chart.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "transform.hpp"

namespace hcurlslip {

enum class CurvatureSource { analytic, geometric };

inline CurvatureSource parse_curvature_source(const std::string& name) {
  if (name == "analytic") return CurvatureSource::analytic;
  if (name == "geometric") return CurvatureSource::geometric;
  throw std::invalid_argument("unknown curvature source '" + name + "'");
}

/// W = -kappa at a point of the chart, kappa being the curvature with the
/// domain on the left. Convex outer arcs give W <= 0, holes give W > 0.
inline double analytic_weingarten(const BoundaryChart& chart, const Vec2& x, double tolerance = 1e-8) {
  const auto arc = chart.locate(x, tolerance);
  if (!arc)
    throw GeometryError("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                        ") does not lie on the boundary chart");
  return -chart.project(*arc, x).curvature;
}

/// Analytic value on a known arc, at the nearest point to x (no distance check,
/// so it applies to points of a curved facet that approximates the arc).
inline double analytic_weingarten_on_arc(const BoundaryChart& chart, int arc, const Vec2& x) {
  if (!chart.is_curved(arc)) return 0.0;
  return -chart.project(arc, x).curvature;
}

/// W = -(x' x x'') / |x'|^3 of the facet parametrization, which keeps the
/// domain on its left.
inline double geometric_weingarten(const Mesh& mesh, const BoundaryFacet& facet, double s) {
  const FacetTransform f = facet_transform(mesh, facet.cell, facet.local_edge, s);
  return -cross(f.first_derivative, f.second_derivative) / std::pow(f.speed, 3);
}

/// Weingarten coefficient on the boundary facets of a mesh.
class WeingartenField {
 public:
  WeingartenField(const Mesh& mesh, const BoundaryChart& chart, CurvatureSource source)
      : mesh_(&mesh), chart_(&chart), source_(source) {}

  CurvatureSource source() const { return source_; }

  /// W at parameter s in [0, 1] of boundary facet `f` (index into boundary_facets()).
  double operator()(int f, double s) const {
    const auto& facet = mesh_->boundary_facets().at(f);
    if (source_ == CurvatureSource::geometric) return geometric_weingarten(*mesh_, facet, s);
    if (facet.arc < 0) throw GeometryError("boundary facet " + std::to_string(f) + " has no chart arc");
    const Vec2 x = map_point(*mesh_, facet.cell, ref_edge_point(facet.local_edge, s));
    return analytic_weingarten_on_arc(*chart_, facet.arc, x);
  }

  /// Values at the points of an edge rule, one row per facet.
  std::vector<std::vector<double>> tabulate(const EdgeRule& rule) const {
    std::vector<std::vector<double>> values(mesh_->boundary_facets().size());
    for (std::size_t f = 0; f < values.size(); ++f)
      for (double s : rule.points) values[f].push_back((*this)(int(f), s));
    return values;
  }

 private:
  const Mesh* mesh_;
  const BoundaryChart* chart_;
  CurvatureSource source_;
};

}  // namespace hcurlslip
