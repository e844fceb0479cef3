#pragma once

#include <string>
#include <vector>

#include "chart.hpp"
#include "lagrange.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "transform.hpp"

namespace hcurlslip {

namespace detail {

// Edge bubble B_m(s) = s (1 - s) P_{m-2}(2s - 1), m >= 2.
inline double edge_bubble(int m, double s) { return s * (1 - s) * legendre(m - 2, 2 * s - 1); }

inline std::array<double, 3> barycentric(const Vec2& p) { return {1.0 - p.x() - p.y(), p.x(), p.y()}; }

}  // namespace detail

/// Elevates cells with a facet on a curved chart arc to polynomial geometry
/// of order g. Edge nodes at reference spacing i/g are projected onto the arc
/// and the resulting edge displacement is extended into the cell by
///   D = sum_m c_m sigma^m B_m(lambda_b / sigma),  sigma = lambda_a + lambda_b,
/// which is a polynomial of degree g vanishing on the other two edges.
/// Cells without curved facets stay affine. The result depends only on the
/// straight vertices, so curving twice gives the same mesh.
inline Mesh curve_boundary(const Mesh& mesh, const BoundaryChart& chart, int g) {
  if (g < 1) throw std::invalid_argument("geometry order must be >= 1");
  std::vector<std::vector<Vec2>> nodes(mesh.num_cells());
  if (g == 1) return mesh.with_geometry(1, std::move(nodes));

  const auto& el = lagrange_element(g);
  // Collocation matrix of the bubbles at the interior edge nodes.
  Matrix collocation(g - 1, g - 1);
  for (int i = 1; i < g; ++i)
    for (int m = 2; m <= g; ++m) collocation(i - 1, m - 2) = detail::edge_bubble(m, double(i) / g);
  const Eigen::PartialPivLU<Matrix> solver(collocation);

  const auto& facets = mesh.boundary_facets();
  for (int f = 0; f < int(facets.size()); ++f) {
    const auto& facet = facets[f];
    if (facet.arc < 0) throw GeometryError("boundary facet " + std::to_string(f) + " has no chart arc");
    if (!chart.is_curved(facet.arc)) continue;
    const int c = facet.cell, le = facet.local_edge;
    const auto& cv = mesh.cell(c);
    const int va = kRefEdges[le][0], vb = kRefEdges[le][1];
    const Vec2 a = mesh.vertex(cv[va]), b = mesh.vertex(cv[vb]);

    Matrix displacement(g - 1, 2);
    for (int i = 1; i < g; ++i) {
      const Vec2 chord = a + (double(i) / g) * (b - a);
      try {
        displacement.row(i - 1) = (chart.project(facet.arc, chord).point - chord).transpose();
      } catch (const GeometryError& e) {
        throw GeometryError("curving boundary facet " + std::to_string(f) + ": " + e.what());
      }
    }
    const Matrix coefficients = solver.solve(displacement);

    if (nodes[c].empty()) {
      for (const Vec2& p : el.nodes()) {
        const auto l = detail::barycentric(p);
        nodes[c].push_back(l[0] * mesh.vertex(cv[0]) + l[1] * mesh.vertex(cv[1]) + l[2] * mesh.vertex(cv[2]));
      }
    }
    for (int n = 0; n < el.size(); ++n) {
      const auto lambda = detail::barycentric(el.nodes()[n]);
      const double sigma = lambda[va] + lambda[vb];
      if (sigma < 1e-14) continue;
      const double s = lambda[vb] / sigma;
      for (int m = 2; m <= g; ++m)
        nodes[c][n] += std::pow(sigma, m) * detail::edge_bubble(m, s) * coefficients.row(m - 2).transpose();
    }
  }

  Mesh curved = mesh.with_geometry(g, std::move(nodes));
  const auto& rule = quad_triangle(std::min(kMaxExactness, 4 * g));
  for (int c = 0; c < curved.num_cells(); ++c) {
    if (!curved.is_curved(c)) continue;
    const auto check = [&](const Vec2& p) {
      bool ok = true;
      try {
        ok = cell_transform(curved, c, p).det > 0.0;
      } catch (const GeometryError&) {
        ok = false;
      }
      if (!ok)
        throw GeometryError("Jacobian nonpositive in cell " + std::to_string(c) +
                            " after curving (mesh too coarse for the boundary curvature)");
    };
    for (const Vec2& p : rule.points) check(p);
    for (int v = 0; v < 3; ++v) check(ref_vertex(v));
  }
  return curved;
}

}  // namespace hcurlslip
