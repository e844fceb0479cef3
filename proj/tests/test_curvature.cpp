#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hcurlslip/curvature.hpp"
#include "hcurlslip/curving.hpp"
#include "hcurlslip/mesh_generators.hpp"

using namespace hcurlslip;

namespace {

struct CurvedDomain {
  GeneratedDomain domain;
  Mesh mesh;
};

CurvedDomain curved(DomainKind kind, double h, int g) {
  GeneratedDomain d = generate_domain({kind, h, 1});
  Mesh m = curve_boundary(d.mesh, d.chart, g);
  return {std::move(d), std::move(m)};
}

// Largest |W_geometric - W_analytic| over the points of an edge rule on all
// curved facets; the analytic value is taken at the nearest chart point.
double max_curvature_error(const Mesh& mesh, const BoundaryChart& chart) {
  const WeingartenField geometric(mesh, chart, CurvatureSource::geometric);
  const WeingartenField analytic(mesh, chart, CurvatureSource::analytic);
  const auto& rule = quad_edge(12);
  double worst = 0.0;
  for (int f = 0; f < int(mesh.boundary_facets().size()); ++f) {
    if (!chart.is_curved(mesh.boundary_facets()[f].arc)) continue;
    for (double s : rule.points) worst = std::max(worst, std::abs(geometric(f, s) - analytic(f, s)));
  }
  return worst;
}

}  // namespace

TEST(AnalyticWeingarten, UnitDisk) {
  const GeneratedDomain d = generate_domain({DomainKind::disk, 0.2, 1});
  for (double t : {0.0, 0.7, 2.0, 4.5}) EXPECT_NEAR(analytic_weingarten(d.chart, {std::cos(t), std::sin(t)}), -1.0, 1e-12);
}

TEST(AnalyticWeingarten, EllipseVertex) {
  const GeneratedDomain d = generate_domain({DomainKind::ellipse, 0.2, 1});
  // kappa(t) = ab / (a^2 sin^2 t + b^2 cos^2 t)^(3/2); at t = 0 this is a / b^2.
  const double a = 1.0, b = 0.5;
  EXPECT_NEAR(analytic_weingarten(d.chart, {1.0, 0.0}), -a / (b * b), 1e-10);
  const double t = 1.1;
  const double kappa = a * b / std::pow(a * a * std::sin(t) * std::sin(t) + b * b * std::cos(t) * std::cos(t), 1.5);
  EXPECT_NEAR(analytic_weingarten(d.chart, {a * std::cos(t), b * std::sin(t)}), -kappa, 1e-10);
}

TEST(AnalyticWeingarten, CylinderHoleAndWalls) {
  const GeneratedDomain d = generate_domain({DomainKind::square_minus_disk, 0.5, 1});
  EXPECT_NEAR(analytic_weingarten(d.chart, {0.0, 1.0}), 1.0, 1e-12);
  EXPECT_NEAR(analytic_weingarten(d.chart, {-std::sqrt(0.5), -std::sqrt(0.5)}), 1.0, 1e-12);
  EXPECT_EQ(analytic_weingarten(d.chart, {4.0, 1.3}), 0.0);
}

TEST(AnalyticWeingarten, ConvexOuterBoundaryNonPositive) {
  for (DomainKind kind : {DomainKind::ellipse, DomainKind::disk, DomainKind::half_disk, DomainKind::unit_square}) {
    const GeneratedDomain d = generate_domain({kind, 0.2, 1});
    for (const auto& f : d.mesh.boundary_facets())
      for (int v : d.mesh.edge(f.edge)) EXPECT_LE(analytic_weingarten(d.chart, d.mesh.vertex(v)), 1e-14);
  }
}

TEST(AnalyticWeingarten, OffChartRejected) {
  const GeneratedDomain d = generate_domain({DomainKind::disk, 0.2, 1});
  EXPECT_THROW(analytic_weingarten(d.chart, {0.5, 0.0}), GeometryError);
  EXPECT_NO_THROW(analytic_weingarten(d.chart, {1.0 + 5e-9, 0.0}));
}

TEST(GeometricWeingarten, StraightFacetsVanish) {
  const auto c = curved(DomainKind::unit_square, 0.25, 4);
  const WeingartenField w(c.mesh, c.domain.chart, CurvatureSource::geometric);
  for (int f = 0; f < int(c.mesh.boundary_facets().size()); ++f)
    for (double s : {0.0, 0.3, 1.0}) EXPECT_EQ(w(f, s), 0.0);
  // Segments of a mixed boundary are flat too.
  const auto half = curved(DomainKind::half_disk, 0.25, 4);
  const WeingartenField wh(half.mesh, half.domain.chart, CurvatureSource::geometric);
  for (int f = 0; f < int(half.mesh.boundary_facets().size()); ++f)
    if (!half.domain.chart.is_curved(half.mesh.boundary_facets()[f].arc)) EXPECT_NEAR(wh(f, 0.4), 0.0, 1e-12);
}

TEST(GeometricWeingarten, AnnulusOuterCircle) {
  const auto c = curved(DomainKind::annulus, 0.25, 5);
  const WeingartenField w(c.mesh, c.domain.chart, CurvatureSource::geometric);
  const auto& rule = quad_edge(12);
  double worst_outer = 0.0, worst_inner = 0.0;
  for (int f = 0; f < int(c.mesh.boundary_facets().size()); ++f) {
    const bool outer = c.mesh.boundary_facets()[f].arc == 0;
    for (double s : rule.points) {
      if (outer) worst_outer = std::max(worst_outer, std::abs(w(f, s) + 0.25));
      else worst_inner = std::max(worst_inner, std::abs(w(f, s) - 1.0));
    }
  }
  EXPECT_LE(worst_outer, 1e-6);
  EXPECT_LE(worst_inner, 1e-2);  // the hole is resolved by far fewer facets per radian
}

TEST(GeometricWeingarten, ConvergenceOrder) {
  for (DomainKind kind : {DomainKind::disk, DomainKind::ellipse}) {
    for (int g : {3, 4, 5}) {
      SCOPED_TRACE(g);
      const auto coarse = curved(kind, 0.2, g);
      const auto fine = curved(kind, 0.1, g);
      const double e0 = max_curvature_error(coarse.mesh, coarse.domain.chart);
      const double e1 = max_curvature_error(fine.mesh, fine.domain.chart);
      const double rate = std::log(e0 / e1) / std::log(coarse.mesh.max_edge_length() / fine.mesh.max_edge_length());
      EXPECT_GE(rate, g - 1.3) << "errors " << e0 << " " << e1;
    }
  }
}

TEST(GeometricWeingarten, HigherOrderGeometryIsMoreAccurate) {
  const auto g3 = curved(DomainKind::ellipse, 0.1, 3);
  const auto g5 = curved(DomainKind::ellipse, 0.1, 5);
  const double e3 = max_curvature_error(g3.mesh, g3.domain.chart);
  const double e5 = max_curvature_error(g5.mesh, g5.domain.chart);
  EXPECT_LT(e5, 0.1 * e3) << e3 << " " << e5;
}

TEST(WeingartenSign, RigidRotationBoundaryResidual) {
  // u = (-y, x) has scalar curl 2. With the tangent keeping the domain on the
  // left, omega + 2 W u.t must vanish on both annulus circles.
  const auto c = curved(DomainKind::annulus, 0.25, 5);
  const auto& chart = c.domain.chart;
  const auto& rule = quad_edge(12);
  double worst = 0.0;
  for (const auto& f : c.mesh.boundary_facets())
    for (double s : rule.points) {
      const Vec2 x = map_point(c.mesh, f.cell, ref_edge_point(f.local_edge, s));
      const ArcProjection p = chart.project(f.arc, x);
      const Vec2 u(-p.point.y(), p.point.x());
      const double residual = 2.0 + 2.0 * analytic_weingarten(chart, p.point) * u.dot(p.tangent);
      worst = std::max(worst, std::abs(residual));
    }
  EXPECT_LE(worst, 1e-12);
}

TEST(WeingartenSign, GeometricHoleIsPositive) {
  const auto c = curved(DomainKind::square_minus_disk, 0.25, 5);
  const WeingartenField w(c.mesh, c.domain.chart, CurvatureSource::geometric);
  for (int f = 0; f < int(c.mesh.boundary_facets().size()); ++f)
    if (c.mesh.boundary_facets()[f].arc == 4) EXPECT_NEAR(w(f, 0.5), 1.0, 1e-3);
}

TEST(WeingartenField, TabulateMatchesPointwise) {
  const auto c = curved(DomainKind::ellipse, 0.2, 4);
  const WeingartenField w(c.mesh, c.domain.chart, CurvatureSource::geometric);
  const auto& rule = quad_edge(6);
  const auto table = w.tabulate(rule);
  ASSERT_EQ(table.size(), c.mesh.boundary_facets().size());
  for (std::size_t f = 0; f < table.size(); ++f)
    for (std::size_t q = 0; q < rule.size(); ++q) EXPECT_EQ(table[f][q], w(int(f), rule.points[q]));
  EXPECT_EQ(parse_curvature_source("analytic"), CurvatureSource::analytic);
  EXPECT_THROW(parse_curvature_source("exact"), std::invalid_argument);
}
