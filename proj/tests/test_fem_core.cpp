#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hcurlslip/curving.hpp"
#include "hcurlslip/dofmap.hpp"
#include "hcurlslip/evaluation.hpp"
#include "hcurlslip/fe_values.hpp"
#include "hcurlslip/mesh_generators.hpp"

using namespace hcurlslip;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Integral of x^a y^b over the reference triangle: a! b! / (a + b + 2)!.
double monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

std::vector<Vec2> sample_points(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec2> pts;
  while (int(pts.size()) < n) {
    const Vec2 p(u(rng), u(rng));
    if (p.sum() <= 1.0) pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST(Quadrature, TriangleAreaAndMonomial) {
  const auto& r = quad_triangle(4);
  double area = 0.0, m22 = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) {
    area += r.weights[q];
    m22 += r.weights[q] * std::pow(r.points[q].x(), 2) * std::pow(r.points[q].y(), 2);
  }
  EXPECT_NEAR(area, 0.5, 1e-15);
  EXPECT_NEAR(m22, 1.0 / 180.0, 1e-15);
}

TEST(Quadrature, TriangleExactForAllDegrees) {
  for (int e = 0; e <= kMaxExactness; ++e) {
    const auto& r = quad_triangle(e);
    for (double w : r.weights) EXPECT_GT(w, 0.0);
    for (int d = 0; d <= e; ++d)
      for (int a = 0; a <= d; ++a) {
        double s = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q)
          s += r.weights[q] * std::pow(r.points[q].x(), a) * std::pow(r.points[q].y(), d - a);
        const double exact = monomial_integral(a, d - a);
        EXPECT_NEAR(s / exact, 1.0, 1e-13) << "exactness " << e << " monomial " << a << "," << d - a;
      }
  }
}

TEST(Quadrature, EdgeRule) {
  for (int e = 0; e <= kMaxExactness; ++e) {
    const auto& r = quad_edge(e);
    double total = 0.0;
    for (double w : r.weights) {
      EXPECT_GT(w, 0.0);
      total += w;
    }
    EXPECT_NEAR(total, 1.0, 1e-14);
    for (int d = 0; d <= e; ++d) {
      double s = 0.0;
      for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q], d);
      EXPECT_NEAR(s * (d + 1), 1.0, 1e-13);
    }
  }
}

TEST(Quadrature, RejectsUnavailableExactness) {
  EXPECT_THROW(quad_triangle(kMaxExactness + 1), std::invalid_argument);
  EXPECT_THROW(quad_edge(-1), std::invalid_argument);
}

TEST(Lagrange, LinearBarycenter) {
  const Vector v = lagrange_element(1).values(Vec2(1.0 / 3, 1.0 / 3));
  ASSERT_EQ(v.size(), 3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(v(i), 1.0 / 3, 1e-15);
}

TEST(Lagrange, PartitionOfUnityAndDimension) {
  for (int m = 1; m <= 6; ++m) {
    const auto& el = lagrange_element(m);
    EXPECT_EQ(el.size(), (m + 1) * (m + 2) / 2);
    for (const Vec2& p : sample_points(20, 3 + m)) {
      EXPECT_NEAR(el.values(p).sum(), 1.0, 1e-13);
      EXPECT_LT(el.gradients(p).colwise().sum().norm(), 1e-11);
    }
  }
}

TEST(Lagrange, CubicNodalDuality) {
  const auto& el = lagrange_element(3);
  Matrix M(10, 10);
  for (int i = 0; i < 10; ++i) M.row(i) = el.values(el.nodes()[i]).transpose();
  EXPECT_LT((M - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Lagrange, DerivativesMatchFiniteDifferences) {
  const double h = 1e-5;
  for (int m = 1; m <= 6; ++m) {
    const auto& el = lagrange_element(m);
    const Vec2 p(0.21, 0.33), ex(h, 0), ey(0, h);
    const Eigen::MatrixX2d g = el.gradients(p);
    const Eigen::MatrixX3d H = el.hessians(p);
    const Vector fx = (el.values(p + ex) - el.values(p - ex)) / (2 * h);
    const Vector fy = (el.values(p + ey) - el.values(p - ey)) / (2 * h);
    EXPECT_LT((fx - g.col(0)).cwiseAbs().maxCoeff(), 1e-6 * (1 + g.cwiseAbs().maxCoeff()));
    EXPECT_LT((fy - g.col(1)).cwiseAbs().maxCoeff(), 1e-6 * (1 + g.cwiseAbs().maxCoeff()));
    const Eigen::MatrixX2d gxx = (el.gradients(p + ex) - el.gradients(p - ex)) / (2 * h);
    const Eigen::MatrixX2d gyy = (el.gradients(p + ey) - el.gradients(p - ey)) / (2 * h);
    const double scale = 1 + H.cwiseAbs().maxCoeff();
    EXPECT_LT((gxx.col(0) - H.col(0)).cwiseAbs().maxCoeff(), 1e-5 * scale);
    EXPECT_LT((gxx.col(1) - H.col(1)).cwiseAbs().maxCoeff(), 1e-5 * scale);
    EXPECT_LT((gyy.col(1) - H.col(2)).cwiseAbs().maxCoeff(), 1e-5 * scale);
  }
}

TEST(Nedelec, Dimensions) {
  EXPECT_EQ(nedelec_element(1).size(), 3);
  EXPECT_EQ(nedelec_element(2).size(), 8);
  EXPECT_EQ(nedelec_element(3).size(), 15);
  EXPECT_THROW(nedelec_element(4), std::invalid_argument);
}

TEST(Nedelec, DofBasisDuality) {
  for (int k = 1; k <= 3; ++k) {
    const auto& el = nedelec_element(k);
    for (int j = 0; j < el.size(); ++j) {
      const auto basis_j = [&](const Vec2& p) -> Vec2 {
        Eigen::MatrixX2d v;
        Vector c;
        el.evaluate(p, v, c);
        return v.row(j).transpose();
      };
      const Vector d = el.apply_dofs(basis_j, 2 * k + 2);
      for (int i = 0; i < el.size(); ++i) EXPECT_NEAR(d(i), i == j ? 1.0 : 0.0, 1e-12) << "k=" << k;
    }
  }
}

TEST(Nedelec, WhitneyFunctionsHaveConstantCurl) {
  const auto& el = nedelec_element(1);
  Eigen::MatrixX2d v0;
  Vector c0;
  el.evaluate(Vec2(0.1, 0.1), v0, c0);
  for (const Vec2& p : sample_points(10, 1)) {
    Eigen::MatrixX2d v;
    Vector c;
    el.evaluate(p, v, c);
    EXPECT_LT((c - c0).cwiseAbs().maxCoeff(), 1e-13);
  }
  // Each Whitney function has unit tangential moment on its edge, so by Stokes
  // its curl is 1 / |K| = 2.
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(c0(i), 2.0, 1e-12);
}

TEST(Nedelec, CurlsMatchFiniteDifferences) {
  const double h = 1e-6;
  for (int k = 1; k <= 3; ++k) {
    const auto& el = nedelec_element(k);
    for (const Vec2& p : sample_points(5, 11)) {
      Eigen::MatrixX2d v, vxp, vxm, vyp, vym;
      Vector c, tmp;
      el.evaluate(p, v, c);
      el.evaluate(p + Vec2(h, 0), vxp, tmp);
      el.evaluate(p - Vec2(h, 0), vxm, tmp);
      el.evaluate(p + Vec2(0, h), vyp, tmp);
      el.evaluate(p - Vec2(0, h), vym, tmp);
      const Vector fd = (vxp.col(1) - vxm.col(1) - vyp.col(0) + vym.col(0)) / (2 * h);
      EXPECT_LT((fd - c).cwiseAbs().maxCoeff(), 1e-5 * (1 + c.cwiseAbs().maxCoeff()));
    }
  }
}

// Least-squares fit of sampled fields by the basis; residual measures span membership.
double span_residual(int k, const std::function<Vec2(const Vec2&)>& field, const std::vector<Vec2>& pts) {
  const auto& el = nedelec_element(k);
  Matrix M(2 * pts.size(), el.size());
  Vector rhs(2 * pts.size());
  for (std::size_t q = 0; q < pts.size(); ++q) {
    Eigen::MatrixX2d v;
    Vector c;
    el.evaluate(pts[q], v, c);
    M.row(2 * q) = v.col(0).transpose();
    M.row(2 * q + 1) = v.col(1).transpose();
    const Vec2 f = field(pts[q]);
    rhs(2 * q) = f.x();
    rhs(2 * q + 1) = f.y();
  }
  const Vector coef = M.colPivHouseholderQr().solve(rhs);
  return (M * coef - rhs).norm();
}

TEST(Nedelec, QuadraticContainsGradientsOfBubbles) {
  const auto pts = sample_points(16, 5);
  // P2 edge bubbles lambda_a lambda_b and their gradients.
  const auto grad_bubble = [](int a, int b) {
    return [a, b](const Vec2& p) -> Vec2 {
      const std::array<double, 3> l = {1 - p.x() - p.y(), p.x(), p.y()};
      const std::array<Vec2, 3> g = {Vec2(-1, -1), Vec2(1, 0), Vec2(0, 1)};
      return l[a] * g[b] + l[b] * g[a];
    };
  };
  EXPECT_LT(span_residual(2, grad_bubble(0, 1), pts), 1e-10);
  EXPECT_LT(span_residual(2, grad_bubble(1, 2), pts), 1e-10);
  EXPECT_LT(span_residual(2, grad_bubble(2, 0), pts), 1e-10);
}

TEST(Nedelec, FirstKindStructure) {
  const auto pts = sample_points(40, 9);
  for (int k = 1; k <= 3; ++k) {
    // Complete P_{k-1} vector fields are contained.
    for (int d = 0; d <= k - 1; ++d)
      for (int a = 0; a <= d; ++a) {
        EXPECT_LT(span_residual(k, [&](const Vec2& p) { return Vec2(std::pow(p.x(), a) * std::pow(p.y(), d - a), 0); }, pts), 1e-10);
        EXPECT_LT(span_residual(k, [&](const Vec2& p) { return Vec2(0, std::pow(p.x(), a) * std::pow(p.y(), d - a)); }, pts), 1e-10);
      }
    // Gradients of P_k are contained.
    for (int a = 0; a <= k; ++a) {
      const int b = k - a;
      const auto grad = [a, b](const Vec2& p) -> Vec2 {
        return {a > 0 ? a * std::pow(p.x(), a - 1) * std::pow(p.y(), b) : 0.0,
                b > 0 ? b * std::pow(p.x(), a) * std::pow(p.y(), b - 1) : 0.0};
      };
      EXPECT_LT(span_residual(k, grad, pts), 1e-10);
    }
    // The full P_k is not: (x^k, 0) has a nonzero residual.
    EXPECT_GT(span_residual(k, [&](const Vec2& p) { return Vec2(std::pow(p.x(), k), 0); }, pts), 1e-3);
  }
}

TEST(CovariantPiola, IdentityAndScaling) {
  ElementTransform t;
  t.jacobian = Mat2::Identity();
  t.det = 1.0;
  t.inverse_transpose = Mat2::Identity();
  auto [v, c] = covariant_piola(t, Vec2(0.3, -0.7), 1.5);
  EXPECT_NEAR((v - Vec2(0.3, -0.7)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(c, 1.5, 1e-15);

  t.jacobian = 2 * Mat2::Identity();
  t.det = 4.0;
  t.inverse_transpose = 0.5 * Mat2::Identity();
  std::tie(v, c) = covariant_piola(t, Vec2(0.3, -0.7), 1.5);
  EXPECT_NEAR((v - Vec2(0.15, -0.35)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(c, 1.5 / 4, 1e-15);

  t.det = -1.0;
  EXPECT_THROW(covariant_piola(t, Vec2(1, 0), 0.0), GeometryError);
}

TEST(CovariantPiola, AffineWhitneyMomentPreserved) {
  // One physical triangle; the tangential moment of each mapped Whitney
  // function over each physical edge matches the reference moment.
  Mesh mesh({{0.2, 0.1}, {1.3, 0.4}, {0.5, 1.2}}, {{0, 1, 2}},
            {{0, 1, BoundaryTag::slip, -1}, {1, 2, BoundaryTag::slip, -1}, {2, 0, BoundaryTag::slip, -1}});
  const auto& el = nedelec_element(1);
  const auto& rule = quad_edge(6);
  for (int e = 0; e < 3; ++e) {
    const Vec2 a = mesh.vertex(mesh.cell(0)[kRefEdges[e][0]]), b = mesh.vertex(mesh.cell(0)[kRefEdges[e][1]]);
    Vector moment = Vector::Zero(3);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 ref = ref_edge_point(e, rule.points[q]);
      Eigen::MatrixX2d v;
      Vector c;
      el.evaluate(ref, v, c);
      const ElementTransform t = cell_transform(mesh, 0, ref);
      for (int i = 0; i < 3; ++i) moment(i) += rule.weights[q] * covariant_piola(t, v.row(i).transpose(), c(i)).first.dot(b - a);
    }
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(moment(i), i == e ? 1.0 : 0.0, 1e-13);
  }
}

TEST(CovariantPiola, MappedCurlsMatchFiniteDifferencesOnCurvedCells) {
  const auto dom = generate_domain({DomainKind::ellipse, 0.4, 1});
  const Mesh mesh = curve_boundary(dom.mesh, dom.chart, 4);
  const double h = 1e-6;
  int checked = 0;
  for (int c = 0; c < mesh.num_cells() && checked < 6; ++c) {
    if (!mesh.is_curved(c)) continue;
    ++checked;
    for (int k = 1; k <= 3; ++k) {
      const auto& el = nedelec_element(k);
      const Vec2 ref(0.3, 0.25);
      const ElementTransform t = cell_transform(mesh, c, ref);
      Eigen::MatrixX2d v;
      Vector cu;
      el.evaluate(ref, v, cu);
      // Physical field at x + dx: locate by inverting the affine part of the
      // local linearization, then one Newton correction.
      const auto physical = [&](const Vec2& x) -> Eigen::MatrixX2d {
        Vec2 r = ref;
        for (int it = 0; it < 30; ++it) {
          const ElementTransform tt = cell_transform(mesh, c, r);
          r += tt.jacobian.inverse() * (x - tt.point);
        }
        const ElementTransform tt = cell_transform(mesh, c, r);
        Eigen::MatrixX2d vv;
        Vector cc;
        el.evaluate(r, vv, cc);
        return vv * tt.inverse_transpose.transpose();
      };
      const Eigen::MatrixX2d xp = physical(t.point + Vec2(h, 0)), xm = physical(t.point - Vec2(h, 0));
      const Eigen::MatrixX2d yp = physical(t.point + Vec2(0, h)), ym = physical(t.point - Vec2(0, h));
      const Vector fd = (xp.col(1) - xm.col(1) - yp.col(0) + ym.col(0)) / (2 * h);
      const Vector exact = cu / t.det;
      EXPECT_LT((fd - exact).cwiseAbs().maxCoeff(), 1e-5 * (1 + exact.cwiseAbs().maxCoeff())) << "k=" << k;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(CovariantPiola, TangentialContinuityAcrossSharedEdges) {
  const auto dom = generate_domain({DomainKind::ellipse, 0.4, 1});
  const Mesh mesh = curve_boundary(dom.mesh, dom.chart, 5);
  for (int k = 1; k <= 3; ++k) {
    const DofMap V = DofMap::nedelec(mesh, k);
    const auto& el = nedelec_element(k);
    const auto& rule = quad_edge(8);
    double worst = 0.0;
    for (int e = 0; e < mesh.num_edges(); ++e) {
      if (mesh.is_boundary_edge(e)) continue;
      const auto [c0, c1] = mesh.edge_cells(e);
      int l0 = 0, l1 = 0;
      while (mesh.cell_edges(c0)[l0] != e) ++l0;
      while (mesh.cell_edges(c1)[l1] != e) ++l1;
      const Vec2 t = (mesh.vertex(mesh.edge(e)[1]) - mesh.vertex(mesh.edge(e)[0])).normalized();
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double s = rule.points[q];
        const Vec2 r0 = ref_edge_point(l0, s), r1 = ref_edge_point(l1, 1 - s);
        const ElementTransform t0 = cell_transform(mesh, c0, r0), t1 = cell_transform(mesh, c1, r1);
        ASSERT_LT((t0.point - t1.point).norm(), 1e-12);
        Eigen::MatrixX2d v0, v1;
        Vector cc;
        el.evaluate(r0, v0, cc);
        el.evaluate(r1, v1, cc);
        for (int i = 0; i < V.local_size(); ++i)
          for (int j = 0; j < V.local_size(); ++j) {
            if (V.dof(c0, i) != V.dof(c1, j)) continue;
            const double a = V.sign(c0, i) * (t0.inverse_transpose * v0.row(i).transpose()).dot(t);
            const double b = V.sign(c1, j) * (t1.inverse_transpose * v1.row(j).transpose()).dot(t);
            worst = std::max(worst, std::abs(a - b));
          }
      }
    }
    EXPECT_LE(worst, 1e-11) << "k=" << k;
  }
}

TEST(CovariantPiola, LowestOrderReproducesRigidRotation) {
  const auto dom = generate_domain({DomainKind::unit_square, 0.5, 1});
  const DofMap V = DofMap::nedelec(dom.mesh, 1);
  const auto rot = [](const Vec2& x) -> Vec2 { return {-x.y(), x.x()}; };
  const Vector coef = interpolate_velocity(dom.mesh, V, rot);
  for (int c = 0; c < dom.mesh.num_cells(); ++c) {
    const auto fv = velocity_values(dom.mesh, V, c, 6);
    double err = 0.0;
    for (std::size_t q = 0; q < fv.jxw.size(); ++q) {
      Vec2 uh = Vec2::Zero();
      for (int i = 0; i < 3; ++i) uh += coef(V.dof(c, i)) * fv.values[q].row(i).transpose();
      err += fv.jxw[q] * (uh - rot(fv.points[q])).squaredNorm();
    }
    EXPECT_LE(std::sqrt(err), 1e-12);
  }
}
