#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hcurlslip {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Role a boundary facet plays when boundary conditions are applied.
enum class BoundaryTag { slip, dirichlet };

inline const char* to_string(BoundaryTag tag) {
  return tag == BoundaryTag::slip ? "slip" : "dirichlet";
}

/// Malformed input file or unsupported content.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate or inverted geometry, failed projections.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorization or eigen-iteration failures.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reference triangle (0,0), (1,0), (0,1). Local edge e runs from
// kRefEdges[e][0] to kRefEdges[e][1], counterclockwise.
inline constexpr std::array<std::array<int, 2>, 3> kRefEdges = {{{0, 1}, {1, 2}, {2, 0}}};

inline Vec2 ref_vertex(int i) {
  switch (i) {
    case 0: return {0.0, 0.0};
    case 1: return {1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

/// Point on local reference edge `e` at parameter s in [0, 1].
inline Vec2 ref_edge_point(int e, double s) {
  const Vec2 a = ref_vertex(kRefEdges[e][0]);
  const Vec2 b = ref_vertex(kRefEdges[e][1]);
  return a + s * (b - a);
}

inline Vec2 ref_edge_direction(int e) {
  return ref_vertex(kRefEdges[e][1]) - ref_vertex(kRefEdges[e][0]);
}

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Legendre polynomial P_n on [-1, 1].
inline double legendre(int n, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace hcurlslip
