#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "assembly.hpp"

namespace hcurlslip {

using ScalarField = std::function<double(const Vec2&)>;

/// Exact fields used for error measurement. `curl` is the scalar vorticity.
struct ExactSolution {
  VectorField u;
  ScalarField curl;
  ScalarField p;
  VectorField grad_p;
};

/// Smooth solution on the ellipse:
///   u = (-sin 2x cos 2y, cos 2x sin 2y) = curl of -sin(2x) sin(2y) / 2,
///   p = x sin 3x cos y.
/// Then curl u = -4 sin 2x sin 2y and curl curl u = 8 u.
namespace manufactured {

inline Vec2 velocity(const Vec2& x) {
  return {-std::sin(2 * x.x()) * std::cos(2 * x.y()), std::cos(2 * x.x()) * std::sin(2 * x.y())};
}

inline double vorticity(const Vec2& x) { return -4.0 * std::sin(2 * x.x()) * std::sin(2 * x.y()); }

inline Vec2 curl_curl(const Vec2& x) { return 8.0 * velocity(x); }

inline double pressure(const Vec2& x) { return x.x() * std::sin(3 * x.x()) * std::cos(x.y()); }

inline Vec2 pressure_gradient(const Vec2& x) {
  const double s = std::sin(3 * x.x()), c = std::cos(3 * x.x());
  return {(s + 3 * x.x() * c) * std::cos(x.y()), -x.x() * s * std::sin(x.y())};
}

inline Vec2 source(const Vec2& x) { return curl_curl(x) + pressure_gradient(x); }

/// g = omega + alpha u.t with the same alpha as the Robin operator.
inline double slip_data(const BoundaryPoint& bp) { return vorticity(bp.x) + bp.alpha * velocity(bp.x).dot(bp.tangent); }

/// z = u.n with the discrete outward normal.
inline double normal_data(const BoundaryPoint& bp) { return velocity(bp.x).dot(bp.normal); }

inline ExactSolution exact() { return {velocity, vorticity, pressure, pressure_gradient}; }

/// Largest relative mismatch between the hand-coded derivatives and central
/// differences with step `step`, over the given points. Checks curl u,
/// curl curl u, grad p and div u = 0.
inline double finite_difference_mismatch(const std::vector<Vec2>& points, double step = 1e-6) {
  const Vec2 ex(step, 0.0), ey(0.0, step);
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  double worst = 0.0;
  for (const Vec2& x : points) {
    const Vec2 ux = (velocity(x + ex) - velocity(x - ex)) / (2 * step);
    const Vec2 uy = (velocity(x + ey) - velocity(x - ey)) / (2 * step);
    worst = std::max(worst, rel(ux.y() - uy.x(), vorticity(x)));
    worst = std::max(worst, std::abs(ux.x() + uy.y()) / std::max(1.0, ux.norm() + uy.norm()));
    const double wx = (vorticity(x + ex) - vorticity(x - ex)) / (2 * step);
    const double wy = (vorticity(x + ey) - vorticity(x - ey)) / (2 * step);
    const Vec2 cc = curl_curl(x);
    worst = std::max(worst, std::max(rel(wy, cc.x()), rel(-wx, cc.y())));
    const Vec2 gp = pressure_gradient(x);
    worst = std::max(worst, rel((pressure(x + ex) - pressure(x - ex)) / (2 * step), gp.x()));
    worst = std::max(worst, rel((pressure(x + ey) - pressure(x - ey)) / (2 * step), gp.y()));
  }
  return worst;
}

}  // namespace manufactured

}  // namespace hcurlslip
