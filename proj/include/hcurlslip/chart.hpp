#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include "common.hpp"

namespace hcurlslip {

/// Circular arc, angles t in [t0, t1] traversed by increasing t when
/// orientation = +1 (domain inside the circle) and by decreasing t when
/// orientation = -1 (domain outside, i.e. a hole).
struct CircleArc {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  int orientation = 1;
  double t0 = 0.0;
  double t1 = 2 * std::numbers::pi;
};

/// Elliptic arc (a cos t, b sin t) + center, traversed counterclockwise.
struct EllipseArc {
  Vec2 center = Vec2::Zero();
  double a = 1.0;
  double b = 0.5;
  double t0 = 0.0;
  double t1 = 2 * std::numbers::pi;
};

struct SegmentArc {
  Vec2 p0;
  Vec2 p1;
};

using ArcShape = std::variant<CircleArc, EllipseArc, SegmentArc>;

struct ChartArc {
  ArcShape shape;
  BoundaryTag tag = BoundaryTag::slip;
  int component = 0;
};

/// Nearest point on an arc together with the local frame there.
struct ArcProjection {
  Vec2 point;
  double distance = 0.0;
  Vec2 tangent;         // unit, domain on the left
  Vec2 normal;          // unit, outward
  double curvature = 0; // signed: positive when the arc turns toward the domain
};

/// Piecewise analytic description of the domain boundary.
class BoundaryChart {
 public:
  BoundaryChart() = default;
  explicit BoundaryChart(std::vector<ChartArc> arcs) : arcs_(std::move(arcs)) {}

  const std::vector<ChartArc>& arcs() const { return arcs_; }
  std::size_t size() const { return arcs_.size(); }
  const ChartArc& arc(int i) const { return arcs_.at(i); }
  void set_tag(int i, BoundaryTag tag) { arcs_.at(i).tag = tag; }

  bool is_curved(int i) const { return !std::holds_alternative<SegmentArc>(arcs_.at(i).shape); }

  /// Nearest-point projection onto arc `i`.
  ArcProjection project(int i, const Vec2& x) const {
    return std::visit([&](const auto& shape) { return project_onto(shape, x); }, arcs_.at(i).shape);
  }

  /// Arc containing `x` within `tolerance`; the closest one if several do.
  std::optional<int> locate(const Vec2& x, double tolerance = 1e-8) const {
    std::optional<int> best;
    double best_distance = tolerance;
    for (int i = 0; i < int(arcs_.size()); ++i) {
      const double d = project(i, x).distance;
      if (d <= best_distance) {
        best = i;
        best_distance = d;
      }
    }
    return best;
  }

  /// Arc carrying a straight facet with endpoints p0, p1 (both endpoints must
  /// lie on it); ties are broken by the distance of the chord midpoint.
  std::optional<int> match_facet(const Vec2& p0, const Vec2& p1, double tolerance = 1e-9) const {
    std::optional<int> best;
    double best_mid = 0.0;
    for (int i = 0; i < int(arcs_.size()); ++i) {
      if (project(i, p0).distance > tolerance || project(i, p1).distance > tolerance) continue;
      const double mid = project(i, 0.5 * (p0 + p1)).distance;
      if (!best || mid < best_mid) {
        best = i;
        best_mid = mid;
      }
    }
    return best;
  }

  /// Length of arc `i`.
  double length(int i) const {
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, CircleArc>) {
            return s.radius * std::abs(s.t1 - s.t0);
          } else if constexpr (std::is_same_v<T, SegmentArc>) {
            return (s.p1 - s.p0).norm();
          } else {
            return ellipse_length(s, s.t0, s.t1);
          }
        },
        arcs_.at(i).shape);
  }

  /// Point at arc length `sigma` from the start of arc `i` (in traversal order).
  Vec2 point_at_arclength(int i, double sigma) const {
    return std::visit(
        [sigma](const auto& s) -> Vec2 {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, CircleArc>) {
            const double t = s.orientation > 0 ? s.t0 + sigma / s.radius : s.t1 - sigma / s.radius;
            return s.center + s.radius * Vec2(std::cos(t), std::sin(t));
          } else if constexpr (std::is_same_v<T, SegmentArc>) {
            const double len = (s.p1 - s.p0).norm();
            return s.p0 + (sigma / len) * (s.p1 - s.p0);
          } else {
            const double t = ellipse_parameter_at(s, sigma);
            return s.center + Vec2(s.a * std::cos(t), s.b * std::sin(t));
          }
        },
        arcs_.at(i).shape);
  }

  /// Start and end points of arc `i` in traversal order.
  std::pair<Vec2, Vec2> endpoints(int i) const { return {point_at_arclength(i, 0.0), point_at_arclength(i, length(i))}; }

  /// Arcs of every component must chain end-to-start and close up.
  void validate(double tolerance = 1e-10) const {
    std::vector<int> components;
    for (const auto& a : arcs_)
      if (std::find(components.begin(), components.end(), a.component) == components.end())
        components.push_back(a.component);
    for (int c : components) {
      std::vector<int> ids;
      for (int i = 0; i < int(arcs_.size()); ++i)
        if (arcs_[i].component == c) ids.push_back(i);
      for (std::size_t j = 0; j < ids.size(); ++j) {
        const Vec2 end = endpoints(ids[j]).second;
        const Vec2 next = endpoints(ids[(j + 1) % ids.size()]).first;
        if ((end - next).norm() > tolerance)
          throw GeometryError("boundary chart component " + std::to_string(c) + " is not a closed loop");
      }
    }
  }

 private:
  static ArcProjection project_onto(const CircleArc& s, const Vec2& x) {
    Vec2 r = x - s.center;
    double t = std::atan2(r.y(), r.x());
    t = clamp_angle(t, s.t0, s.t1);
    const Vec2 dir(std::cos(t), std::sin(t));
    ArcProjection p;
    p.point = s.center + s.radius * dir;
    p.distance = (x - p.point).norm();
    p.tangent = s.orientation * Vec2(-dir.y(), dir.x());
    p.normal = Vec2(p.tangent.y(), -p.tangent.x());
    p.curvature = s.orientation / s.radius;
    return p;
  }

  static ArcProjection project_onto(const EllipseArc& s, const Vec2& x) {
    const Vec2 r = x - s.center;
    double t = std::atan2(r.y() / s.b, r.x() / s.a);
    // Newton on (P(t) - r) . P'(t) = 0.
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const double c = std::cos(t), sn = std::sin(t);
      const Vec2 p(s.a * c, s.b * sn), dp(-s.a * sn, s.b * c), ddp(-s.a * c, -s.b * sn);
      const double f = (p - r).dot(dp);
      const double df = dp.squaredNorm() + (p - r).dot(ddp);
      const double step = f / df;
      t -= step;
      if (std::abs(step) < 1e-14) {
        converged = true;
        break;
      }
    }
    if (!converged) throw GeometryError("nearest-point projection onto ellipse did not converge");
    t = clamp_angle(t, s.t0, s.t1);
    const double c = std::cos(t), sn = std::sin(t);
    ArcProjection p;
    p.point = s.center + Vec2(s.a * c, s.b * sn);
    p.distance = (x - p.point).norm();
    const Vec2 dp(-s.a * sn, s.b * c);
    p.tangent = dp.normalized();
    p.normal = Vec2(p.tangent.y(), -p.tangent.x());
    p.curvature = s.a * s.b / std::pow(s.a * s.a * sn * sn + s.b * s.b * c * c, 1.5);
    return p;
  }

  static ArcProjection project_onto(const SegmentArc& s, const Vec2& x) {
    const Vec2 d = s.p1 - s.p0;
    const double tau = std::clamp((x - s.p0).dot(d) / d.squaredNorm(), 0.0, 1.0);
    ArcProjection p;
    p.point = s.p0 + tau * d;
    p.distance = (x - p.point).norm();
    p.tangent = d.normalized();
    p.normal = Vec2(p.tangent.y(), -p.tangent.x());
    p.curvature = 0.0;
    return p;
  }

  // Maps an angle into [t0, t1] modulo 2 pi, or to the nearer endpoint.
  static double clamp_angle(double t, double t0, double t1) {
    const double two_pi = 2 * std::numbers::pi;
    if (t1 - t0 >= two_pi - 1e-14) return t;
    double shifted = t0 + std::fmod(std::fmod(t - t0, two_pi) + two_pi, two_pi);
    if (shifted <= t1) return shifted;
    const double to_end = shifted - t1;
    const double to_start = t0 + two_pi - shifted;
    return to_end < to_start ? t1 : t0;
  }

  static double ellipse_speed(const EllipseArc& s, double t) {
    return std::hypot(s.a * std::sin(t), s.b * std::cos(t));
  }

  static double ellipse_length(const EllipseArc& s, double ta, double tb) {
    // Composite 8-point Gauss on 64 panels; the integrand is analytic.
    static const double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
    static const double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    const int panels = 64;
    const double hp = (tb - ta) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = ta + (p + 0.5) * hp;
      for (int q = 0; q < 4; ++q) {
        sum += w[q] * (ellipse_speed(s, mid + 0.5 * hp * x[q]) + ellipse_speed(s, mid - 0.5 * hp * x[q]));
      }
    }
    return 0.5 * hp * sum;
  }

  static double ellipse_parameter_at(const EllipseArc& s, double sigma) {
    const double total = ellipse_length(s, s.t0, s.t1);
    double t = s.t0 + (s.t1 - s.t0) * sigma / total;
    for (int it = 0; it < 50; ++it) {
      const double step = (ellipse_length(s, s.t0, t) - sigma) / ellipse_speed(s, t);
      t -= step;
      if (std::abs(step) < 1e-14) break;
    }
    return t;
  }

  std::vector<ChartArc> arcs_;
};

}  // namespace hcurlslip
