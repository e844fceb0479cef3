#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "chart.hpp"
#include "mesh.hpp"

namespace hcurlslip {

/// Built-in benchmark domains. `disk` (unit radius) is the full-slip domain
/// used for kernel detection.
enum class DomainKind { ellipse, disk, annulus, unit_square, half_disk, square_minus_disk };

inline DomainKind parse_domain_kind(const std::string& name) {
  static const std::map<std::string, DomainKind> names = {
      {"ellipse", DomainKind::ellipse},     {"disk", DomainKind::disk},
      {"annulus", DomainKind::annulus},     {"unit_square", DomainKind::unit_square},
      {"half_disk", DomainKind::half_disk}, {"square_minus_disk", DomainKind::square_minus_disk}};
  auto it = names.find(name);
  if (it == names.end()) throw std::invalid_argument("unknown domain '" + name + "'");
  return it->second;
}

struct DomainSpec {
  DomainKind kind = DomainKind::unit_square;
  double h = 0.25;
  int geometry_order = 1;
};

struct GeneratedDomain {
  Mesh mesh;
  BoundaryChart chart;
};

namespace detail {

/// Triangulates the strip between two open point rows whose nodes carry
/// increasing fractional positions from 0 to 1.
inline void zipper(const std::vector<int>& a, const std::vector<double>& fa, const std::vector<int>& b,
                   const std::vector<double>& fb, const std::vector<Vec2>& x,
                   std::vector<std::array<int, 3>>& cells) {
  std::size_t i = 0, j = 0;
  while (i + 1 < a.size() || j + 1 < b.size()) {
    bool advance_a;
    if (i + 1 == a.size()) {
      advance_a = false;
    } else if (j + 1 == b.size()) {
      advance_a = true;
    } else if (std::abs(fa[i + 1] - fb[j + 1]) > 1e-12) {
      advance_a = fa[i + 1] < fb[j + 1];
    } else {
      advance_a = (x[a[i + 1]] - x[b[j]]).norm() <= (x[a[i]] - x[b[j + 1]]).norm();
    }
    if (advance_a) {
      cells.push_back({a[i], b[j], a[i + 1]});
      ++i;
    } else {
      cells.push_back({a[i], b[j], b[j + 1]});
      ++j;
    }
  }
}

inline void fan(int center, const std::vector<int>& ring, std::vector<std::array<int, 3>>& cells) {
  for (std::size_t j = 0; j + 1 < ring.size(); ++j) cells.push_back({center, ring[j], ring[j + 1]});
}

struct Row {
  std::vector<int> ids;
  std::vector<double> fractions;
};

// Closed ring of n points at fractions j/n; the first node is repeated at
// fraction 1 so that the open zipper closes the strip.
inline Row closed_row(std::vector<Vec2>& x, const std::vector<Vec2>& points) {
  Row r;
  const int n = int(points.size());
  for (int j = 0; j < n; ++j) {
    r.ids.push_back(int(x.size()));
    r.fractions.push_back(double(j) / n);
    x.push_back(points[j]);
  }
  r.ids.push_back(r.ids.front());
  r.fractions.push_back(1.0);
  return r;
}

/// Tags boundary edges from the chart and builds the mesh.
inline Mesh finalize(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells, const BoundaryChart& chart) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& c : cells)
    for (const auto& le : kRefEdges) count[std::minmax(c[le[0]], c[le[1]])]++;
  std::vector<BoundarySegment> boundary;
  std::map<int, int> per_component;
  for (const auto& [key, n] : count) {
    if (n != 1) continue;
    const auto arc = chart.match_facet(vertices[key.first], vertices[key.second]);
    if (!arc)
      throw GeometryError("generated boundary edge (" + std::to_string(key.first) + ", " +
                          std::to_string(key.second) + ") lies on no chart arc");
    boundary.push_back({key.first, key.second, chart.arc(*arc).tag, *arc});
    per_component[chart.arc(*arc).component]++;
  }
  for (const auto& [component, n] : per_component)
    if (n < 8)
      throw GeometryError("mesh width too large: boundary component " + std::to_string(component) + " has only " +
                          std::to_string(n) + " facets (need at least 8)");
  return Mesh(std::move(vertices), std::move(cells), boundary);
}

inline int layers(double extent, double h) { return std::max(1, int(std::ceil(extent / h - 1e-12))); }

// Ellipse or disk: center point plus scaled copies of the boundary ring.
inline GeneratedDomain generate_elliptic(double a, double b, double h) {
  BoundaryChart chart(a == b ? std::vector<ChartArc>{{CircleArc{Vec2::Zero(), a, 1}, BoundaryTag::slip, 0}}
                             : std::vector<ChartArc>{{EllipseArc{Vec2::Zero(), a, b}, BoundaryTag::slip, 0}});
  const double perimeter = chart.length(0);
  const int n_layers = layers(0.5 * (a + b), h);
  std::vector<Vec2> x{Vec2::Zero()};
  std::vector<std::array<int, 3>> cells;
  Row previous;
  for (int i = 1; i <= n_layers; ++i) {
    const double scale = double(i) / n_layers;
    const int n = std::max(6, layers(scale * perimeter, h));
    std::vector<Vec2> ring;
    for (int j = 0; j < n; ++j) {
      const Vec2 p = chart.point_at_arclength(0, perimeter * j / n);
      ring.push_back(i == n_layers ? p : Vec2(scale * p));
    }
    Row row = closed_row(x, ring);
    if (i == 1) {
      fan(0, row.ids, cells);
    } else {
      zipper(previous.ids, previous.fractions, row.ids, row.fractions, x, cells);
    }
    previous = std::move(row);
  }
  return {finalize(std::move(x), std::move(cells), chart), chart};
}

inline GeneratedDomain generate_annulus(double h) {
  const double r_in = 1.0, r_out = 4.0;
  BoundaryChart chart({{CircleArc{Vec2::Zero(), r_out, 1}, BoundaryTag::slip, 0},
                       {CircleArc{Vec2::Zero(), r_in, -1}, BoundaryTag::dirichlet, 1}});
  const int n_layers = layers(r_out - r_in, h);
  std::vector<Vec2> x;
  std::vector<std::array<int, 3>> cells;
  Row previous;
  for (int i = 0; i <= n_layers; ++i) {
    const double r = i == n_layers ? r_out : r_in + (r_out - r_in) * i / n_layers;
    const int n = std::max(8, layers(2 * std::numbers::pi * r, h));
    std::vector<Vec2> ring;
    for (int j = 0; j < n; ++j) {
      const double t = 2 * std::numbers::pi * j / n;
      ring.emplace_back(r * std::cos(t), r * std::sin(t));
    }
    Row row = closed_row(x, ring);
    if (i > 0) zipper(previous.ids, previous.fractions, row.ids, row.fractions, x, cells);
    previous = std::move(row);
  }
  return {finalize(std::move(x), std::move(cells), chart), chart};
}

// Structured grid of [0,1]^2 with n = ceil(2/h) subdivisions per side and
// all diagonals running from lower left to upper right.
inline GeneratedDomain generate_unit_square(double h) {
  BoundaryChart chart({{SegmentArc{{0, 0}, {1, 0}}, BoundaryTag::slip, 0},
                       {SegmentArc{{1, 0}, {1, 1}}, BoundaryTag::slip, 0},
                       {SegmentArc{{1, 1}, {0, 1}}, BoundaryTag::dirichlet, 0},
                       {SegmentArc{{0, 1}, {0, 0}}, BoundaryTag::slip, 0}});
  const int n = layers(2.0, h);
  std::vector<Vec2> x;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) x.emplace_back(double(i) / n, double(j) / n);
  std::vector<std::array<int, 3>> cells;
  const auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return {finalize(std::move(x), std::move(cells), chart), chart};
}

// Lower half of the unit disk: open half rings around the origin.
inline GeneratedDomain generate_half_disk(double h) {
  const double pi = std::numbers::pi;
  BoundaryChart chart({{CircleArc{Vec2::Zero(), 1.0, 1, pi, 2 * pi}, BoundaryTag::slip, 0},
                       {SegmentArc{{1, 0}, {-1, 0}}, BoundaryTag::dirichlet, 0}});
  const int n_layers = layers(1.0, h);
  std::vector<Vec2> x{Vec2::Zero()};
  std::vector<std::array<int, 3>> cells;
  Row previous;
  for (int i = 1; i <= n_layers; ++i) {
    const double r = i == n_layers ? 1.0 : double(i) / n_layers;
    const int m = std::max(4, layers(pi * r, h));
    Row row;
    for (int j = 0; j <= m; ++j) {
      const double t = pi + pi * j / m;
      row.ids.push_back(int(x.size()));
      row.fractions.push_back(double(j) / m);
      // Endpoints exactly on the diameter.
      if (j == 0) x.emplace_back(-r, 0.0);
      else if (j == m) x.emplace_back(r, 0.0);
      else x.emplace_back(r * std::cos(t), r * std::sin(t));
    }
    if (i == 1) fan(0, row.ids, cells);
    else zipper(previous.ids, previous.fractions, row.ids, row.fractions, x, cells);
    previous = std::move(row);
  }
  return {finalize(std::move(x), std::move(cells), chart), chart};
}

// 8-by-8 square minus the unit disk. The right half (x >= 0) is built from
// rings blending the half circle into the half square, then mirrored, which
// makes the mesh exactly symmetric about x = 0.
inline GeneratedDomain generate_square_minus_disk(double h) {
  const double pi = std::numbers::pi, L = 4.0;
  BoundaryChart chart({{SegmentArc{{-L, -L}, {L, -L}}, BoundaryTag::dirichlet, 0},
                       {SegmentArc{{L, -L}, {L, L}}, BoundaryTag::dirichlet, 0},
                       {SegmentArc{{L, L}, {-L, L}}, BoundaryTag::dirichlet, 0},
                       {SegmentArc{{-L, L}, {-L, -L}}, BoundaryTag::dirichlet, 0},
                       {CircleArc{Vec2::Zero(), 1.0, -1}, BoundaryTag::slip, 1}});
  // Right half of the square boundary from (0,-L) to (0,L), by arc-length fraction.
  const auto square_point = [L](double u) -> Vec2 {
    const double s = 4 * L * u;
    if (s <= L) return {s, -L};
    if (s <= 3 * L) return {L, -L + (s - L)};
    return {L - (s - 3 * L), L};
  };
  const auto circle_point = [pi](double u) -> Vec2 {
    const double t = -pi / 2 + pi * u;
    return {std::cos(t), std::sin(t)};
  };
  const int n_layers = layers(3.8, h);
  const int quarter = layers(L, h);

  std::vector<Vec2> x;
  std::vector<std::array<int, 3>> half_cells;
  Row previous;
  for (int i = 0; i <= n_layers; ++i) {
    const double tau = double(i) / n_layers;
    const double length = (1 - tau) * pi + tau * 4 * L;
    const int m = i == n_layers ? 4 * quarter : std::max(4, layers(length, h));
    Row row;
    for (int j = 0; j <= m; ++j) {
      const double u = double(j) / m;
      Vec2 p;
      if (i == 0) p = circle_point(u);
      else if (i == n_layers) p = square_point(u);
      else p = (1 - tau) * circle_point(u) + tau * square_point(u);
      if (j == 0 || j == m) p.x() = 0.0;
      row.ids.push_back(int(x.size()));
      row.fractions.push_back(u);
      x.push_back(p);
    }
    if (i > 0) zipper(previous.ids, previous.fractions, row.ids, row.fractions, x, half_cells);
    previous = std::move(row);
  }

  // Mirror: vertices on the axis are shared.
  const int n_half = int(x.size());
  std::vector<int> image(n_half);
  for (int v = 0; v < n_half; ++v) {
    if (x[v].x() == 0.0) {
      image[v] = v;
    } else {
      image[v] = int(x.size());
      x.emplace_back(-x[v].x(), x[v].y());
    }
  }
  std::vector<std::array<int, 3>> cells = half_cells;
  for (const auto& c : half_cells) cells.push_back({image[c[0]], image[c[2]], image[c[1]]});
  return {finalize(std::move(x), std::move(cells), chart), chart};
}

}  // namespace detail

/// Straight mesh of the requested domain together with its boundary chart.
/// Boundary vertices are placed on the chart analytically.
inline GeneratedDomain generate_domain(const DomainSpec& spec) {
  if (!(spec.h > 0.0)) throw std::invalid_argument("mesh width must be positive");
  if (spec.geometry_order < 1) throw std::invalid_argument("geometry order must be >= 1");
  switch (spec.kind) {
    case DomainKind::ellipse: return detail::generate_elliptic(1.0, 0.5, spec.h);
    case DomainKind::disk: return detail::generate_elliptic(1.0, 1.0, spec.h);
    case DomainKind::annulus: return detail::generate_annulus(spec.h);
    case DomainKind::unit_square: return detail::generate_unit_square(spec.h);
    case DomainKind::half_disk: return detail::generate_half_disk(spec.h);
    case DomainKind::square_minus_disk: return detail::generate_square_minus_disk(spec.h);
  }
  throw std::invalid_argument("unknown domain kind");
}

}  // namespace hcurlslip
