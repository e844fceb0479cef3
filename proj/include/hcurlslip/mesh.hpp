#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <vector>

#include "common.hpp"

namespace hcurlslip {

/// Boundary edge given by its two vertices, as produced by generators and readers.
struct BoundarySegment {
  int v0 = -1;
  int v1 = -1;
  BoundaryTag tag = BoundaryTag::slip;
  int arc = -1;  // chart arc carrying the facet, -1 if unknown
};

struct BoundaryFacet {
  int edge = -1;
  int cell = -1;
  int local_edge = -1;
  BoundaryTag tag = BoundaryTag::slip;
  int arc = -1;
};

/// Conforming triangular mesh with global edge orientation (lower to higher
/// vertex index) and optional per-cell polynomial geometry.
///
/// Cells are stored counterclockwise. A curved cell stores the physical
/// positions of the degree-g Lagrange nodes of its geometry map; an empty
/// node list means the cell is affine.
class Mesh {
 public:
  Mesh() = default;

  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells,
       const std::vector<BoundarySegment>& boundary)
      : vertices_(std::move(vertices)), cells_(std::move(cells)) {
    const int nv = num_vertices();
    for (auto& c : cells_) {
      for (int v : c)
        if (v < 0 || v >= nv) throw GeometryError("cell references vertex out of range");
      const double area2 = cross(vertices_[c[1]] - vertices_[c[0]], vertices_[c[2]] - vertices_[c[0]]);
      if (area2 == 0.0) throw GeometryError("degenerate cell");
      if (area2 < 0.0) std::swap(c[1], c[2]);
    }
    build_topology();
    attach_boundary(boundary);
    geometry_nodes_.assign(cells_.size(), {});
  }

  int num_vertices() const { return int(vertices_.size()); }
  int num_cells() const { return int(cells_.size()); }
  int num_edges() const { return int(edges_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::array<int, 3>& cell(int c) const { return cells_[c]; }
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  const std::array<int, 3>& cell_edges(int c) const { return cell_edges_[c]; }
  const std::array<int, 2>& edge_cells(int e) const { return edge_cells_[e]; }
  const std::vector<BoundaryFacet>& boundary_facets() const { return facets_; }

  /// True if local edge `le` of cell `c` runs against the global orientation.
  bool edge_reversed(int c, int le) const {
    return cells_[c][kRefEdges[le][0]] > cells_[c][kRefEdges[le][1]];
  }
  int edge_sign(int c, int le) const { return edge_reversed(c, le) ? -1 : 1; }

  bool is_boundary_edge(int e) const { return edge_cells_[e][1] < 0; }

  int geometry_order() const { return geometry_order_; }
  bool is_curved(int c) const { return !geometry_nodes_[c].empty(); }
  const std::vector<Vec2>& geometry_nodes(int c) const { return geometry_nodes_[c]; }

  /// Copy of this mesh carrying the given geometry. `nodes[c]` empty keeps cell c affine.
  Mesh with_geometry(int order, std::vector<std::vector<Vec2>> nodes) const {
    if (order < 1) throw std::invalid_argument("geometry order must be >= 1");
    if (nodes.size() != cells_.size()) throw std::invalid_argument("geometry node table size mismatch");
    Mesh m = *this;
    m.geometry_order_ = order;
    m.geometry_nodes_ = std::move(nodes);
    return m;
  }

  /// Copy with new boundary tags (indexed like boundary_facets()).
  Mesh with_tags(const std::vector<BoundaryTag>& tags) const {
    if (tags.size() != facets_.size()) throw std::invalid_argument("tag list size mismatch");
    Mesh m = *this;
    for (std::size_t i = 0; i < tags.size(); ++i) m.facets_[i].tag = tags[i];
    return m;
  }

  /// Copy with chart arcs assigned to the boundary facets (indexed like boundary_facets()).
  Mesh with_arcs(const std::vector<int>& arcs) const {
    if (arcs.size() != facets_.size()) throw std::invalid_argument("arc list size mismatch");
    Mesh m = *this;
    for (std::size_t i = 0; i < arcs.size(); ++i) m.facets_[i].arc = arcs[i];
    return m;
  }

  /// Inradius over circumradius of the straight cell, scaled so that the
  /// equilateral triangle scores 1/2.
  double cell_quality(int c) const {
    const Vec2 &a = vertices_[cells_[c][0]], &b = vertices_[cells_[c][1]], &d = vertices_[cells_[c][2]];
    const double la = (b - d).norm(), lb = (a - d).norm(), lc = (a - b).norm();
    const double area = 0.5 * std::abs(cross(b - a, d - a));
    const double inradius = 2 * area / (la + lb + lc);
    const double circumradius = la * lb * lc / (4 * area);
    return inradius / circumradius;
  }

  double min_quality() const {
    double q = 1.0;
    for (int c = 0; c < num_cells(); ++c) q = std::min(q, cell_quality(c));
    return q;
  }

  /// Longest straight edge.
  double max_edge_length() const {
    double h = 0.0;
    for (const auto& e : edges_) h = std::max(h, (vertices_[e[1]] - vertices_[e[0]]).norm());
    return h;
  }

  double edge_length(int e) const { return (vertices_[edges_[e][1]] - vertices_[edges_[e][0]]).norm(); }

  /// Topological invariants; throws GeometryError on violation.
  void check_topology() const {
    int interior = 0, boundary = 0;
    for (int e = 0; e < num_edges(); ++e) {
      if (edges_[e][0] >= edges_[e][1]) throw GeometryError("edge not oriented low-to-high");
      (is_boundary_edge(e) ? boundary : interior)++;
    }
    if (3 * num_cells() != 2 * interior + boundary) throw GeometryError("edge-sharing count mismatch");
    if (int(facets_.size()) != boundary) throw GeometryError("boundary facet count mismatch");
    for (int c = 0; c < num_cells(); ++c)
      for (int le = 0; le < 3; ++le) {
        const auto& e = edges_[cell_edges_[c][le]];
        const int a = cells_[c][kRefEdges[le][0]], b = cells_[c][kRefEdges[le][1]];
        if (std::min(a, b) != e[0] || std::max(a, b) != e[1]) throw GeometryError("cell-edge incidence mismatch");
      }
  }

 private:
  void build_topology() {
    std::map<std::pair<int, int>, int> index;
    cell_edges_.resize(cells_.size());
    for (int c = 0; c < num_cells(); ++c) {
      for (int le = 0; le < 3; ++le) {
        const int a = cells_[c][kRefEdges[le][0]], b = cells_[c][kRefEdges[le][1]];
        const auto key = std::minmax(a, b);
        auto [it, inserted] = index.emplace(std::pair{key.first, key.second}, num_edges());
        if (inserted) {
          edges_.push_back({key.first, key.second});
          edge_cells_.push_back({c, -1});
        } else {
          auto& owners = edge_cells_[it->second];
          if (owners[1] >= 0) throw GeometryError("edge shared by more than two cells");
          owners[1] = c;
        }
        cell_edges_[c][le] = it->second;
      }
    }
    edge_index_ = std::move(index);
  }

  void attach_boundary(const std::vector<BoundarySegment>& boundary) {
    std::vector<int> seen(edges_.size(), 0);
    for (const auto& s : boundary) {
      const auto key = std::minmax(s.v0, s.v1);
      auto it = edge_index_.find({key.first, key.second});
      if (it == edge_index_.end())
        throw GeometryError("dangling boundary edge (" + std::to_string(s.v0) + ", " + std::to_string(s.v1) +
                            ") not incident to any triangle");
      const int e = it->second;
      if (!is_boundary_edge(e)) throw GeometryError("boundary segment lies on an interior edge");
      if (seen[e]++) throw GeometryError("boundary edge tagged twice");
      const int c = edge_cells_[e][0];
      int le = 0;
      while (cell_edges_[c][le] != e) ++le;
      facets_.push_back({e, c, le, s.tag, s.arc});
    }
    for (int e = 0; e < num_edges(); ++e)
      if (is_boundary_edge(e) && !seen[e])
        throw GeometryError("boundary edge " + std::to_string(e) + " carries no boundary tag");
    std::sort(facets_.begin(), facets_.end(), [](const auto& a, const auto& b) { return a.edge < b.edge; });
  }

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<std::array<int, 2>> edge_cells_;
  std::map<std::pair<int, int>, int> edge_index_;
  std::vector<BoundaryFacet> facets_;
  int geometry_order_ = 1;
  std::vector<std::vector<Vec2>> geometry_nodes_;
};

}  // namespace hcurlslip
