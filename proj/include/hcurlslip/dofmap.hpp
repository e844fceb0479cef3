#pragma once

#include <string>
#include <vector>

#include "lagrange.hpp"
#include "mesh.hpp"
#include "nedelec.hpp"

namespace hcurlslip {

enum class SpaceKind { nedelec, lagrange };

/// Global numbering of a finite element space on a mesh.
///
/// Nedelec: edge moments first (edge e owns dofs [e k, e k + k)), then the
/// interior moments cell by cell. Lagrange: vertices, then edge nodes ordered
/// along the global edge orientation, then interior nodes cell by cell.
/// `sign(c, i)` converts the local basis function i of cell c into the global
/// one (Nedelec only; Lagrange signs are all +1).
class DofMap {
 public:
  static DofMap nedelec(const Mesh& mesh, int k) {
    const auto& el = nedelec_element(k);
    DofMap map(SpaceKind::nedelec, k, el.size(), mesh.num_cells());
    const int interior = el.interior_size();
    map.num_dofs_ = mesh.num_edges() * k + mesh.num_cells() * interior;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      for (int le = 0; le < 3; ++le) {
        const bool reversed = mesh.edge_reversed(c, le);
        for (int j = 0; j < k; ++j) {
          const int i = el.edge_dof(le, j);
          map.dofs_[c][i] = mesh.cell_edges(c)[le] * k + j;
          map.signs_[c][i] = NedelecElement::edge_sign(j, reversed);
        }
      }
      for (int i = 0; i < interior; ++i) map.dofs_[c][3 * k + i] = mesh.num_edges() * k + c * interior + i;
    }
    return map;
  }

  static DofMap lagrange(const Mesh& mesh, int m) {
    const auto& el = lagrange_element(m);
    DofMap map(SpaceKind::lagrange, m, el.size(), mesh.num_cells());
    const int per_edge = el.nodes_per_edge(), interior = el.interior_size();
    const int nv = mesh.num_vertices(), ne = mesh.num_edges();
    map.num_dofs_ = nv + ne * per_edge + mesh.num_cells() * interior;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      for (int v = 0; v < 3; ++v) map.dofs_[c][v] = mesh.cell(c)[v];
      for (int le = 0; le < 3; ++le) {
        const bool reversed = mesh.edge_reversed(c, le);
        for (int i = 0; i < per_edge; ++i) {
          const int g = reversed ? per_edge - 1 - i : i;
          map.dofs_[c][el.edge_node(le, i)] = nv + mesh.cell_edges(c)[le] * per_edge + g;
        }
      }
      for (int i = 0; i < interior; ++i) map.dofs_[c][el.interior_node(i)] = nv + ne * per_edge + c * interior + i;
    }
    return map;
  }

  SpaceKind kind() const { return kind_; }
  int degree() const { return degree_; }
  int num_dofs() const { return num_dofs_; }
  int local_size() const { return local_size_; }
  const std::vector<int>& cell_dofs(int c) const { return dofs_[c]; }
  const std::vector<double>& cell_signs(int c) const { return signs_[c]; }
  int dof(int c, int i) const { return dofs_[c][i]; }
  double sign(int c, int i) const { return signs_[c][i]; }

 private:
  DofMap(SpaceKind kind, int degree, int local_size, int num_cells)
      : kind_(kind), degree_(degree), local_size_(local_size),
        dofs_(num_cells, std::vector<int>(local_size, -1)),
        signs_(num_cells, std::vector<double>(local_size, 1.0)) {}

  SpaceKind kind_;
  int degree_;
  int local_size_;
  int num_dofs_ = 0;
  std::vector<std::vector<int>> dofs_;
  std::vector<std::vector<double>> signs_;
};

}  // namespace hcurlslip
