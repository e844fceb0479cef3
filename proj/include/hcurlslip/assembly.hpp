#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "curvature.hpp"
#include "dofmap.hpp"
#include "fe_values.hpp"

namespace hcurlslip {

/// Robin coefficient alpha at a point of boundary facet `facet` (parameter s).
using BoundaryCoefficient = std::function<double(int facet, double s, const Vec2& x)>;

/// Coefficient alpha = 2 W.
inline BoundaryCoefficient robin_coefficient(const WeingartenField& w) {
  return [&w](int facet, double s, const Vec2&) { return 2.0 * w(facet, s); };
}

/// Quadrature point on the boundary handed to data callbacks.
struct BoundaryPoint {
  Vec2 x;
  Vec2 tangent;
  Vec2 normal;
  int facet = -1;
  double s = 0.0;
  double alpha = 0.0;  // Robin coefficient used by the operator at this point (slip facets)
};

using VectorField = std::function<Vec2(const Vec2&)>;
using BoundaryData = std::function<double(const BoundaryPoint&)>;

/// Boundary conditions per tag. Slip facets: omega + alpha u.t = g and
/// u.n = z. Dirichlet facets: u = u_D, tangential part by Nitsche, normal
/// part through the constraint right-hand side.
struct BCSpec {
  BoundaryCoefficient alpha;
  BoundaryData slip_data;      // g; empty means 0
  BoundaryData normal_data;    // z on slip facets; empty means 0
  VectorField dirichlet_data;  // u_D; empty means 0
  std::optional<double> cw;    // Nitsche penalty; 10 k^2 when unset
};

inline double default_nitsche_penalty(int k) { return 10.0 * k * k; }

struct AssemblyOptions {
  int threads = 1;
};

struct SystemBlocks {
  SparseMatrix A;  // curl-curl + Robin + Nitsche
  SparseMatrix B;  // n_p x n_u
  Vector F;
  Vector G;
  Vector m;  // pressure means
  SparseMatrix curl_curl;
  SparseMatrix robin;
  SparseMatrix nitsche;
};

namespace detail {

/// Runs a per-cell kernel producing triplets. Cells are split into contiguous
/// partitions whose triplet lists are concatenated in partition order, so the
/// result does not depend on the thread count beyond summation order.
template <class Kernel>
SparseMatrix assemble_cells(int rows, int cols, int num_items, int threads, Kernel kernel) {
  threads = std::max(1, std::min(threads, num_items));
  std::vector<std::vector<Triplet>> parts(threads);
  std::vector<std::exception_ptr> errors(threads);
  const auto run = [&](int t) {
    const int begin = int(std::int64_t(num_items) * t / threads);
    const int end = int(std::int64_t(num_items) * (t + 1) / threads);
    try {
      for (int c = begin; c < end; ++c) kernel(c, parts[t]);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(run, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<Triplet> all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  SparseMatrix M(rows, cols);
  M.setFromTriplets(all.begin(), all.end());
  return M;
}

inline void add_local(const std::vector<int>& rows, const std::vector<int>& cols, const Matrix& local,
                      std::vector<Triplet>& out) {
  for (int i = 0; i < local.rows(); ++i)
    for (int j = 0; j < local.cols(); ++j)
      if (local(i, j) != 0.0) out.emplace_back(rows[i], cols[j], local(i, j));
}

}  // namespace detail

/// (curl u, curl v).
inline SparseMatrix assemble_curl_curl(const Mesh& mesh, const DofMap& V, const AssemblyOptions& opts = {}) {
  const int n = V.num_dofs();
  return detail::assemble_cells(n, n, mesh.num_cells(), opts.threads, [&](int c, std::vector<Triplet>& out) {
    const auto fv = velocity_values(mesh, V, c, volume_exactness(mesh, c, V.degree()));
    Matrix local = Matrix::Zero(V.local_size(), V.local_size());
    for (std::size_t q = 0; q < fv.jxw.size(); ++q) local += fv.jxw[q] * fv.curls[q] * fv.curls[q].transpose();
    detail::add_local(V.cell_dofs(c), V.cell_dofs(c), local, out);
  });
}

/// (u, v).
inline SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& V, const AssemblyOptions& opts = {}) {
  const int n = V.num_dofs();
  return detail::assemble_cells(n, n, mesh.num_cells(), opts.threads, [&](int c, std::vector<Triplet>& out) {
    const auto fv = velocity_values(mesh, V, c, volume_exactness(mesh, c, V.degree()));
    Matrix local = Matrix::Zero(V.local_size(), V.local_size());
    for (std::size_t q = 0; q < fv.jxw.size(); ++q) local += fv.jxw[q] * fv.values[q] * fv.values[q].transpose();
    detail::add_local(V.cell_dofs(c), V.cell_dofs(c), local, out);
  });
}

/// <alpha u.t, v.t> over slip facets.
inline SparseMatrix assemble_robin(const Mesh& mesh, const DofMap& V, const BoundaryCoefficient& alpha,
                                   const AssemblyOptions& opts = {}) {
  const int n = V.num_dofs();
  const auto& facets = mesh.boundary_facets();
  const int exactness = boundary_exactness(mesh, V.degree());
  return detail::assemble_cells(n, n, int(facets.size()), opts.threads, [&](int f, std::vector<Triplet>& out) {
    const auto& facet = facets[f];
    if (facet.tag != BoundaryTag::slip) return;
    if (!alpha) throw std::invalid_argument("missing Robin coefficient on slip facet " + std::to_string(f));
    const auto fv = facet_values(mesh, V, facet, exactness);
    Matrix local = Matrix::Zero(V.local_size(), V.local_size());
    for (std::size_t q = 0; q < fv.weights.size(); ++q)
      local += fv.weights[q] * alpha(f, fv.s[q], fv.points[q]) * fv.tangential[q] * fv.tangential[q].transpose();
    detail::add_local(V.cell_dofs(facet.cell), V.cell_dofs(facet.cell), local, out);
  });
}

/// b(v, q) = (v, grad q) as an n_p x n_u matrix. First-kind pairs need equal
/// degrees for grad Q_h to lie in V_h; other pairs are rejected unless
/// explicitly allowed.
inline SparseMatrix assemble_b(const Mesh& mesh, const DofMap& V, const DofMap& Q, bool allow_incompatible = false,
                               const AssemblyOptions& opts = {}) {
  if (V.kind() != SpaceKind::nedelec || Q.kind() != SpaceKind::lagrange)
    throw std::invalid_argument("assemble_b expects a Nedelec velocity and a Lagrange pressure space");
  if (V.degree() != Q.degree() && !allow_incompatible)
    throw std::invalid_argument("incompatible degrees: Nedelec " + std::to_string(V.degree()) + " with Lagrange " +
                                std::to_string(Q.degree()) + " violates grad Q_h in V_h");
  const int kq = std::max(V.degree(), Q.degree());
  return detail::assemble_cells(
      Q.num_dofs(), V.num_dofs(), mesh.num_cells(), opts.threads, [&](int c, std::vector<Triplet>& out) {
        const int ex = volume_exactness(mesh, c, kq);
        const auto fv = velocity_values(mesh, V, c, ex);
        const auto sv = scalar_values(mesh, Q, c, ex);
        Matrix local = Matrix::Zero(Q.local_size(), V.local_size());
        for (std::size_t q = 0; q < fv.jxw.size(); ++q)
          local += fv.jxw[q] * sv.gradients[q] * fv.values[q].transpose();
        detail::add_local(Q.cell_dofs(c), V.cell_dofs(c), local, out);
      });
}

/// (p, q).
inline SparseMatrix assemble_pressure_mass(const Mesh& mesh, const DofMap& Q, const AssemblyOptions& opts = {}) {
  const int n = Q.num_dofs();
  return detail::assemble_cells(n, n, mesh.num_cells(), opts.threads, [&](int c, std::vector<Triplet>& out) {
    const auto sv = scalar_values(mesh, Q, c, volume_exactness(mesh, c, Q.degree()));
    Matrix local = Matrix::Zero(Q.local_size(), Q.local_size());
    for (std::size_t q = 0; q < sv.jxw.size(); ++q) local += sv.jxw[q] * sv.values[q] * sv.values[q].transpose();
    detail::add_local(Q.cell_dofs(c), Q.cell_dofs(c), local, out);
  });
}

/// (grad p, grad q).
inline SparseMatrix assemble_pressure_laplacian(const Mesh& mesh, const DofMap& Q, const AssemblyOptions& opts = {}) {
  const int n = Q.num_dofs();
  return detail::assemble_cells(n, n, mesh.num_cells(), opts.threads, [&](int c, std::vector<Triplet>& out) {
    const auto sv = scalar_values(mesh, Q, c, volume_exactness(mesh, c, Q.degree()));
    Matrix local = Matrix::Zero(Q.local_size(), Q.local_size());
    for (std::size_t q = 0; q < sv.jxw.size(); ++q)
      local += sv.jxw[q] * sv.gradients[q] * sv.gradients[q].transpose();
    detail::add_local(Q.cell_dofs(c), Q.cell_dofs(c), local, out);
  });
}

/// m_j = integral of q_j.
inline Vector assemble_pressure_mean(const Mesh& mesh, const DofMap& Q) {
  Vector m = Vector::Zero(Q.num_dofs());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto sv = scalar_values(mesh, Q, c, volume_exactness(mesh, c, Q.degree()));
    for (std::size_t q = 0; q < sv.jxw.size(); ++q)
      for (int i = 0; i < Q.local_size(); ++i) m(Q.dof(c, i)) += sv.jxw[q] * sv.values[q](i);
  }
  return m;
}

/// Velocity coefficients of grad q_j (column j). The reference gradient is
/// interpolated by the reference degrees of freedom, which the covariant
/// Piola transform makes independent of the cell geometry.
inline SparseMatrix gradient_matrix(const Mesh& mesh, const DofMap& V, const DofMap& Q) {
  if (V.degree() != Q.degree()) throw std::invalid_argument("gradient embedding needs equal degrees");
  const auto& ned = nedelec_element(V.degree());
  const auto& lag = lagrange_element(Q.degree());
  Matrix local(V.local_size(), Q.local_size());
  for (int j = 0; j < Q.local_size(); ++j) {
    const auto grad = [&](const Vec2& p) -> Vec2 { return lag.gradients(p).row(j).transpose(); };
    local.col(j) = ned.apply_dofs(grad, 2 * V.degree() + 2);
  }
  std::vector<Triplet> triplets;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int i = 0; i < V.local_size(); ++i) {
      // Edge dofs are seen from every cell sharing the edge; average them.
      double share = 1.0;
      if (i < 3 * V.degree()) {
        const int e = mesh.cell_edges(c)[i / V.degree()];
        share = mesh.is_boundary_edge(e) ? 1.0 : 0.5;
      }
      for (int j = 0; j < Q.local_size(); ++j) {
        const double value = local(i, j);
        if (std::abs(value) > 1e-14) triplets.emplace_back(V.dof(c, i), Q.dof(c, j), share * V.sign(c, i) * value);
      }
    }
  }
  SparseMatrix Gm(V.num_dofs(), Q.num_dofs());
  Gm.setFromTriplets(triplets.begin(), triplets.end());
  return Gm;
}

/// Symmetric Nitsche terms on Dirichlet facets:
///   -<omega(u), v.t> - <u.t, omega(v)> + (C_w / h_F) <u.t, v.t>
/// and the matching data terms -<u_D.t, omega(v)> + (C_w / h_F) <u_D.t, v.t>.
/// h_F is the chord length of the facet.
struct NitscheTerms {
  SparseMatrix matrix;
  Vector rhs;
};

inline NitscheTerms assemble_nitsche(const Mesh& mesh, const DofMap& V, const VectorField& dirichlet_data,
                                     std::optional<double> cw, const AssemblyOptions& opts = {}) {
  if (!cw || !(*cw > 0.0)) throw std::invalid_argument("Nitsche penalty C_w missing or nonpositive");
  const int n = V.num_dofs();
  const auto& facets = mesh.boundary_facets();
  const int exactness = boundary_exactness(mesh, V.degree());
  NitscheTerms terms;
  terms.rhs = Vector::Zero(n);
  terms.matrix = detail::assemble_cells(n, n, int(facets.size()), opts.threads, [&](int f, std::vector<Triplet>& out) {
    const auto& facet = facets[f];
    if (facet.tag != BoundaryTag::dirichlet) return;
    const auto fv = facet_values(mesh, V, facet, exactness);
    const double penalty = *cw / mesh.edge_length(facet.edge);
    Matrix local = Matrix::Zero(V.local_size(), V.local_size());
    for (std::size_t q = 0; q < fv.weights.size(); ++q) {
      const Vector& t = fv.tangential[q];
      const Vector& w = fv.curls[q];
      local += fv.weights[q] * (-w * t.transpose() - t * w.transpose() + penalty * t * t.transpose());
    }
    detail::add_local(V.cell_dofs(facet.cell), V.cell_dofs(facet.cell), local, out);
  });
  if (dirichlet_data) {
    for (const auto& facet : facets) {
      if (facet.tag != BoundaryTag::dirichlet) continue;
      const auto fv = facet_values(mesh, V, facet, exactness);
      const double penalty = *cw / mesh.edge_length(facet.edge);
      for (std::size_t q = 0; q < fv.weights.size(); ++q) {
        const double ut = dirichlet_data(fv.points[q]).dot(fv.tangents[q]);
        const Vector contrib = fv.weights[q] * ut * (penalty * fv.tangential[q] - fv.curls[q]);
        for (int i = 0; i < V.local_size(); ++i) terms.rhs(V.dof(facet.cell, i)) += contrib(i);
      }
    }
  }
  return terms;
}

struct LoadVectors {
  Vector F;
  Vector G;
};

/// F_i = (f, phi_i) + <g, phi_i.t>_slip + Nitsche data terms;
/// G_j = <z, q_j> with z = u_D.n on Dirichlet facets.
inline LoadVectors assemble_rhs(const Mesh& mesh, const DofMap& V, const DofMap& Q, const VectorField& f,
                                const BCSpec& bc) {
  LoadVectors out{Vector::Zero(V.num_dofs()), Vector::Zero(Q.num_dofs())};
  if (f) {
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto fv = velocity_values(mesh, V, c, volume_exactness(mesh, c, V.degree()));
      for (std::size_t q = 0; q < fv.jxw.size(); ++q) {
        const Vector contrib = fv.jxw[q] * (fv.values[q] * f(fv.points[q]));
        for (int i = 0; i < V.local_size(); ++i) out.F(V.dof(c, i)) += contrib(i);
      }
    }
  }
  // Boundary data is not polynomial; the highest edge rule keeps the
  // compatibility sum of G at round-off on coarse meshes.
  const auto& facets = mesh.boundary_facets();
  const int exactness = kMaxExactness;
  for (int fi = 0; fi < int(facets.size()); ++fi) {
    const auto& facet = facets[fi];
    const bool slip = facet.tag == BoundaryTag::slip;
    if (slip && !bc.slip_data && !bc.normal_data) continue;
    if (!slip && !bc.dirichlet_data) continue;
    const auto fv = facet_values(mesh, V, facet, exactness);
    const auto pv = facet_scalar_values(Q, facet, exactness);
    for (std::size_t q = 0; q < fv.weights.size(); ++q) {
      BoundaryPoint bp{fv.points[q], fv.tangents[q], fv.normals[q], fi, fv.s[q], 0.0};
      double z = 0.0;
      if (slip) {
        if (bc.alpha) bp.alpha = bc.alpha(fi, fv.s[q], fv.points[q]);
        if (bc.slip_data) {
          const Vector contrib = fv.weights[q] * bc.slip_data(bp) * fv.tangential[q];
          for (int i = 0; i < V.local_size(); ++i) out.F(V.dof(facet.cell, i)) += contrib(i);
        }
        if (bc.normal_data) z = bc.normal_data(bp);
      } else {
        z = bc.dirichlet_data(fv.points[q]).dot(fv.normals[q]);
      }
      if (z != 0.0)
        for (int j = 0; j < Q.local_size(); ++j) out.G(Q.dof(facet.cell, j)) += fv.weights[q] * z * pv[q](j);
    }
  }
  bool has_dirichlet = false;
  for (const auto& facet : facets) has_dirichlet |= facet.tag == BoundaryTag::dirichlet;
  if (has_dirichlet && bc.dirichlet_data) {
    const double cw = bc.cw.value_or(default_nitsche_penalty(V.degree()));
    out.F += assemble_nitsche(mesh, V, bc.dirichlet_data, cw).rhs;
  }
  return out;
}

/// All blocks of the saddle-point system.
inline SystemBlocks assemble_system(const Mesh& mesh, const DofMap& V, const DofMap& Q, const VectorField& f,
                                    const BCSpec& bc, const AssemblyOptions& opts = {}) {
  SystemBlocks s;
  s.curl_curl = assemble_curl_curl(mesh, V, opts);
  s.robin = assemble_robin(mesh, V, bc.alpha, opts);
  const double cw = bc.cw.value_or(default_nitsche_penalty(V.degree()));
  s.nitsche = assemble_nitsche(mesh, V, VectorField{}, cw, opts).matrix;
  s.A = s.curl_curl + s.robin + s.nitsche;
  s.B = assemble_b(mesh, V, Q, false, opts);
  const LoadVectors load = assemble_rhs(mesh, V, Q, f, bc);
  s.F = load.F;
  s.G = load.G;
  s.m = assemble_pressure_mean(mesh, Q);
  return s;
}

}  // namespace hcurlslip
