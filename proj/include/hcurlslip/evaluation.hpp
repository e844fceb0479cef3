#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dofmap.hpp"
#include "fe_values.hpp"
#include "manufactured.hpp"

namespace hcurlslip {

/// Velocity coefficients of the canonical interpolant: reference degrees of
/// freedom applied to J^T u(F(x)) on every cell.
inline Vector interpolate_velocity(const Mesh& mesh, const DofMap& V, const VectorField& u) {
  const auto& el = nedelec_element(V.degree());
  const int exactness = std::min(kMaxExactness, 2 * V.degree() + 2 * mesh.geometry_order() + 4);
  Vector coeffs = Vector::Zero(V.num_dofs());
  Vector weight = Vector::Zero(V.num_dofs());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto pulled = [&](const Vec2& p) -> Vec2 {
      const ElementTransform t = cell_transform(mesh, c, p);
      return t.jacobian.transpose() * u(t.point);
    };
    const Vector local = el.apply_dofs(pulled, exactness);
    for (int i = 0; i < V.local_size(); ++i) {
      coeffs(V.dof(c, i)) += V.sign(c, i) * local(i);
      weight(V.dof(c, i)) += 1.0;
    }
  }
  return coeffs.cwiseQuotient(weight);
}

/// Lagrange nodal interpolant.
inline Vector interpolate_scalar(const Mesh& mesh, const DofMap& Q, const ScalarField& p) {
  const auto& el = lagrange_element(Q.degree());
  Vector coeffs = Vector::Zero(Q.num_dofs());
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int i = 0; i < Q.local_size(); ++i) coeffs(Q.dof(c, i)) = p(map_point(mesh, c, el.nodes()[i]));
  return coeffs;
}

/// One refinement level of an error study.
struct ErrorRow {
  double h = 0.0;
  double u_l2 = 0.0;
  double u_hcurl = 0.0;
  double u_sharp = 0.0;  // H(curl) plus boundary L2 of the tangential trace
  double p_l2 = 0.0;
  double p_h1 = 0.0;
};

/// Errors of (u_h, p_h) against exact fields on the discrete domain. The
/// exact pressure is shifted to mean zero over the mesh first; p_h is taken
/// as given (mean-zero from the solver). Empty pressure coefficients skip
/// the pressure norms.
inline ErrorRow compute_errors(const Mesh& mesh, const DofMap& V, const DofMap& Q, const Vector& u, const Vector& p,
                               const ExactSolution& exact) {
  const int k = V.degree();
  const auto exactness = [&](int c) { return std::max(volume_exactness(mesh, c, k), std::min(kMaxExactness, 2 * k + 4)); };

  double area = 0.0, p_mean = 0.0;
  const bool with_pressure = p.size() == Q.num_dofs() && exact.p;
  if (with_pressure) {
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto sv = scalar_values(mesh, Q, c, exactness(c));
      for (std::size_t q = 0; q < sv.jxw.size(); ++q) {
        area += sv.jxw[q];
        p_mean += sv.jxw[q] * exact.p(sv.points[q]);
      }
    }
    p_mean /= area;
  }

  double eu = 0.0, ecurl = 0.0, ep = 0.0, egp = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const int ex = exactness(c);
    const auto fv = velocity_values(mesh, V, c, ex);
    Vector uc(V.local_size());
    for (int i = 0; i < V.local_size(); ++i) uc(i) = u(V.dof(c, i));
    for (std::size_t q = 0; q < fv.jxw.size(); ++q) {
      const Vec2 uh = fv.values[q].transpose() * uc;
      eu += fv.jxw[q] * (exact.u(fv.points[q]) - uh).squaredNorm();
      if (exact.curl) ecurl += fv.jxw[q] * std::pow(exact.curl(fv.points[q]) - fv.curls[q].dot(uc), 2);
    }
    if (with_pressure) {
      const auto sv = scalar_values(mesh, Q, c, ex);
      Vector pc(Q.local_size());
      for (int i = 0; i < Q.local_size(); ++i) pc(i) = p(Q.dof(c, i));
      for (std::size_t q = 0; q < sv.jxw.size(); ++q) {
        ep += sv.jxw[q] * std::pow(exact.p(sv.points[q]) - p_mean - sv.values[q].dot(pc), 2);
        if (exact.grad_p)
          egp += sv.jxw[q] * (exact.grad_p(sv.points[q]) - sv.gradients[q].transpose() * pc).squaredNorm();
      }
    }
  }

  double etan = 0.0;
  const int bex = std::max(boundary_exactness(mesh, k), std::min(kMaxExactness, 2 * k + 4));
  for (const auto& facet : mesh.boundary_facets()) {
    const auto fv = facet_values(mesh, V, facet, bex);
    Vector uc(V.local_size());
    for (int i = 0; i < V.local_size(); ++i) uc(i) = u(V.dof(facet.cell, i));
    for (std::size_t q = 0; q < fv.weights.size(); ++q)
      etan += fv.weights[q] * std::pow(exact.u(fv.points[q]).dot(fv.tangents[q]) - fv.tangential[q].dot(uc), 2);
  }

  ErrorRow row;
  row.u_l2 = std::sqrt(eu);
  row.u_hcurl = std::sqrt(eu + ecurl);
  row.u_sharp = std::sqrt(eu + ecurl + etan);
  row.p_l2 = std::sqrt(ep);
  row.p_h1 = std::sqrt(ep + egp);
  return row;
}

/// Point location in a (possibly curved) mesh and evaluation of discrete fields.
class FieldEvaluator {
 public:
  struct Location {
    int cell = -1;
    Vec2 ref;
  };

  /// Points farther than `outside_tolerance` from every cell are rejected.
  FieldEvaluator(const Mesh& mesh, const DofMap& V, const DofMap& Q, Vector u, Vector p,
                 double outside_tolerance = 1e-6)
      : mesh_(&mesh), V_(&V), Q_(&Q), u_(std::move(u)), p_(std::move(p)), tolerance_(outside_tolerance) {
    lo_ = Vec2::Constant(std::numeric_limits<double>::infinity());
    hi_ = -lo_;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      Eigen::AlignedBox2d box;
      for (int v : mesh.cell(c)) box.extend(mesh.vertex(v));
      for (const Vec2& x : mesh.geometry_nodes(c)) box.extend(x);
      const double pad = 0.1 * box.diagonal().norm() + 1e-12;
      box.min().array() -= pad;
      box.max().array() += pad;
      boxes_.push_back(box);
      lo_ = lo_.cwiseMin(box.min());
      hi_ = hi_.cwiseMax(box.max());
    }
    n_ = std::max(1, int(std::sqrt(double(mesh.num_cells()))));
    buckets_.assign(n_ * n_, {});
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto [i0, j0] = bucket(boxes_[c].min());
      const auto [i1, j1] = bucket(boxes_[c].max());
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) buckets_[j * n_ + i].push_back(c);
    }
  }

  /// Cell and reference coordinates of x. Inverts the geometry map by damped
  /// Newton with clamping to the reference triangle (tolerance 1e-12, at most
  /// 50 iterations). Points slightly outside the discrete domain, as happens
  /// on curved boundaries, go to the closest cell.
  Location locate(const Vec2& x) const {
    const auto [i, j] = bucket(x);
    Location best;
    double best_miss = std::numeric_limits<double>::infinity();
    for (int c : buckets_[j * n_ + i]) {
      if (!boxes_[c].contains(x)) continue;
      const auto [ref, residual] = invert(c, x);
      const double outside = std::max({0.0, -ref.x(), -ref.y(), ref.x() + ref.y() - 1.0});
      const double miss = residual + outside * boxes_[c].diagonal().norm();
      if (outside < 1e-10 && residual < 1e-10) return {c, ref};
      if (miss < best_miss) {
        best_miss = miss;
        best = {c, ref};
      }
    }
    if (best.cell < 0 || best_miss > tolerance_)
      throw GeometryError("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) + ") lies outside the mesh");
    return best;
  }

  Vec2 velocity(const Location& loc) const {
    Eigen::MatrixX2d vals;
    Vector curls;
    nedelec_element(V_->degree()).evaluate(loc.ref, vals, curls);
    const ElementTransform t = cell_transform(*mesh_, loc.cell, loc.ref);
    Vec2 ref = Vec2::Zero();
    for (int i = 0; i < V_->local_size(); ++i)
      ref += V_->sign(loc.cell, i) * u_(V_->dof(loc.cell, i)) * vals.row(i).transpose();
    return t.inverse_transpose * ref;
  }

  double pressure(const Location& loc) const {
    if (p_.size() == 0) return 0.0;
    const Vector vals = lagrange_element(Q_->degree()).values(loc.ref);
    double s = 0.0;
    for (int i = 0; i < Q_->local_size(); ++i) s += p_(Q_->dof(loc.cell, i)) * vals(i);
    return s;
  }

  Vec2 velocity(const Vec2& x) const { return velocity(locate(x)); }
  double pressure(const Vec2& x) const { return pressure(locate(x)); }

 private:
  std::pair<int, int> bucket(const Vec2& x) const {
    const Vec2 r = (x - lo_).cwiseQuotient(hi_ - lo_);
    const int i = std::clamp(int(r.x() * n_), 0, n_ - 1);
    const int j = std::clamp(int(r.y() * n_), 0, n_ - 1);
    return {i, j};
  }

  static Vec2 clamp_reference(Vec2 p) {
    p = p.cwiseMax(0.0);
    const double s = p.x() + p.y();
    if (s > 1.0) p /= s;
    return p;
  }

  std::pair<Vec2, double> invert(int c, const Vec2& x) const {
    Vec2 ref(1.0 / 3.0, 1.0 / 3.0);
    double residual = (map_point(*mesh_, c, ref) - x).norm();
    for (int it = 0; it < 50 && residual > 1e-12; ++it) {
      const ElementTransform t = cell_transform(*mesh_, c, ref);
      const Vec2 step = t.jacobian.inverse() * (x - t.point);
      double damping = 1.0;
      Vec2 trial = clamp_reference(ref + step);
      double trial_residual = (map_point(*mesh_, c, trial) - x).norm();
      while (trial_residual > residual && damping > 1e-4) {
        damping *= 0.5;
        trial = clamp_reference(ref + damping * step);
        trial_residual = (map_point(*mesh_, c, trial) - x).norm();
      }
      if (trial_residual >= residual) break;
      ref = trial;
      residual = trial_residual;
    }
    // An unclamped final step tells how far outside the cell x lies.
    const ElementTransform t = cell_transform(*mesh_, c, ref);
    const Vec2 free = ref + t.jacobian.inverse() * (x - t.point);
    const double free_residual = (map_point(*mesh_, c, free) - x).norm();
    if (free_residual <= residual) return {free, free_residual};
    return {ref, residual};
  }

  const Mesh* mesh_;
  const DofMap* V_;
  const DofMap* Q_;
  Vector u_, p_;
  double tolerance_;
  std::vector<Eigen::AlignedBox2d> boxes_;
  Vec2 lo_, hi_;
  int n_ = 1;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace hcurlslip
