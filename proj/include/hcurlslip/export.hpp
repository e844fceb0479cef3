#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include <json.hpp>

#include "evaluation.hpp"

namespace hcurlslip {

/// One point of a sampled line profile.
struct ProfileSample {
  double gamma = 0.0;
  Vec2 point;
  Vec2 velocity;
  double magnitude() const { return velocity.norm(); }
};

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  return out;
}

}  // namespace detail

/// Legacy ASCII VTK unstructured grid. Every cell is split into
/// `subdivision`^2 triangles on a uniform reference lattice, mapped through
/// the cell's geometry, with point values of velocity and pressure.
inline void write_vtk(std::ostream& out, const Mesh& mesh, const DofMap& V, const DofMap& Q, const Vector& u,
                      const Vector& p, int subdivision) {
  if (subdivision < 1) throw std::invalid_argument("VTK subdivision must be >= 1");
  const int n = subdivision;
  const int per_cell = (n + 1) * (n + 2) / 2;
  const FieldEvaluator eval(mesh, V, Q, u, p);
  const auto lattice = [n](int i, int j) { return j * (n + 1) - j * (j - 1) / 2 + i; };

  std::vector<Vec2> points, velocity;
  std::vector<double> pressure;
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i + j <= n; ++i) {
        const FieldEvaluator::Location loc{c, Vec2(double(i) / n, double(j) / n)};
        points.push_back(map_point(mesh, c, loc.ref));
        velocity.push_back(eval.velocity(loc));
        pressure.push_back(eval.pressure(loc));
      }
  std::vector<std::array<int, 3>> triangles;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const int base = c * per_cell;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i + j < n; ++i) {
        triangles.push_back({base + lattice(i, j), base + lattice(i + 1, j), base + lattice(i, j + 1)});
        if (i + j + 1 < n)
          triangles.push_back({base + lattice(i + 1, j), base + lattice(i + 1, j + 1), base + lattice(i, j + 1)});
      }
  }

  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\nhcurlslip solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << points.size() << " double\n";
  for (const Vec2& x : points) out << x.x() << " " << x.y() << " 0\n";
  out << "CELLS " << triangles.size() << " " << 4 * triangles.size() << "\n";
  for (const auto& t : triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << triangles.size() << "\n";
  for (std::size_t i = 0; i < triangles.size(); ++i) out << "5\n";
  out << "POINT_DATA " << points.size() << "\nVECTORS velocity double\n";
  for (const Vec2& v : velocity) out << v.x() << " " << v.y() << " 0\n";
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (double q : pressure) out << q << "\n";
}

inline void write_vtk(const std::string& path, const Mesh& mesh, const DofMap& V, const DofMap& Q, const Vector& u,
                      const Vector& p, int subdivision) {
  auto out = detail::open_output(path);
  write_vtk(out, mesh, V, Q, u, p, subdivision);
}

/// Observed rates log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for each norm; the
/// h field of a rate row holds the finer width.
inline std::vector<ErrorRow> convergence_rates(const std::vector<ErrorRow>& rows) {
  std::vector<ErrorRow> rates;
  const auto rate = [](double e0, double e1, double h0, double h1) { return std::log(e0 / e1) / std::log(h0 / h1); };
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const ErrorRow &a = rows[i], &b = rows[i + 1];
    ErrorRow r;
    r.h = b.h;
    r.u_l2 = rate(a.u_l2, b.u_l2, a.h, b.h);
    r.u_hcurl = rate(a.u_hcurl, b.u_hcurl, a.h, b.h);
    r.u_sharp = rate(a.u_sharp, b.u_sharp, a.h, b.h);
    r.p_l2 = rate(a.p_l2, b.p_l2, a.h, b.h);
    r.p_h1 = rate(a.p_h1, b.p_h1, a.h, b.h);
    rates.push_back(r);
  }
  return rates;
}

/// CSV with a header row, one "error" row per width and one "rate" row per
/// consecutive pair.
inline void write_convergence_csv(std::ostream& out, const std::vector<ErrorRow>& rows) {
  out << std::setprecision(17);
  out << "kind,h,u_l2,u_hcurl,u_sharp,p_l2,p_h1\n";
  const auto line = [&](const char* kind, const ErrorRow& r) {
    out << kind << "," << r.h << "," << r.u_l2 << "," << r.u_hcurl << "," << r.u_sharp << "," << r.p_l2 << ","
        << r.p_h1 << "\n";
  };
  for (const auto& r : rows) line("error", r);
  for (const auto& r : convergence_rates(rows)) line("rate", r);
}

inline void write_convergence_csv(const std::string& path, const std::vector<ErrorRow>& rows) {
  auto out = detail::open_output(path);
  write_convergence_csv(out, rows);
}

inline void write_profile_csv(std::ostream& out, const std::vector<ProfileSample>& samples) {
  out << std::setprecision(17);
  out << "gamma,ux,uy,magnitude\n";
  for (const auto& s : samples)
    out << s.gamma << "," << s.velocity.x() << "," << s.velocity.y() << "," << s.magnitude() << "\n";
}

inline void write_profile_csv(const std::string& path, const std::vector<ProfileSample>& samples) {
  auto out = detail::open_output(path);
  write_profile_csv(out, samples);
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = detail::open_output(path);
  out << j.dump(2) << "\n";
}

}  // namespace hcurlslip
