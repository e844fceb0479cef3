#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "assembly.hpp"
#include "curving.hpp"
#include "evaluation.hpp"
#include "export.hpp"
#include "manufactured.hpp"
#include "mesh_generators.hpp"
#include "solver.hpp"

namespace hcurlslip {

enum class CaseKind { manufactured_ellipse, annulus, lid_cavity, half_disk_cavity, cylinder };

inline const char* to_string(CaseKind kind) {
  switch (kind) {
    case CaseKind::manufactured_ellipse: return "manufactured_ellipse";
    case CaseKind::annulus: return "annulus";
    case CaseKind::lid_cavity: return "lid_cavity";
    case CaseKind::half_disk_cavity: return "half_disk_cavity";
    case CaseKind::cylinder: return "cylinder";
  }
  return "?";
}

inline CaseKind parse_case_kind(const std::string& name) {
  for (CaseKind k : {CaseKind::manufactured_ellipse, CaseKind::annulus, CaseKind::lid_cavity,
                     CaseKind::half_disk_cavity, CaseKind::cylinder})
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown case '" + name + "'");
}

/// Mesh widths used when none are given.
inline std::vector<double> default_widths(CaseKind kind) {
  switch (kind) {
    case CaseKind::manufactured_ellipse: return {0.4, 0.2, 0.1, 0.05};
    case CaseKind::annulus:
    case CaseKind::cylinder: return {0.25};
    case CaseKind::lid_cavity:
    case CaseKind::half_disk_cavity: return {0.05};
  }
  return {};
}

struct ExperimentConfig {
  CaseKind kind = CaseKind::manufactured_ellipse;
  int degree = 3;
  std::optional<int> geometry_order;  // k + 2 when unset
  std::vector<double> widths;         // default_widths(kind) when empty
  CurvatureSource curvature = CurvatureSource::geometric;
  std::optional<double> cw;  // Nitsche penalty, 10 k^2 when unset
  std::string output_dir;    // no files written when empty
  int threads = 1;
  SolverOptions solver{};

  int resolved_geometry_order() const { return geometry_order.value_or(degree + 2); }
  std::vector<double> resolved_widths() const { return widths.empty() ? default_widths(kind) : widths; }
};

inline void validate(const ExperimentConfig& c) {
  if (c.degree < 1 || c.degree > 3) throw std::invalid_argument("degree must be 1, 2 or 3");
  if (c.resolved_geometry_order() < 1) throw std::invalid_argument("geometry order must be >= 1");
  const auto w = c.resolved_widths();
  if (w.empty()) throw std::invalid_argument("at least one mesh width is required");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("mesh widths must be positive");
    if (i > 0 && !(w[i] < w[i - 1])) throw std::invalid_argument("mesh widths must be strictly decreasing");
  }
  if (c.cw && !(*c.cw > 0.0)) throw std::invalid_argument("Nitsche penalty must be positive");
  if (c.threads < 1) throw std::invalid_argument("thread count must be >= 1");
}

/// Tolerances of the in-run assertions.
struct CheckTolerances {
  double momentum = 1e-9;
  double constraint = 1e-9;
  double divergence = 1e-9;
  double mean_pressure = 1e-10;
  double pressure_recovery = 1e-8;
};

/// Solver invariants measured after a solve.
struct RunChecks {
  double momentum_residual = 0.0;
  double constraint_residual = 0.0;
  double divergence_defect = 0.0;  // max_j |(u_h, grad q_j) - <z, q_j>| / (1 + |u_h|)
  double mean_pressure = 0.0;      // |integral of p_h| / (1 + |p_h|)
  double pressure_recovery = 0.0;  // |p_recovered - p_h| / |p_h| in L2
  double lambda = 0.0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

/// Everything produced by one solve at one mesh width.
struct RunResult {
  CaseKind kind{};
  double h = 0.0;           // nominal width
  double max_edge = 0.0;    // measured
  int degree = 0;
  int geometry_order = 0;
  GeneratedDomain domain;   // straight mesh and chart
  Mesh mesh;                // curved mesh
  DofMap V = DofMap::nedelec(Mesh(), 1);
  DofMap Q = DofMap::lagrange(Mesh(), 1);
  Solution solution;
  Vector recovered_pressure;
  RunChecks checks;
  std::optional<ErrorRow> errors;
  double seconds = 0.0;
};

namespace detail {

inline DomainKind domain_of(CaseKind kind) {
  switch (kind) {
    case CaseKind::manufactured_ellipse: return DomainKind::ellipse;
    case CaseKind::annulus: return DomainKind::annulus;
    case CaseKind::lid_cavity: return DomainKind::unit_square;
    case CaseKind::half_disk_cavity: return DomainKind::half_disk;
    case CaseKind::cylinder: return DomainKind::square_minus_disk;
  }
  return DomainKind::ellipse;
}

inline VectorField dirichlet_data_of(CaseKind kind) {
  switch (kind) {
    case CaseKind::annulus: return [](const Vec2& x) { return Vec2(-x.y(), x.x()); };
    case CaseKind::lid_cavity:
    case CaseKind::half_disk_cavity:
    case CaseKind::cylinder: return [](const Vec2&) { return Vec2(1.0, 0.0); };
    case CaseKind::manufactured_ellipse: break;
  }
  return {};
}

inline RunChecks measure_checks(const SystemBlocks& s, const Solution& sol, const Vector& recovered,
                                const SparseMatrix& velocity_mass, const SparseMatrix& pressure_mass,
                                const CheckTolerances& tol) {
  RunChecks c;
  c.momentum_residual = sol.momentum_residual;
  c.constraint_residual = sol.constraint_residual;
  c.lambda = sol.lambda;
  const double u_norm = std::sqrt(std::max(0.0, sol.u.dot(velocity_mass * sol.u)));
  c.divergence_defect = (s.B * sol.u - s.G).cwiseAbs().maxCoeff() / (1.0 + u_norm);
  const double p_norm = std::sqrt(std::max(0.0, sol.p.dot(pressure_mass * sol.p)));
  const Vector dp = recovered - sol.p;
  const double dp_norm = std::sqrt(std::max(0.0, dp.dot(pressure_mass * dp)));
  c.mean_pressure = std::abs(s.m.dot(sol.p)) / (1.0 + p_norm);
  c.pressure_recovery = p_norm > 0 ? dp_norm / p_norm : dp_norm;
  const auto require = [&](bool ok, const std::string& what, double value, double bound) {
    if (!ok) c.failures.push_back(what + " = " + std::to_string(value) + " exceeds " + std::to_string(bound));
  };
  require(c.momentum_residual <= tol.momentum, "momentum residual", c.momentum_residual, tol.momentum);
  require(c.constraint_residual <= tol.constraint, "constraint residual", c.constraint_residual, tol.constraint);
  require(c.divergence_defect <= tol.divergence, "discrete divergence defect", c.divergence_defect, tol.divergence);
  require(c.mean_pressure <= tol.mean_pressure, "pressure mean", c.mean_pressure, tol.mean_pressure);
  require(c.pressure_recovery <= tol.pressure_recovery, "pressure recovery mismatch", c.pressure_recovery,
          tol.pressure_recovery);
  return c;
}

}  // namespace detail

/// Builds, solves and checks one case at one mesh width. The manufactured
/// case also measures the error norms.
inline RunResult solve_case(CaseKind kind, double h, int k, int g, CurvatureSource curvature,
                            std::optional<double> cw = std::nullopt, int threads = 1, const SolverOptions& solver = {},
                            const CheckTolerances& tol = {}) {
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  r.kind = kind;
  r.h = h;
  r.degree = k;
  r.geometry_order = g;
  r.domain = generate_domain({detail::domain_of(kind), h, g});
  r.mesh = curve_boundary(r.domain.mesh, r.domain.chart, g);
  r.max_edge = r.mesh.max_edge_length();
  r.V = DofMap::nedelec(r.mesh, k);
  r.Q = DofMap::lagrange(r.mesh, k);

  const WeingartenField weingarten(r.mesh, r.domain.chart, curvature);
  BCSpec bc;
  bc.alpha = robin_coefficient(weingarten);
  bc.cw = cw;
  VectorField f;
  if (kind == CaseKind::manufactured_ellipse) {
    f = manufactured::source;
    bc.slip_data = manufactured::slip_data;
    bc.normal_data = manufactured::normal_data;
  } else {
    bc.dirichlet_data = detail::dirichlet_data_of(kind);
  }
  const AssemblyOptions opts{threads};
  const SystemBlocks s = assemble_system(r.mesh, r.V, r.Q, f, bc, opts);
  const SparseMatrix velocity_mass = assemble_mass(r.mesh, r.V, opts);
  const SparseMatrix pressure_mass = assemble_pressure_mass(r.mesh, r.Q, opts);

  SaddleSystem system{s.A, s.B, s.F, s.G, s.m, velocity_mass, std::nullopt, std::nullopt};
  if (solver.iterative) {
    system.velocity_gram = SparseMatrix(s.curl_curl + velocity_mass);
    system.pressure_gram = SparseMatrix(pressure_mass + assemble_pressure_laplacian(r.mesh, r.Q, opts));
  }
  r.solution = solve_saddle(system, solver);

  const SparseMatrix laplacian = assemble_pressure_laplacian(r.mesh, r.Q, opts);
  r.recovered_pressure = recover_pressure(s.A, s.F, r.solution.u, gradient_matrix(r.mesh, r.V, r.Q), laplacian, s.m);
  r.checks = detail::measure_checks(s, r.solution, r.recovered_pressure, velocity_mass, pressure_mass, tol);

  if (kind == CaseKind::manufactured_ellipse) {
    r.errors = compute_errors(r.mesh, r.V, r.Q, r.solution.u, r.solution.p, manufactured::exact());
    r.errors->h = h;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline nlohmann::json run_diagnostics(const RunResult& r) {
  nlohmann::json j;
  j["case"] = to_string(r.kind);
  j["h"] = r.h;
  j["max_edge_length"] = r.max_edge;
  j["degree"] = r.degree;
  j["geometry_order"] = r.geometry_order;
  j["cells"] = r.mesh.num_cells();
  j["velocity_dofs"] = r.V.num_dofs();
  j["pressure_dofs"] = r.Q.num_dofs();
  j["solver"] = r.solution.method;
  j["iterations"] = r.solution.iterations;
  j["momentum_residual"] = r.checks.momentum_residual;
  j["constraint_residual"] = r.checks.constraint_residual;
  j["divergence_defect"] = r.checks.divergence_defect;
  j["mean_pressure"] = r.checks.mean_pressure;
  j["pressure_recovery"] = r.checks.pressure_recovery;
  j["lambda"] = r.checks.lambda;
  j["failures"] = r.checks.failures;
  if (r.solution.kernel.probed) {
    j["kernel"] = {{"smallest", r.solution.kernel.smallest},
                   {"second", r.solution.kernel.second},
                   {"suspected", r.solution.kernel.suspected},
                   {"message", r.solution.kernel.message}};
  }
  if (r.errors) {
    const ErrorRow& e = *r.errors;
    j["errors"] = {{"u_l2", e.u_l2}, {"u_hcurl", e.u_hcurl}, {"u_sharp", e.u_sharp}, {"p_l2", e.p_l2}, {"p_h1", e.p_h1}};
  }
  j["seconds"] = r.seconds;
  return j;
}

/// Error norms at every width with observed rates.
struct ErrorReport {
  std::vector<ErrorRow> rows;
  std::vector<ErrorRow> rates;
  std::vector<RunResult> runs;
  double fd_mismatch = 0.0;  // derivative check of the manufactured data

  bool passed() const {
    for (const auto& r : runs)
      if (!r.checks.passed()) return false;
    return true;
  }
};

/// Manufactured-solution study on the ellipse. The hand-coded derivatives of
/// the exact solution are checked against central differences first.
inline ErrorReport run_convergence(const ExperimentConfig& config, const CheckTolerances& tol = {}) {
  validate(config);
  if (config.kind != CaseKind::manufactured_ellipse)
    throw std::invalid_argument("convergence studies need the manufactured_ellipse case");
  ErrorReport report;
  std::vector<Vec2> probe;
  for (int i = 0; i < 24; ++i) {
    const double t = 2 * std::numbers::pi * i / 24, r = 0.15 + 0.8 * (i % 5) / 4.0;
    probe.emplace_back(r * std::cos(t), 0.5 * r * std::sin(t));
  }
  report.fd_mismatch = manufactured::finite_difference_mismatch(probe, 1e-6);
  if (report.fd_mismatch > 1e-5)
    throw std::logic_error("manufactured derivatives disagree with finite differences (" +
                           std::to_string(report.fd_mismatch) + ")");
  for (double h : config.resolved_widths()) {
    report.runs.push_back(solve_case(config.kind, h, config.degree, config.resolved_geometry_order(),
                                     config.curvature, config.cw, config.threads, config.solver, tol));
    report.rows.push_back(*report.runs.back().errors);
  }
  report.rates = convergence_rates(report.rows);

  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    const std::string stem = config.output_dir + "/convergence_k" + std::to_string(config.degree);
    write_convergence_csv(stem + ".csv", report.rows);
    nlohmann::json j;
    j["fd_mismatch"] = report.fd_mismatch;
    for (const auto& r : report.runs) j["runs"].push_back(run_diagnostics(r));
    write_json(stem + ".json", j);
  }
  return report;
}

/// Errors of the interpolated exact solution: the control run that bypasses
/// the solver.
inline std::vector<ErrorRow> interpolation_errors(int k, int g, const std::vector<double>& widths) {
  std::vector<ErrorRow> rows;
  for (double h : widths) {
    const GeneratedDomain d = generate_domain({DomainKind::ellipse, h, g});
    const Mesh mesh = curve_boundary(d.mesh, d.chart, g);
    const DofMap V = DofMap::nedelec(mesh, k), Q = DofMap::lagrange(mesh, k);
    const Vector u = interpolate_velocity(mesh, V, manufactured::velocity);
    Vector p = interpolate_scalar(mesh, Q, manufactured::pressure);
    const Vector m = assemble_pressure_mean(mesh, Q);
    p -= Vector::Constant(p.size(), m.dot(p) / m.sum());
    ErrorRow row = compute_errors(mesh, V, Q, u, p, manufactured::exact());
    row.h = h;
    rows.push_back(row);
  }
  return rows;
}

/// Sampling curve of a benchmark: 101 parameters in [0.001, 0.999].
inline std::vector<double> profile_parameters() {
  std::vector<double> gamma;
  for (int i = 0; i <= 100; ++i) gamma.push_back(0.001 + 0.998 * i / 100.0);
  return gamma;
}

/// Point of the sampling curve of `kind` at parameter gamma in (0, 1). The
/// cylinder curve is the upper half of the obstacle, angle pi * gamma.
inline Vec2 profile_point(CaseKind kind, double gamma) {
  switch (kind) {
    case CaseKind::annulus: return {1.0 + 3.0 * gamma, 0.0};
    case CaseKind::lid_cavity: return {0.5, gamma};
    case CaseKind::half_disk_cavity: return {0.0, gamma - 1.0};
    case CaseKind::cylinder: {
      const double t = std::numbers::pi * gamma;
      return {-std::cos(t), std::sin(t)};
    }
    case CaseKind::manufactured_ellipse: break;
  }
  throw std::invalid_argument("case has no sampling curve");
}

/// Samples u_h along the sampling curve. Curves running on a curved wall
/// can leave the discrete domain by the geometry error, so points within
/// 1% of the largest edge are accepted.
inline std::vector<ProfileSample> sample_profile(const RunResult& r) {
  const FieldEvaluator eval(r.mesh, r.V, r.Q, r.solution.u, r.solution.p, 1e-2 * r.max_edge);
  std::vector<ProfileSample> samples;
  for (double gamma : profile_parameters()) {
    ProfileSample s;
    s.gamma = gamma;
    s.point = profile_point(r.kind, gamma);
    s.velocity = eval.velocity(s.point);
    samples.push_back(s);
  }
  return samples;
}

/// Property checked on a benchmark solution besides the solver invariants.
struct PropertyCheck {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct BenchmarkResult {
  RunResult run;
  std::vector<ProfileSample> profile;
  std::vector<PropertyCheck> properties;

  bool passed() const {
    if (!run.checks.passed()) return false;
    for (const auto& p : properties)
      if (!p.passed) return false;
    return true;
  }
};

/// Relative L2 distance between u_h and the rigid rotation (-y, x).
inline double rigid_rotation_error(const RunResult& r) {
  ExactSolution rot;
  rot.u = [](const Vec2& x) { return Vec2(-x.y(), x.x()); };
  rot.curl = [](const Vec2&) { return 2.0; };
  const ErrorRow e = compute_errors(r.mesh, r.V, r.Q, r.solution.u, Vector(), rot);
  const ErrorRow norm = compute_errors(r.mesh, r.V, r.Q, Vector::Zero(r.V.num_dofs()), Vector(), rot);
  return e.u_l2 / norm.u_l2;
}

/// Largest |u_x(gamma) - u_x(1 - gamma)| over the cylinder profile, relative
/// to max |u_x|. The sampling parameters are symmetric about 1/2.
inline double profile_asymmetry(const std::vector<ProfileSample>& samples) {
  double diff = 0.0, scale = 0.0;
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    diff = std::max(diff, std::abs(samples[i].velocity.x() - samples[n - 1 - i].velocity.x()));
    scale = std::max(scale, std::abs(samples[i].velocity.x()));
  }
  return scale > 0 ? diff / scale : diff;
}

/// One benchmark flow at the first configured width, with its sampling
/// profile and case-specific property checks. Outputs are written only after
/// the solver invariants have been evaluated.
inline BenchmarkResult run_benchmark(const ExperimentConfig& config, const CheckTolerances& tol = {}) {
  validate(config);
  if (config.kind == CaseKind::manufactured_ellipse)
    throw std::invalid_argument("the manufactured case is a convergence study, not a benchmark");
  BenchmarkResult b;
  b.run = solve_case(config.kind, config.resolved_widths().front(), config.degree, config.resolved_geometry_order(),
                     config.curvature, config.cw, config.threads, config.solver, tol);
  b.profile = sample_profile(b.run);

  const auto property = [&](const std::string& name, double value, double bound, bool passed) {
    b.properties.push_back({name, value, bound, passed});
  };
  switch (config.kind) {
    case CaseKind::annulus: {
      double worst = 0.0, scale = 0.0;
      for (const auto& s : b.profile) {
        worst = std::max(worst, std::abs(s.magnitude() - s.point.norm()));
        scale = std::max(scale, s.magnitude());
      }
      property("profile |u_h| vs rigid rotation", worst / scale, 1e-3, worst <= 1e-3 * scale);
      const double rel = rigid_rotation_error(b.run);
      property("relative L2 error vs rigid rotation", rel, 1e-3, rel <= 1e-3);
      break;
    }
    case CaseKind::lid_cavity: {
      const FieldEvaluator eval(b.run.mesh, b.run.V, b.run.Q, b.run.solution.u, b.run.solution.p);
      const double top = eval.velocity(profile_point(config.kind, 0.999)).norm();
      property("|u| near the lid", top, 0.9, top >= 0.9);
      // The slip wall leaves a nonzero velocity at the bottom. There it is
      // the return flow of the primary vortex, so u_x itself is negative.
      const Vec2 bottom = eval.velocity(profile_point(config.kind, 0.02));
      property("|u| at gamma = 0.02 (no boundary layer at the slip wall)", bottom.norm(), 0.05, bottom.norm() > 0.05);
      property("u_x at gamma = 0.02 (return flow)", bottom.x(), 0.0, bottom.x() < 0.0);
      break;
    }
    case CaseKind::cylinder: {
      const double asym = profile_asymmetry(b.profile);
      property("mirror symmetry of u_x on the obstacle", asym, 0.05, asym <= 0.05);
      break;
    }
    case CaseKind::half_disk_cavity:
    case CaseKind::manufactured_ellipse: break;
  }

  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    const std::string stem = config.output_dir + "/" + to_string(config.kind);
    nlohmann::json j = run_diagnostics(b.run);
    for (const auto& p : b.properties)
      j["properties"].push_back({{"name", p.name}, {"value", p.value}, {"bound", p.bound}, {"passed", p.passed}});
    write_json(stem + ".json", j);
    if (b.run.checks.passed()) {
      write_profile_csv(stem + "_profile.csv", b.profile);
      write_vtk(stem + ".vtk", b.run.mesh, b.run.V, b.run.Q, b.run.solution.u, b.run.solution.p,
                b.run.geometry_order);
    }
  }
  return b;
}

}  // namespace hcurlslip
