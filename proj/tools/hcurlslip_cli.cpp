// Command-line driver: convergence studies, benchmark flows and stability probes.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcurlslip/curving.hpp"
#include "hcurlslip/harness.hpp"
#include "hcurlslip/stability.hpp"

using namespace hcurlslip;

namespace {

struct SolveArgs {
  std::string case_name = "manufactured_ellipse";
  int degree = 3;
  int geometry_order = 0;  // 0: k + 2
  std::vector<double> widths;
  std::string curvature = "geometric";
  double cw = 0.0;  // 0: 10 k^2
  std::string out;
  bool sequential = false;
  bool iterative = false;
  bool no_probe = false;
};

struct ProbeArgs {
  std::string what = "poincare";
  std::string domain = "unit_square";
  int degree = 1;
  int pressure_degree = 0;  // 0: same as degree
  int geometry_order = 0;   // 0: k + 2
  std::vector<double> widths{0.5, 0.25, 0.125};
  std::string out;
};

void print_rows(const char* label, const std::vector<ErrorRow>& rows) {
  std::printf("%-6s %10s %12s %12s %12s %12s %12s\n", label, "h", "u_L2", "u_Hcurl", "u_sharp", "p_L2", "p_H1");
  for (const auto& r : rows)
    std::printf("%-6s %10.4g %12.4e %12.4e %12.4e %12.4e %12.4e\n", "", r.h, r.u_l2, r.u_hcurl, r.u_sharp, r.p_l2,
                r.p_h1);
}

void print_failures(const RunResult& r) {
  for (const auto& f : r.checks.failures) std::printf("  FAILED h=%g: %s\n", r.h, f.c_str());
  if (r.solution.kernel.suspected) std::printf("  WARNING: %s\n", r.solution.kernel.message.c_str());
}

int run_solve(const SolveArgs& a) {
  ExperimentConfig c;
  c.kind = parse_case_kind(a.case_name);
  c.degree = a.degree;
  if (a.geometry_order > 0) c.geometry_order = a.geometry_order;
  c.widths = a.widths;
  c.curvature = parse_curvature_source(a.curvature);
  if (a.cw > 0.0) c.cw = a.cw;
  c.output_dir = a.out;
  c.threads = a.sequential ? 1 : int(std::max(1u, std::thread::hardware_concurrency()));
  c.solver.iterative = a.iterative;
  c.solver.probe_kernel = !a.no_probe;
  validate(c);

  bool ok = true;
  if (c.kind == CaseKind::manufactured_ellipse) {
    const ErrorReport report = run_convergence(c);
    std::printf("manufactured solution on the ellipse, k = %d, g = %d\n", c.degree, c.resolved_geometry_order());
    print_rows("error", report.rows);
    print_rows("rate", report.rates);
    for (const auto& r : report.runs) print_failures(r);
    ok = report.passed();
  } else {
    const auto widths = c.resolved_widths();
    for (double h : widths) {
      ExperimentConfig one = c;
      one.widths = {h};
      if (!c.output_dir.empty() && widths.size() > 1)
        one.output_dir = (std::filesystem::path(c.output_dir) / ("h_" + std::to_string(h))).string();
      const BenchmarkResult b = run_benchmark(one);
      std::printf("%s, k = %d, g = %d, h = %g: %d cells, %d + %d dofs, %.2f s\n", to_string(c.kind), c.degree,
                  one.resolved_geometry_order(), h, b.run.mesh.num_cells(), b.run.V.num_dofs(), b.run.Q.num_dofs(),
                  b.run.seconds);
      std::printf("  residuals %.2e / %.2e, divergence defect %.2e, pressure recovery %.2e\n",
                  b.run.checks.momentum_residual, b.run.checks.constraint_residual, b.run.checks.divergence_defect,
                  b.run.checks.pressure_recovery);
      for (const auto& p : b.properties)
        std::printf("  [%s] %s = %.4g (bound %.4g)\n", p.passed ? "ok" : "FAILED", p.name.c_str(), p.value, p.bound);
      print_failures(b.run);
      ok = ok && b.passed();
    }
  }
  return ok ? 0 : 1;
}

int run_probe(const ProbeArgs& a) {
  if (a.what != "poincare" && a.what != "infsup") throw std::invalid_argument("--what must be poincare or infsup");
  const DomainKind domain = parse_domain_kind(a.domain);
  const int kp = a.pressure_degree > 0 ? a.pressure_degree : a.degree;
  const int g = a.geometry_order > 0 ? a.geometry_order : a.degree + 2;
  nlohmann::json j;
  j["what"] = a.what;
  j["domain"] = a.domain;
  j["degree"] = a.degree;
  std::vector<double> constants;
  for (double h : a.widths) {
    const GeneratedDomain d = generate_domain({domain, h, 1});
    const Mesh mesh = curve_boundary(d.mesh, d.chart, g);
    const StabilityEstimate est =
        a.what == "poincare" ? estimate_discrete_poincare(mesh, a.degree) : estimate_infsup_b(mesh, a.degree, kp);
    constants.push_back(est.constant);
    std::printf("%s h = %g: constant %.8g, eigenvalue %.6e, %d iterations\n", a.what.c_str(), h, est.constant,
                est.eigenvalue, est.iterations);
    j["levels"].push_back({{"h", h}, {"constant", est.constant}, {"eigenvalue", est.eigenvalue},
                           {"iterations", est.iterations}});
  }
  const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
  const double variation = (*hi - *lo) / *lo;
  std::printf("relative variation %.4f\n", variation);
  j["variation"] = variation;
  if (!a.out.empty()) {
    std::filesystem::create_directories(a.out);
    write_json((std::filesystem::path(a.out) / ("probe_" + a.what + ".json")).string(), j);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"H(curl)-conforming Stokes solver with Navier slip boundary conditions"};
  app.set_config("--config", "", "TOML file with the same keys as the flags");
  app.set_help_flag("--help", "print this help and exit");  // --h is the mesh-width list
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "convergence study or benchmark flow");
  s->add_option("--case", solve.case_name, "manufactured_ellipse|annulus|lid_cavity|half_disk_cavity|cylinder");
  s->add_option("--degree,-k", solve.degree, "Nedelec degree k (1..3)");
  s->add_option("--geom-order,-g", solve.geometry_order, "geometry order (default k + 2)");
  s->add_option("--h", solve.widths, "mesh widths, strictly decreasing")->delimiter(',');
  s->add_option("--curvature", solve.curvature, "analytic|geometric");
  s->add_option("--cw", solve.cw, "Nitsche penalty (default 10 k^2)");
  s->add_option("--out", solve.out, "output directory");
  s->add_flag("--seq", solve.sequential, "assemble on one thread");
  s->add_flag("--iterative", solve.iterative, "preconditioned MINRES instead of sparse LU");
  s->add_flag("--no-probe", solve.no_probe, "skip the kernel probe");

  ProbeArgs probe;
  auto* p = app.add_subcommand("probe", "discrete Poincare or inf-sup constant over refinements");
  p->add_option("--what", probe.what, "poincare|infsup");
  p->add_option("--domain", probe.domain, "ellipse|disk|annulus|unit_square|half_disk|square_minus_disk");
  p->add_option("--degree,-k", probe.degree, "Nedelec degree");
  p->add_option("--pressure-degree", probe.pressure_degree, "Lagrange degree (default k)");
  p->add_option("--geom-order,-g", probe.geometry_order, "geometry order (default k + 2)");
  p->add_option("--h", probe.widths, "mesh widths")->delimiter(',');
  p->add_option("--out", probe.out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*s) return run_solve(solve);
    return run_probe(probe);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
