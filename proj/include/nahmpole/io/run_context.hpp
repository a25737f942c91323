// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <string>
#include <vector>

#include "nahmpole/core_domain.hpp"
#include "nahmpole/elliptic_solver.hpp"
#include "nahmpole/io/config.hpp"
#include "nahmpole/io/field_file.hpp"
#include "nahmpole/io/report.hpp"

namespace nahmpole {

/// State shared by the subcommands of one run.
struct RunContext {
  const RunConfig& cfg;
  Report& report;
  std::filesystem::path out_dir;
  std::vector<std::string> artifacts;

  std::string path(const std::string& name) const { return (out_dir / (cfg.prefix + name)).string(); }

  FieldEncoding encoding() const { return cfg.encoding == "text" ? FieldEncoding::Text : FieldEncoding::Binary; }

  void save(const std::string& name, const ScalarField& f) {
    const std::string p = path(name + ".ebf");
    write_field(p, f, encoding());
    artifacts.push_back(p);
    report.set("artifact." + name, p);
  }

  void save(const std::string& name, const FieldFile& ff) {
    const std::string p = path(name + ".ebf");
    write_field_file(p, ff);
    artifacts.push_back(p);
    report.set("artifact." + name, p);
  }

  /// Data-only slice: CSV with a header row.
  void save_csv(const std::string& name, const std::vector<std::string>& columns,
                const std::vector<std::vector<double>>& rows) {
    const std::string p = path(name + ".csv");
    std::ofstream os(p);
    if (!os) throw InputError("cannot open '" + p + "' for writing");
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << "\n" << std::setprecision(17);
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << r[c];
      os << "\n";
    }
    artifacts.push_back(p);
    report.set("artifact." + name, p);
  }
};

namespace detail {

/// Bilinear periodic interpolation of a field stored on a limit-surface grid.
inline HorizontalFn surface_sampler(const std::string& path) {
  auto f = std::make_shared<const ScalarField>(read_field(path));
  const GradedGrid& g = f->grid_ref();
  if (g.kind() != DomainKind::LimitSurface) throw InputError("coefficient file '" + path + "' must hold a LimitSurface field");
  return [f](Complex z) {
    const GradedGrid& gg = f->grid_ref();
    const Axis& ax = gg.axis(0);
    const Axis& a3 = gg.axis(1);
    auto locate = [](const Axis& a, double x, std::size_t& k, double& t) {
      const double n = static_cast<double>(a.nodes.size());
      double s = (x - a.nodes.front()) / a.period * n;
      s -= n * std::floor(s / n);
      k = static_cast<std::size_t>(s) % a.nodes.size();
      t = s - std::floor(s);
    };
    std::size_t i = 0, j = 0;
    double tx = 0.0, t3 = 0.0;
    locate(ax, z.real(), i, tx);
    locate(a3, z.imag(), j, t3);
    const std::size_t i1 = (i + 1) % ax.nodes.size();
    const std::size_t j1 = (j + 1) % a3.nodes.size();
    const std::size_t n3 = a3.nodes.size();
    const auto& v = f->values();
    return (1 - tx) * (1 - t3) * v[i * n3 + j] + tx * (1 - t3) * v[i1 * n3 + j] + (1 - tx) * t3 * v[i * n3 + j1] +
           tx * t3 * v[i1 * n3 + j1];
  };
}

}  // namespace detail

/// Higgs data described by the config: a polynomial with its knots, field files, or constants.
inline HiggsData higgs_data(const RunConfig& c) {
  HiggsData d;
  if (c.poly) {
    d = HiggsData::from_polynomial(Polynomial(*c.poly), c.knots);
  } else {
    d = HiggsData::constant(c.K, c.alpha_sq, c.beta_sq);
    d.knots = c.knots;
    if (!c.alpha_sq_file.empty()) d.alpha_sq = detail::surface_sampler(c.alpha_sq_file);
  }
  if (c.K != 0.0 || !c.K_file.empty()) {
    const double K = c.K;
    d.K = c.K_file.empty() ? HorizontalFn([K](Complex) { return K; }) : detail::surface_sampler(c.K_file);
  }
  if (c.beta_sq != 0.0 || !c.beta_sq_file.empty()) {
    const double b = c.beta_sq;
    d.beta_sq = c.beta_sq_file.empty() ? HorizontalFn([b](Complex) { return b; }) : detail::surface_sampler(c.beta_sq_file);
  }
  const double g0 = c.g0_sq;
  d.g0_sq = [g0](Complex) { return g0; };
  return d;
}

inline GridPtr config_grid(const RunConfig& c, const std::vector<std::size_t>& resolution) {
  return build_grid(c.domain, std::span<const std::size_t>(resolution), c.grading);
}

inline SolveOptions solve_options(const RunConfig& c) {
  SolveOptions o;
  o.tol = c.tol;
  o.max_iterations = c.max_iterations;
  o.lambda_override = c.lambda;
  o.from_above = c.from_above;
  o.polish = c.polish;
  return o;
}

inline BarrierParams barrier_params(const RunConfig& c) {
  BarrierParams b;
  b.A = c.A;
  b.A1 = c.A1;
  b.A2 = c.A2;
  b.eps = c.eps;
  return b;
}

inline SolveMethod solve_method(const RunConfig& c) {
  return c.method == "newton" ? SolveMethod::Newton : SolveMethod::Monotone;
}

/// Adds the solver report, barrier check and flags under `prefix`.
inline void report_solve(Report& r, const DomainSolution& s, double tol, const std::string& prefix = "solve.") {
  r.set(prefix + "method", s.report.method);
  r.set(prefix + "iterations", s.report.iterations);
  r.set(prefix + "polish_iterations", s.report.polish_iterations);
  r.set(prefix + "unknowns", s.report.unknowns);
  r.set(prefix + "seconds", s.report.seconds);
  r.set(prefix + "final_residual", s.report.final_residual);
  r.set(prefix + "final_change", s.report.final_change);
  r.set(prefix + "residual_floor", s.report.residual_floor);
  r.set(prefix + "max_clamped", s.report.max_clamped);
  r.set(prefix + "barrier_doublings", s.barrier_doublings);
  r.set(prefix + "barrier_A", s.barriers.params.A);
  r.set(prefix + "barrier_A1", s.barriers.params.A1);
  r.set(prefix + "barrier_A2", s.barriers.params.A2);
  r.set(prefix + "barrier_min_upper", s.barrier_report.min_upper);
  r.set(prefix + "barrier_max_lower", s.barrier_report.max_lower);
  r.set(prefix + "barrier_violations", s.barrier_report.violations.size());
  r.check(prefix + "barriers_valid", s.barrier_report.valid());
  r.check(prefix + "converged", s.report.converged);
  if (s.report.method.rfind("monotone", 0) == 0) {
    r.check(prefix + "all_monotone", s.report.all_monotone);
    r.check(prefix + "all_bracketed", s.report.all_bracketed);
  }
  r.check(prefix + "residual_within_tol", s.report.final_residual <= std::max(tol, s.report.residual_floor));
}

}  // namespace nahmpole
