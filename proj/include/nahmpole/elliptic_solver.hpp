// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nahmpole/model_library.hpp"

namespace nahmpole {

struct SolveOptions {
  double tol = 1e-10;
  int max_iterations = 3000;
  double lambda_factor = 1.1;
  std::optional<double> lambda_override;  // constant shift instead of the per-node bound
  bool from_above = false;                // return the upper sequence
  double monotone_slack = 1e-12;
  bool polish = true;  // finish a monotone solve with Newton steps inside the final bracket
  LinearSolveOptions linear;
};

struct IterationLog {
  double change = 0.0;    // max |v_{k+1} - v_k| over both sequences
  double residual = 0.0;  // max |N^(v)| of the returned sequence
  double gap = 0.0;       // max (upper - lower)
  bool monotone = true;
  bool bracketed = true;
};

struct SolveReport {
  std::string method;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationLog> log;
  double final_residual = 0.0;
  double final_change = 0.0;
  double residual_floor = 0.0;  // roundoff level of the residual evaluation
  bool all_monotone = true;
  bool all_bracketed = true;
  double max_clamped = 0.0;  // largest wrong-sign increment removed (linear-solver noise)
  int polish_iterations = 0;
  std::size_t unknowns = 0;
  double seconds = 0.0;
};

struct SolveResult {
  ScalarField v;
  ScalarField lower;
  ScalarField upper;
  SolveReport report;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double max_abs_unknown(const SemilinearProblem& p, const std::vector<double>& r) {
  double m = 0.0;
  for (std::size_t i : p.op->unknown_nodes()) {
    if (!std::isfinite(r[i])) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(r[i]));
  }
  return m;
}

/// Magnitude of rounding in N^(v): eps times the largest term at any unknown.
inline double residual_floor(const SemilinearProblem& p, const std::vector<double>& v) {
  const auto& op = *p.op;
  const auto& rho = op.row_scale();
  const auto& nodes = op.unknown_nodes();
  double m = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t i = nodes[k];
    const double terms = std::abs(op.row_flux(k, v)) / rho[i] + std::abs(p.nonlinearity(i, v[i])) + std::abs(p.f[i]) +
                         std::abs(v[i]) * p.nonlinearity_derivative(i, v[i]);
    m = std::max(m, terms);
  }
  return 64.0 * std::numeric_limits<double>::epsilon() * m;
}

inline Eigen::VectorXd scaled_residual(const SemilinearProblem& p, const std::vector<double>& r) {
  const auto& nodes = p.op->unknown_nodes();
  const auto& rho = p.op->row_scale();
  Eigen::VectorXd b(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) b(static_cast<Eigen::Index>(k)) = -rho[nodes[k]] * r[nodes[k]];
  return b;
}

}  // namespace detail

/// Coupled monotone iteration from the lower and upper barriers.
///
/// Each step solves (S + rho lambda) d = -rho N^(w) for both sequences with a per-node shift
/// lambda >= sup of the nonlinearity derivative over the current bracket, so the lower sequence
/// rises, the upper one falls and both stay sub/supersolutions.
inline SolveResult monotone_iterate(const SemilinearProblem& problem, const BarrierPair& barriers,
                                    const SolveOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(opt.tol > 0.0)) throw InputError("tolerance must be positive");
  const DiscreteOperator& op = *problem.op;
  const auto& nodes = op.unknown_nodes();
  const std::size_t n = problem.grid->size();
  SolveResult out;
  out.report.method = "monotone";
  out.report.unknowns = nodes.size();
  std::vector<double> lo = problem.with_boundary(barriers.lower.values()).values();
  std::vector<double> up = problem.with_boundary(barriers.upper.values()).values();
  for (std::size_t i : nodes) {
    if (!(lo[i] <= up[i])) throw InputError("lower barrier exceeds upper barrier at node " + std::to_string(i));
    if (!std::isfinite(lo[i]) || !std::isfinite(up[i])) throw InputError("barriers must be finite at unknown nodes");
  }
  std::vector<double> shift(n, 0.0);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (std::size_t i : nodes) {
      if (opt.lambda_override) {
        shift[i] = *opt.lambda_override;
      } else {
        shift[i] = opt.lambda_factor * (2.0 * problem.c_plus[i] * std::exp(2.0 * up[i]) +
                                        2.0 * problem.c_minus[i] * std::exp(-2.0 * lo[i]));
      }
    }
    ShiftedSystem sys(op, shift, opt.linear);
    const Eigen::VectorXd dl = sys.solve(detail::scaled_residual(problem, problem.residual(lo)));
    const Eigen::VectorXd du = sys.solve(detail::scaled_residual(problem, problem.residual(up)));
    const double scale = std::max({1.0, dl.cwiseAbs().maxCoeff(), du.cwiseAbs().maxCoeff()});
    const double slack = opt.monotone_slack * scale + (sys.direct() ? 0.0 : 1e3 * opt.linear.tol * scale);
    IterationLog entry;
    bool finite = true;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const std::size_t i = nodes[k];
      double a = dl(static_cast<Eigen::Index>(k));
      double b = du(static_cast<Eigen::Index>(k));
      if (a < -slack || b > slack) entry.monotone = false;
      if (a < 0.0) {
        out.report.max_clamped = std::max(out.report.max_clamped, -a);
        a = 0.0;
      }
      if (b > 0.0) {
        out.report.max_clamped = std::max(out.report.max_clamped, b);
        b = 0.0;
      }
      lo[i] += a;
      up[i] += b;
      if (!std::isfinite(lo[i]) || !std::isfinite(up[i])) finite = false;
      entry.change = std::max({entry.change, a, -b});
      if (lo[i] > up[i] + slack) entry.bracketed = false;
      entry.gap = std::max(entry.gap, up[i] - lo[i]);
    }
    const std::vector<double>& cur = opt.from_above ? up : lo;
    entry.residual = detail::max_abs_unknown(problem, problem.residual(cur));
    if (!finite || !std::isfinite(entry.residual)) {
      throw ConvergenceError("monotone iteration produced non-finite values at step " + std::to_string(it) +
                             "; the barriers are too large for the exponential terms");
    }
    out.report.log.push_back(entry);
    out.report.iterations = it;
    out.report.all_monotone = out.report.all_monotone && entry.monotone;
    out.report.all_bracketed = out.report.all_bracketed && entry.bracketed;
    if (!entry.monotone) {
      throw InvariantError("monotone iteration lost monotonicity at step " + std::to_string(it) +
                           "; the shift is too small or the barriers are invalid");
    }
    if (!entry.bracketed) throw InvariantError("monotone iterates crossed at step " + std::to_string(it));
    if (entry.change <= opt.tol) {
      out.report.converged = true;
      break;
    }
  }
  out.lower = ScalarField(problem.grid, lo);
  out.upper = ScalarField(problem.grid, up);
  out.v = opt.from_above ? out.upper : out.lower;
  out.report.final_change = out.report.log.empty() ? 0.0 : out.report.log.back().change;
  out.report.final_residual = out.report.log.empty() ? 0.0 : out.report.log.back().residual;
  out.report.residual_floor = detail::residual_floor(problem, out.v.values());
  out.report.seconds = detail::seconds_since(t0);
  if (!out.report.converged) {
    throw ConvergenceError("monotone iteration did not converge in " + std::to_string(opt.max_iterations) +
                           " steps (last change " + std::to_string(out.report.final_change) + ")");
  }
  return out;
}

/// Damped Newton iteration on N^(v) = 0, optionally clamped to barriers.
inline SolveResult newton_solve(const SemilinearProblem& problem, const ScalarField& init, const SolveOptions& opt = {},
                                const BarrierPair* barriers = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const DiscreteOperator& op = *problem.op;
  const auto& nodes = op.unknown_nodes();
  SolveResult out;
  out.report.method = "newton";
  out.report.unknowns = nodes.size();
  std::vector<double> v = problem.with_boundary(init.values()).values();
  auto clamp = [&](std::vector<double>& w) {
    if (barriers == nullptr) return;
    for (std::size_t i : nodes) w[i] = std::clamp(w[i], barriers->lower[i], barriers->upper[i]);
  };
  clamp(v);
  std::vector<double> r = problem.residual(v);
  double rn = detail::max_abs_unknown(problem, r);
  std::vector<double> shift(problem.grid->size(), 0.0);
  for (int it = 0; it <= opt.max_iterations; ++it) {
    const double floor = detail::residual_floor(problem, v);
    out.report.residual_floor = floor;
    if (rn <= std::max(opt.tol, floor)) {
      out.report.converged = true;
      out.report.iterations = it;
      break;
    }
    if (it == opt.max_iterations) break;
    for (std::size_t i : nodes) shift[i] = problem.nonlinearity_derivative(i, v[i]);
    ShiftedSystem sys(op, shift, opt.linear);
    const Eigen::VectorXd d = sys.solve(detail::scaled_residual(problem, r));
    double t = 1.0;
    bool accepted = false;
    std::vector<double> trial(v.size());
    std::vector<double> rt;
    double rtn = 0.0;
    while (t >= 1.0 / 1024.0) {
      trial = v;
      for (std::size_t k = 0; k < nodes.size(); ++k) trial[nodes[k]] += t * d(static_cast<Eigen::Index>(k));
      clamp(trial);
      rt = problem.residual(trial);
      rtn = detail::max_abs_unknown(problem, rt);
      if (std::isfinite(rtn) && rtn <= (1.0 - 1e-4 * t) * rn) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    double step = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) step = std::max(step, std::abs(trial[nodes[k]] - v[nodes[k]]));
    if (!accepted) {
      // A full step that barely moves v means the residual sits at its rounding floor.
      if (step <= 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + d.cwiseAbs().maxCoeff()) ||
          rn <= 100.0 * std::max(opt.tol, floor)) {
        out.report.iterations = it;
        out.report.converged = rn <= 100.0 * std::max(opt.tol, floor);
        break;
      }
      throw ConvergenceError("Newton line search failed at residual " + std::to_string(rn) +
                             "; try the monotone iteration");
    }
    v = std::move(trial);
    r = std::move(rt);
    rn = rtn;
    IterationLog entry;
    entry.change = step;
    entry.residual = rn;
    out.report.log.push_back(entry);
    out.report.iterations = it + 1;
  }
  out.v = ScalarField(problem.grid, v);
  out.report.final_residual = rn;
  out.report.final_change = out.report.log.empty() ? 0.0 : out.report.log.back().change;
  out.report.seconds = detail::seconds_since(t0);
  if (!out.report.converged) {
    throw ConvergenceError("Newton iteration stopped at residual " + std::to_string(rn) + " above tolerance " +
                           std::to_string(opt.tol));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Limit surface.
// ---------------------------------------------------------------------------

struct SurfaceSolution {
  ScalarField u;
  BarrierPair barriers;
  double barrier_shift = 0.0;
  SolveReport report;
};

inline SemilinearProblem surface_problem(const GridPtr& grid, const HiggsData& data) {
  const GradedGrid& g = *grid;
  ScalarField f(grid, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Complex z = g.z(i);
    f[i] = data.K(z) + data.alpha_sq(z) - data.beta_sq(z);
  }
  return assemble_problem(grid, data, ScalarField(grid, 0.0), f, OperatorMode::Surface);
}

/// Solves K + L u + |alpha|^2 e^{2u} - |beta|^2 e^{-2u} = 0 on the periodic surface.
inline SurfaceSolution solve_limit_surface(const GridPtr& grid, const HiggsData& data, const SolveOptions& opt = {}) {
  const GradedGrid& g = *grid;
  if (g.kind() != DomainKind::LimitSurface) throw InputError("solve_limit_surface needs a limit-surface grid");
  const auto a2 = sample_horizontal(g, data.alpha_sq);
  if (std::all_of(a2.begin(), a2.end(), [](double x) { return x == 0.0; })) {
    throw InputError("unstable data: alpha_sq vanishes identically");
  }
  const SemilinearProblem problem = surface_problem(grid, data);
  const DiscreteOperator& op = *problem.op;
  const auto& rho = op.row_scale();
  auto centered = [&](const std::vector<double>& x) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      num += rho[i] * x[i];
      den += rho[i];
    }
    ScalarField out(grid, 0.0);
    double spread = 0.0, size = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      out[i] = num / den - x[i];
      spread = std::max(spread, std::abs(out[i]));
      size = std::max(size, std::abs(x[i]));
    }
    // Constant data: the centered field is pure rounding.
    if (spread <= 1e-13 * size) std::fill(out.values().begin(), out.values().end(), 0.0);
    return out;
  };
  // L w- = Kbar - K and L w+ = B - |alpha|^2, both mean-zero right-hand sides.
  const ScalarField wm = linear_solve(op, {}, centered(sample_horizontal(g, data.K)), nullptr, opt.linear);
  const ScalarField wp = linear_solve(op, {}, centered(a2), nullptr, opt.linear);
  SurfaceSolution out;
  double A = 1.0;
  for (int it = 0; it < 60; ++it, A *= 2.0) {
    ScalarField lo(grid, 0.0), hi(grid, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      lo[i] = wm[i] - A;
      hi[i] = wp[i] + A;
    }
    out.barriers = BarrierPair::from_fields(lo, hi);
    if (verify_barrier(problem, out.barriers).valid()) break;
    if (it == 59) throw ConvergenceError("no valid surface barriers found; the data may be unstable");
  }
  out.barrier_shift = A;
  SolveResult r = monotone_iterate(problem, out.barriers, opt);
  out.u = r.v;
  out.report = r.report;
  return out;
}

// ---------------------------------------------------------------------------
// Half-cylinder.
// ---------------------------------------------------------------------------

struct DomainSolution {
  ScalarField u;  // u_hat + v (finite surrogate on y = 0 nodes)
  ScalarField v;
  ApproximateSolution approx;
  BarrierPair barriers;
  BarrierReport barrier_report;
  int barrier_doublings = 0;
  SemilinearProblem problem;
  SolveReport report;
  std::optional<SurfaceSolution> surface;
};

enum class SolveMethod { Monotone, Newton };

namespace detail {

inline void finish_solution(DomainSolution& s, const SolveOptions& opt, SolveMethod method) {
  SolveResult r = method == SolveMethod::Monotone ? monotone_iterate(s.problem, s.barriers, opt)
                                                  : newton_solve(s.problem, ScalarField(s.problem.grid, 0.0), opt,
                                                                 &s.barriers);
  if (method == SolveMethod::Monotone && opt.polish && r.report.final_residual > opt.tol) {
    const BarrierPair bracket = BarrierPair::from_fields(r.lower, r.upper);
    const SolveResult nt = newton_solve(s.problem, r.v, opt, &bracket);
    r.v = nt.v;
    r.report.method = "monotone+newton";
    r.report.polish_iterations = nt.report.iterations;
    r.report.final_residual = nt.report.final_residual;
    r.report.residual_floor = nt.report.residual_floor;
    r.report.seconds += nt.report.seconds;
  }
  s.v = r.v;
  s.report = r.report;
  s.u = ScalarField(s.problem.grid, 0.0);
  for (std::size_t i = 0; i < s.u.size(); ++i) s.u[i] = s.approx.u_hat[i] + s.v[i];
}

}  // namespace detail

struct CylinderOptions {
  SolveOptions solve;
  SolveMethod method = SolveMethod::Monotone;
  ApproxParams approx;
  BarrierParams barrier{1.0, 1.0, 1.0, 0.5};
};

inline DomainSolution solve_half_cylinder(const GridPtr& grid, const HiggsData& data, const CylinderOptions& opt = {}) {
  const GradedGrid& g = *grid;
  if (g.kind() != DomainKind::TorusHalfCylinder) throw InputError("solve_half_cylinder needs a half-cylinder grid");
  if (!data.knots.empty()) {
    throw InputError("knot singularities are supported on the plane and axisymmetric domains only");
  }
  if (g.y(0) != 0.0) throw InputError("the half-cylinder grid must include the y = 0 face");
  DomainSolution s;
  s.surface = solve_limit_surface(g.horizontal_grid(), data, opt.solve);
  s.approx = build_approximate_solution(grid, data, opt.approx, &s.surface->u);
  s.problem = assemble_problem(grid, data, s.approx.u_hat, s.approx.source, OperatorMode::Cylinder);
  const TunedBarriers tb = tune_barriers(s.problem, opt.barrier,
                                         [&](const BarrierParams& p) { return build_cylinder_barriers(grid, p); });
  s.barriers = tb.pair;
  s.barrier_report = tb.report;
  s.barrier_doublings = tb.doublings;
  detail::finish_solution(s, opt.solve, opt.method);
  return s;
}

// ---------------------------------------------------------------------------
// Knot problems on the plane and the axisymmetric slab.
// ---------------------------------------------------------------------------

struct KnotOptions {
  SolveOptions solve;
  SolveMethod method = SolveMethod::Monotone;
  ApproxParams approx;
  BarrierParams barrier{1.0, 1.0, 1.0, 0.5};
  std::size_t hemisphere_resolution = 256;
};

inline void check_knot_data(const GradedGrid& g, const HiggsData& data) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Complex z = g.z(i);
    if (data.K(z) != 0.0 || data.beta_sq(z) != 0.0 || data.g0_sq(z) != 1.0) {
      throw InputError("knot problems require K = 0, beta = 0 and the flat metric");
    }
  }
}

/// Solves -(Lap + d_y^2) u + |p|^2 e^{2u} = 0 with u = u_hat + v and v = 0 on the Dirichlet faces.
inline DomainSolution solve_knot_plane(const GridPtr& grid, const HiggsData& data, const KnotOptions& opt = {}) {
  const GradedGrid& g = *grid;
  if (g.kind() != DomainKind::PlaneHalfSpace && g.kind() != DomainKind::AxisymSlab) {
    throw InputError("knot solves need a plane or axisymmetric grid");
  }
  check_knot_data(g, data);
  DomainSolution s;
  s.approx = build_approximate_solution(grid, data, opt.approx);
  // Lateral and top faces carry the centered far field; v vanishes on the bottom face.
  const Complex c = g.kind() == DomainKind::AxisymSlab ? Complex{0.0, 0.0} : g.spec().center;
  ScalarField boundary(grid, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const NodeClass cls = g.classify(i);
    if (cls == NodeClass::Lateral || cls == NodeClass::Top) {
      boundary[i] = detail::knot_far_field(*data.poly, c, g.z(i), g.y(i)) - s.approx.u_hat[i];
    }
  }
  s.problem = assemble_problem(grid, data, s.approx.u_hat, s.approx.source, mode_for(g), &boundary);
  const auto ground = ground_states_for(data, opt.hemisphere_resolution);
  const TunedBarriers tb = tune_barriers(s.problem, opt.barrier, [&](const BarrierParams& p) {
    return build_knot_barriers(grid, data, p, ground);
  });
  s.barriers = tb.pair;
  s.barrier_report = tb.report;
  s.barrier_doublings = tb.doublings;
  detail::finish_solution(s, opt.solve, opt.method);
  return s;
}

/// True when p(z) = c (z - a)^n, in which case the problem is axisymmetric about a.
inline bool is_single_knot(const Polynomial& p, const std::vector<KnotPoint>& knots) {
  return p.degree() == 0 || (knots.size() == 1 && knots[0].order == p.degree());
}

// ---------------------------------------------------------------------------
// Convergence studies.
// ---------------------------------------------------------------------------

struct StudyRow {
  std::size_t resolution = 0;
  double h = 0.0;
  double error = 0.0;
  double seconds = 0.0;
};

struct StudyTable {
  std::vector<StudyRow> rows;
  std::vector<double> pairwise_orders;
  double order = 0.0;  // least-squares slope of log error against log h
};

inline void check_study_resolutions(const std::vector<std::size_t>& res) {
  if (res.size() < 3) throw InputError("a convergence study needs at least three resolutions");
  for (std::size_t i = 0; i < res.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (res[i] == res[j]) throw InputError("non-distinct resolutions");
    }
  }
  std::vector<std::size_t> s = res;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] != 2 * s[i - 1]) throw InputError("resolutions must be dyadic");
  }
}

inline StudyTable fit_orders(std::vector<StudyRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const StudyRow& a, const StudyRow& b) { return a.resolution < b.resolution; });
  StudyTable t;
  t.rows = rows;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    if (!(r.error > 0.0) || !std::isfinite(r.error)) throw InvariantError("study errors must be positive and finite");
    const double x = std::log(r.h);
    const double y = std::log(r.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(rows.size());
  t.order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    t.pairwise_orders.push_back(std::log(rows[i - 1].error / rows[i].error) / std::log(rows[i - 1].h / rows[i].h));
  }
  return t;
}

/// Runs `error_at(N)` for each resolution and fits the order in h = 1/N.
inline StudyTable convergence_study(const std::vector<std::size_t>& resolutions,
                                    const std::function<double(std::size_t)>& error_at) {
  check_study_resolutions(resolutions);
  std::vector<StudyRow> rows;
  for (std::size_t N : resolutions) {
    const auto t0 = std::chrono::steady_clock::now();
    StudyRow r;
    r.resolution = N;
    r.h = 1.0 / static_cast<double>(N);
    r.error = error_at(N);
    r.seconds = detail::seconds_since(t0);
    rows.push_back(r);
  }
  return fit_orders(std::move(rows));
}

/// Max |u - exact| over unknown nodes with y at least `y_floor`.
inline double interior_error(const DomainSolution& s, const std::function<double(std::size_t)>& exact,
                             double y_floor = 0.0) {
  const GradedGrid& g = *s.problem.grid;
  double e = 0.0;
  for (std::size_t i : s.problem.op->unknown_nodes()) {
    if (g.y(i) < y_floor) continue;
    e = std::max(e, std::abs(s.u[i] - exact(i)));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Boundary expansion fit.
// ---------------------------------------------------------------------------

struct ExpansionFit {
  double c0 = 0.0;   // constant term of u + log y
  double a20 = 0.0;  // y^2 coefficient
  double a21 = 0.0;  // y^2 log y coefficient
  std::size_t samples = 0;
};

/// Least-squares fit of w = u + log y against 1, y^2, y^2 log y and the three y^4 log^k y terms on (0, y_max].
inline ExpansionFit fit_boundary_expansion(const std::vector<double>& y, const std::vector<double>& u, double y_max) {
  if (y.size() != u.size()) throw InputError("profile sizes differ");
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (y[k] > 0.0 && y[k] <= y_max && std::isfinite(u[k])) keep.push_back(k);
  }
  constexpr int P = 6;
  if (keep.size() < 2 * P) throw InputError("too few samples below the fit height");
  const auto M = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd A(M, P);
  Eigen::VectorXd b(M);
  for (Eigen::Index r = 0; r < M; ++r) {
    const double t = y[keep[static_cast<std::size_t>(r)]];
    const double L = std::log(t);
    const double t2 = t * t;
    A.row(r) << 1.0, t2, t2 * L, t2 * t2, t2 * t2 * L, t2 * t2 * L * L;
    b(r) = u[keep[static_cast<std::size_t>(r)]] + L;
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return {c(0), c(1), c(2), keep.size()};
}

/// The vertical profile (y, u) of a solution above horizontal node `column`.
inline std::pair<std::vector<double>, std::vector<double>> vertical_profile(const DomainSolution& s,
                                                                            std::size_t column) {
  const GradedGrid& g = *s.problem.grid;
  if (!g.has_vertical()) throw InputError("solution has no vertical axis");
  const std::size_t ya = g.vertical_axis();
  const std::size_t base = column * g.axis(ya).size();
  if (base >= g.size()) throw InputError("column index out of range");
  std::vector<double> y, u;
  for (std::size_t k = 0; k < g.axis(ya).size(); ++k) {
    const std::size_t i = base + k * g.stride(ya);
    y.push_back(g.y(i));
    u.push_back(s.u[i]);
  }
  return {y, u};
}

}  // namespace nahmpole
