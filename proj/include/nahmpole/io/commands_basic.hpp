// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nahmpole/io/run_context.hpp"
#include "nahmpole/model_solutions.hpp"
#include "nahmpole/spectral.hpp"

namespace nahmpole {

/// S_n on the quarter arc, U_n along a ray, and the model Higgs fields, for n = 0..order.
inline void run_model(RunContext& ctx) {
  const RunConfig& c = ctx.cfg;
  Report& r = ctx.report;
  const std::size_t m = c.samples;
  double worst = 0.0;
  for (int n = 0; n <= c.order; ++n) {
    auto& ts = r.table("S_" + std::to_string(n), {"psi", "S_n", "dS_n"});
    auto& tu = r.table("U_" + std::to_string(n), {"r", "y", "U_n", "closed_form"});
    auto& tp = r.table("model_fields_" + std::to_string(n), {"R", "psi", "phi_z_abs", "phi1_diag"});
    for (std::size_t k = 0; k < m; ++k) {
      const double psi = 0.5 * kPi * static_cast<double>(k + 1) / static_cast<double>(m);
      Report::add_row(ts, {psi, eval_Sn(n, psi), eval_Sn_derivative(n, psi)});
      const double R = 1.0;
      const double rr = R * std::cos(psi);
      const double y = R * std::sin(psi);
      const UnValue u = eval_Un(n, rr, y);
      worst = std::max(worst, u.consistency / std::max(1.0, std::abs(u.value)));
      Report::add_row(tu, {rr, y, u.value, u.closed_form});
      const ModelPhi ph = eval_model_phi(n, R, psi, 0.0);
      Report::add_row(tp, {R, psi, ph.phi_z_abs, ph.phi1_diag});
    }
  }
  r.set("model.max_orders", c.order);
  r.set("model.samples", m);
  r.set("model.max_closed_form_difference", worst);
  r.check("model.closed_form_consistent", worst <= 1e-10);
}

/// Mikhaylov solve, far-field fit, boundary behaviour and scheme agreement.
inline void run_ode(RunContext& ctx) {
  const RunConfig& c = ctx.cfg;
  Report& r = ctx.report;
  const OdeSolution sol = solve_mikhaylov_ode(c.tol);
  const double rate_err = std::abs(sol.fitted_rate - std::sqrt(2.0)) / std::sqrt(2.0);
  const double y_small = 1e-3;
  const double boundary = sol(y_small) + std::log(y_small);
  const double u_gk = mikhaylov_invert(1.0, QuadratureScheme::GaussKronrod);
  const double u_ts = mikhaylov_invert(1.0, QuadratureScheme::TanhSinh);
  r.set("ode.nodes", sol.ys.size());
  r.set("ode.fitted_C", sol.fitted_C);
  r.set("ode.fitted_rate", sol.fitted_rate);
  r.set("ode.rate_relative_error", rate_err);
  r.set("ode.max_first_integral_error", sol.max_first_integral_error);
  r.set("ode.max_integral_residual", sol.max_integral_residual);
  r.set("ode.max_ode_residual", sol.max_ode_residual);
  r.set("ode.u_plus_log_y_at_1e-3", boundary);
  r.set("ode.u_at_1.gauss_kronrod", u_gk);
  r.set("ode.u_at_1.tanh_sinh", u_ts);
  r.set("ode.scheme_difference_at_1", std::abs(u_gk - u_ts));
  r.check("ode.first_integral_ok", sol.max_first_integral_error <= 1e-6);
  r.check("ode.rate_ok", rate_err <= 0.01);
  r.check("ode.boundary_ok", std::abs(boundary) <= 1e-3);
  r.check("ode.schemes_agree", std::abs(u_gk - u_ts) <= 1e-8);
  r.check("ode.integral_residual_ok", sol.max_integral_residual <= 10.0 * c.tol);

  auto& t = r.table("ode_profile", {"y", "u", "du"});
  std::vector<std::vector<double>> rows;
  const std::size_t m = c.samples;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = k * (sol.ys.size() - 1) / std::max<std::size_t>(1, m - 1);
    Report::add_row(t, {sol.ys[j], sol.us[j], sol.dus[j]});
  }
  for (std::size_t j = 0; j < sol.ys.size(); ++j) rows.push_back({sol.ys[j], sol.us[j], sol.dus[j]});
  FieldFile ff;
  ff.domain = DomainKind::OdeLine;
  ff.dims = {sol.ys.size()};
  ff.coords = {sol.ys};
  ff.values = sol.us;
  ff.encoding = ctx.encoding();
  ctx.save("ode_u", ff);
  ctx.save_csv("ode_profile", {"y", "u", "du"}, rows);
}

/// Eigenvalues of J for (order, mode) and the matching indicial roots.
inline void run_spectrum(RunContext& ctx) {
  const RunConfig& c = ctx.cfg;
  Report& r = ctx.report;
  if (c.count < 1) throw InputError("count must be positive");
  const Spectrum sp = eigen_J(c.order, c.mode, c.count, c.hemisphere_resolution);
  const IndicialTable it = indicial_table(sp);
  r.set("spectrum.n", sp.n);
  r.set("spectrum.m", sp.m);
  r.set("spectrum.count", sp.eigenvalues.size());
  r.set("spectrum.resolution", c.hemisphere_resolution);
  r.set("spectrum.extrapolation_gap", sp.extrapolation_gap);
  r.set("spectrum.boundary_exponents", Report::number(it.boundary[0]) + "," + Report::number(it.boundary[1]));
  auto& t = r.table("eigenvalues", {"k", "lambda", "lambda_N", "lambda_2N", "lambda_4N", "delta_plus", "delta_minus"});
  for (std::size_t k = 0; k < sp.eigenvalues.size(); ++k) {
    Report::add_row(t, {static_cast<double>(k), sp.eigenvalues[k], sp.raw[0][k], sp.raw[1][k], sp.raw[2][k],
                        it.delta_plus[k], it.delta_minus[k]});
  }
  if (sp.n == 0 && sp.m == 0) {
    const double err = std::abs(sp.eigenvalues.front() - 6.0);
    r.set("spectrum.lambda0_error", err);
    r.check("spectrum.lambda0_ok", err <= 1e-4);
  }
  if (!sp.functions.empty()) {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> cols{"psi"};
    for (std::size_t k = 0; k < sp.functions.size(); ++k) cols.push_back("mu" + std::to_string(k));
    for (std::size_t j = 0; j < sp.psi.size(); ++j) {
      std::vector<double> row{sp.psi[j]};
      for (const auto& f : sp.functions) row.push_back(f[j]);
      rows.push_back(std::move(row));
    }
    ctx.save_csv("eigenfunctions", cols, rows);
  }
}

}  // namespace nahmpole
