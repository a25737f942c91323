// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nahmpole/gauge_hermitian.hpp"
#include "nahmpole/io/run_context.hpp"

namespace nahmpole {

namespace detail {

/// Max of `f` over nodes where `keep` holds.
template <class Keep>
inline double masked_max(const ScalarField& f, Keep&& keep) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (keep(i)) m = std::max(m, std::abs(f[i]));
  }
  return m;
}

}  // namespace detail

/// Scalar, field-equation and metric-form residuals plus boundary asymptotics of a stored solution.
inline void run_verify(RunContext& ctx) {
  const RunConfig& c = ctx.cfg;
  Report& r = ctx.report;
  const ScalarField u = read_field(c.input);
  const GridPtr g = u.grid();
  const HiggsData d = higgs_data(c);
  r.set("verify.domain", to_string(g->kind()));
  r.set("verify.nodes", g->size());

  const DiscreteOperator op(g, sample_horizontal(*g, d.g0_sq));
  // Stored u is singular at y = 0, so residual maxima are taken above a fixed height.
  const bool vertical = g->has_vertical();
  const double floor_y = c.residual_floor;
  std::vector<char> unknown(g->size(), 0);
  for (std::size_t i : op.unknown_nodes()) unknown[i] = !vertical || g->y(i) >= floor_y;
  const ScalarField res(g, scalar_residual(op, d, u.values()));
  r.set("verify.residual_floor", vertical ? floor_y : 0.0);
  r.set("verify.scalar_residual_nodes",
        static_cast<std::size_t>(std::count(unknown.begin(), unknown.end(), char{1})));
  r.set("verify.scalar_residual_max", detail::masked_max(res, [&](std::size_t i) { return unknown[i] != 0; }));

  const HermitianMetric metric = HermitianMetric::diagonal(u, c.h0);
  const HolomorphicHiggs higgs = HolomorphicHiggs::from_data(d, c.h0);
  const HermitianResidual hr = hermitian_residual(op, metric, higgs, d, MetricRepresentation::General);
  r.set("verify.hermitian_residual_max", detail::masked_max(hr.norm, [&](std::size_t i) { return unknown[i] != 0; }));

  if (!g->has_vertical()) return;
  try {
    const UnitaryTriplet T = unitary_triplet(metric, higgs);
    const UnitarityReport ur = check_unitarity(T);
    r.set("verify.unitarity.connection", ur.connection);
    r.set("verify.unitarity.higgs", ur.higgs);
    r.set("verify.unitarity.phi1", ur.phi1);
    r.check("verify.unitarity_ok", ur.ok(1e-10));
    const EbeResidual er = ebe_residual(T, d);
    auto above = [&](std::size_t i) { return er.valid[i] != 0 && g->y(i) >= floor_y; };
    r.set("verify.ebe.nodes", er.valid_count);
    r.set("verify.ebe.moment_max", detail::masked_max(er.moment, above));
    r.set("verify.ebe.holomorphic_max", detail::masked_max(er.holomorphic, above));
    r.set("verify.ebe.parallel_max", detail::masked_max(er.parallel, above));
    ctx.save("ebe_moment", er.moment);
  } catch (const InputError& e) {
    r.set("verify.ebe.unsupported", e.what());
  }

  if (g->axis(g->vertical_axis()).nodes.front() == 0.0) {
    AsymptoticsOptions ao;
    ao.layers = c.layers;
    const AsymptoticsReport ar = boundary_asymptotics_check(metric, higgs, ao);
    r.set("verify.asymptotics.columns", ar.columns);
    r.set("verify.asymptotics.mean_exponent", ar.mean_exponent);
    r.set("verify.asymptotics.max_exponent_error", ar.max_exponent_error);
    r.set("verify.asymptotics.max_coefficient_error", ar.max_coefficient_error);
    r.set("verify.asymptotics.nahm", ar.nahm);
    if (d.knots.empty()) r.check("verify.asymptotics.nahm_pole", ar.nahm);
  }
  for (std::size_t k = 0; k < d.knots.size(); ++k) {
    const std::string key = "verify.knot" + std::to_string(k) + ".";
    try {
      const KnotAsymptoticsReport kr = knot_asymptotics_check(metric, d.knots[k].position, d.knots[k].order);
      r.set(key + "exponent", kr.exponent);
      r.set(key + "exponent_error", kr.error);
      r.set(key + "samples", kr.samples);
    } catch (const InputError& e) {
      r.set(key + "unsupported", e.what());
    }
  }
}

/// sigma(H1, H2) between two stored solutions, its sign and discrete subharmonicity.
inline void run_distance(RunContext& ctx) {
  const RunConfig& c = ctx.cfg;
  Report& r = ctx.report;
  const ScalarField u1 = read_field(c.input);
  const ScalarField u2 = read_field(c.input2);
  if (!same_grid(u1.grid_ref(), u2.grid_ref())) throw InputError("the two fields live on different grids");
  const GridPtr g = u1.grid();
  const HermitianMetric H1 = HermitianMetric::diagonal(u1, c.h0);
  const HermitianMetric H2 = HermitianMetric::diagonal(u2, c.h0);
  const ScalarField sigma = sigma_distance(H1, H2);
  const auto [lo, hi] = std::minmax_element(sigma.values().begin(), sigma.values().end());
  r.set("distance.sup_sigma", *hi);
  r.set("distance.min_sigma", *lo);
  r.check("distance.sigma_nonnegative", *lo >= -1e-12);
  const HiggsData d = higgs_data(c);
  const DiscreteOperator op(g, sample_horizontal(*g, d.g0_sq));
  const SubharmonicReport sr = check_subharmonic(op, sigma, c.subharmonic_threshold);
  r.set("distance.subharmonic_threshold", c.subharmonic_threshold);
  r.set("distance.min_laplacian", sr.min_laplacian);
  r.set("distance.subharmonic_violations", sr.violations);
  r.check("distance.subharmonic", sr.ok());
  ctx.save("sigma", sigma);
}

}  // namespace nahmpole
