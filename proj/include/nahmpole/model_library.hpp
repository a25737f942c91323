// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "nahmpole/approximate.hpp"
#include "nahmpole/model_solutions.hpp"
#include "nahmpole/semilinear.hpp"
#include "nahmpole/spectral.hpp"

namespace nahmpole {

// ---------------------------------------------------------------------------
// Formal boundary expansion.
// ---------------------------------------------------------------------------

/// Coefficients a_{jl} of v = sum a_{jl} y^j (log y)^l in u = -log y - log|alpha| + v.
///
/// The reduced equation is K_eff - v'' + (e^{2v} - 1)/y^2 - b^2 y^2 e^{-2v} = 0 with
/// K_eff = K + (1/2) g0^{-2} Lap log|alpha|^2 and b^2 = |alpha|^2 |beta|^2 at a fixed point.
class ExpansionTable {
 public:
  double K_eff = 0.0;
  double beta_eff_sq = 0.0;
  double a20 = 0.0;
  int order = 0;
  std::vector<std::vector<double>> a;  // a[j][l], j = 0..order, l = 0..order

  double coefficient(int j, int l) const {
    if (j < 0 || j > order || l < 0 || l > order) return 0.0;
    return a[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
  }

  double v(double y) const {
    const double L = std::log(y);
    double acc = 0.0;
    for (int j = 0; j <= order; ++j) {
      for (int l = 0; l <= order; ++l) acc += coefficient(j, l) * std::pow(y, j) * std::pow(L, l);
    }
    return acc;
  }

  double v_yy(double y) const {
    const double L = std::log(y);
    double acc = 0.0;
    auto Lp = [L](int l) { return l < 0 ? 0.0 : std::pow(L, l); };
    for (int j = 0; j <= order; ++j) {
      for (int l = 0; l <= order; ++l) {
        const double c = coefficient(j, l);
        if (c == 0.0) continue;
        acc += c * std::pow(y, j - 2) *
               (j * (j - 1) * Lp(l) + l * (2 * j - 1) * Lp(l - 1) + l * (l - 1) * Lp(l - 2));
      }
    }
    return acc;
  }

  /// Residual of the reduced equation for the truncated series.
  double residual(double y) const {
    const double vv = v(y);
    return K_eff - v_yy(y) + std::expm1(2.0 * vv) / (y * y) - beta_eff_sq * y * y * std::exp(-2.0 * vv);
  }
};

namespace detail {

using Series = std::vector<std::vector<double>>;  // s[j][l]

inline Series series_zero(int J) { return Series(static_cast<std::size_t>(J + 1), std::vector<double>(static_cast<std::size_t>(J + 1), 0.0)); }

inline Series series_mul(const Series& x, const Series& y, int J) {
  Series out = series_zero(J);
  for (int j1 = 0; j1 <= J; ++j1) {
    for (int l1 = 0; l1 <= J; ++l1) {
      const double c1 = x[j1][l1];
      if (c1 == 0.0) continue;
      for (int j2 = 0; j1 + j2 <= J; ++j2) {
        for (int l2 = 0; l1 + l2 <= J; ++l2) out[j1 + j2][l1 + l2] += c1 * y[j2][l2];
      }
    }
  }
  return out;
}

/// exp(c v) - 1 - c v for a series v without y^0 and y^1 terms.
inline Series series_exp_tail(const Series& v, double c, int J) {
  Series out = series_zero(J);
  Series power = v;
  double factor = c;
  for (int k = 2; 2 * k <= J; ++k) {
    power = series_mul(power, v, J);
    factor *= c / k;
    for (int j = 0; j <= J; ++j) {
      for (int l = 0; l <= J; ++l) out[j][l] += factor * power[j][l];
    }
  }
  return out;
}

}  // namespace detail

/// Solves the reduced boundary equation order by order in y, top-down in powers of log y.
inline ExpansionTable formal_expansion(double K_eff, double beta_eff_sq, int order, double a20 = 0.0) {
  if (order < 2 || order > 6) throw InputError("expansion order must lie in [2, 6]");
  const int J = order;
  ExpansionTable t;
  t.K_eff = K_eff;
  t.beta_eff_sq = beta_eff_sq;
  t.a20 = a20;
  t.order = order;
  detail::Series v = detail::series_zero(J + 2);
  for (int j = 2; j <= J; ++j) {
    // Right-hand side of (-d^2 + 2/y^2) v at order y^{j-2}:
    // -K_eff - y^{-2}(e^{2v} - 1 - 2v) + b^2 y^2 e^{-2v}.
    const detail::Series E = detail::series_exp_tail(v, 2.0, J + 2);
    detail::Series F = detail::series_exp_tail(v, -2.0, J + 2);
    for (int jj = 0; jj <= J + 2; ++jj) {
      for (int l = 0; l <= J + 2; ++l) F[jj][l] += -2.0 * v[jj][l];
    }
    F[0][0] += 1.0;  // e^{-2v}
    std::vector<double> R(static_cast<std::size_t>(J + 3), 0.0);
    for (int l = 0; l <= J + 2; ++l) {
      R[l] = -E[j][l];
      if (j - 4 >= 0) R[l] += beta_eff_sq * F[j - 4][l];
    }
    R[0] += j == 2 ? -K_eff : 0.0;
    const double c = 2.0 - j * (j - 1.0);
    const int M = J;
    if (c != 0.0) {
      for (int m = M; m >= 0; --m) {
        const double up1 = m + 1 <= M ? v[j][m + 1] : 0.0;
        const double up2 = m + 2 <= M ? v[j][m + 2] : 0.0;
        v[j][m] = (R[m] + (m + 1.0) * (2 * j - 1.0) * up1 + (m + 2.0) * (m + 1.0) * up2) / c;
      }
    } else {
      // Resonant power: a_{j0} is free and the log terms are fixed from the top down.
      for (int m = M - 1; m >= 0; --m) {
        const double up2 = m + 2 <= M ? v[j][m + 2] : 0.0;
        v[j][m + 1] = -(R[m] + (m + 2.0) * (m + 1.0) * up2) / ((m + 1.0) * (2 * j - 1.0));
      }
      v[j][0] = a20;
    }
  }
  t.a.assign(static_cast<std::size_t>(J + 1), std::vector<double>(static_cast<std::size_t>(J + 1), 0.0));
  for (int j = 0; j <= J; ++j) {
    for (int l = 0; l <= J; ++l) t.a[j][l] = v[j][l];
  }
  return t;
}

/// Expansion at a point z of the horizontal data.
inline ExpansionTable formal_expansion(const HiggsData& data, int order, Complex z = {0.0, 0.0}, double a20 = 0.0) {
  const double h = 1e-3;
  auto la = [&](Complex w) { return std::log(data.alpha_sq(w)); };
  const double c = la(z);
  if (!std::isfinite(c)) throw InputError("formal expansion requires alpha != 0 at the expansion point");
  // Fourth-order five-point Laplacian of log|alpha|^2.
  auto d2 = [&](Complex e) {
    return (-la(z + 2.0 * h * e) + 16.0 * la(z + h * e) - 30.0 * c + 16.0 * la(z - h * e) - la(z - 2.0 * h * e)) /
           (12.0 * h * h);
  };
  const double lap = d2({1.0, 0.0}) + d2({0.0, 1.0});
  const double K_eff = data.K(z) + 0.5 * lap / data.g0_sq(z);
  return formal_expansion(K_eff, data.alpha_sq(z) * data.beta_sq(z), order, a20);
}

// ---------------------------------------------------------------------------
// Barriers.
// ---------------------------------------------------------------------------

struct BarrierParams {
  double A = 1.0;    // knot constituent (plane) or y^eps constituent (cylinder)
  double A1 = 1.0;   // e^{-eps y} (cylinder) or y^{eps/2} (plane)
  double A2 = 1.0;   // far-field constituent (plane)
  double eps = 0.5;
  // Angular profile of the knot and far terms: sin^gamma(psi) by default, or the ground state mu0.
  double gamma = 1.0;
  bool ground_state_profile = false;
  // Cylinder lower barrier constants; zero mirrors A and A1.
  double lower_A = 0.0;
  double lower_A1 = 0.0;
};

/// Upper barrier = nodal min of `upper_parts`, lower barrier = nodal max of `lower_parts`.
struct BarrierPair {
  std::vector<std::string> names;
  std::vector<ScalarField> upper_parts;
  std::vector<ScalarField> lower_parts;
  ScalarField upper;
  ScalarField lower;
  std::vector<int> upper_active;
  std::vector<int> lower_active;
  BarrierParams params;

  void finalize() {
    const GridPtr& g = upper_parts.front().grid();
    upper = ScalarField(g, std::numeric_limits<double>::infinity());
    lower = ScalarField(g, -std::numeric_limits<double>::infinity());
    upper_active.assign(g->size(), -1);
    lower_active.assign(g->size(), -1);
    for (std::size_t k = 0; k < upper_parts.size(); ++k) {
      for (std::size_t i = 0; i < g->size(); ++i) {
        if (upper_parts[k][i] < upper[i]) {
          upper[i] = upper_parts[k][i];
          upper_active[i] = static_cast<int>(k);
        }
      }
    }
    for (std::size_t k = 0; k < lower_parts.size(); ++k) {
      for (std::size_t i = 0; i < g->size(); ++i) {
        if (lower_parts[k][i] > lower[i]) {
          lower[i] = lower_parts[k][i];
          lower_active[i] = static_cast<int>(k);
        }
      }
    }
  }

  /// Pair given directly by two fields (single constituent each).
  static BarrierPair from_fields(const ScalarField& lower_field, const ScalarField& upper_field) {
    BarrierPair p;
    p.names = {"field"};
    p.upper_parts = {upper_field};
    p.lower_parts = {lower_field};
    p.finalize();
    return p;
  }
};

namespace detail {

inline BarrierPair mirrored(std::vector<std::string> names, std::vector<ScalarField> parts, const BarrierParams& prm) {
  BarrierPair p;
  p.names = std::move(names);
  p.params = prm;
  for (const auto& f : parts) {
    ScalarField neg(f.grid(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) neg[i] = -f[i];
    p.lower_parts.push_back(std::move(neg));
  }
  p.upper_parts = std::move(parts);
  p.finalize();
  return p;
}

}  // namespace detail

/// Cylinder barriers min{A y^eps, A1 e^{-eps y}} and their negatives.
inline BarrierPair build_cylinder_barriers(const GridPtr& grid, const BarrierParams& prm) {
  if (!(prm.eps > 0.0 && prm.eps < 1.0)) {
    throw InputError("epsilon must lie in (0, 1) for the cylinder barriers");
  }
  if (!(prm.A > 0.0 && prm.A1 > 0.0)) throw InputError("barrier constants must be positive");
  const GradedGrid& g = *grid;
  auto near = ScalarField::sample(grid, [&](std::size_t i) { return prm.A * std::pow(g.y(i), prm.eps); });
  auto far = ScalarField::sample(grid, [&](std::size_t i) { return prm.A1 * std::exp(-prm.eps * g.y(i)); });
  BarrierPair pair = detail::mirrored({"A*y^eps", "A1*exp(-eps*y)"}, {near, far}, prm);
  const double lA = prm.lower_A > 0.0 ? prm.lower_A : prm.A;
  const double lA1 = prm.lower_A1 > 0.0 ? prm.lower_A1 : prm.A1;
  if (lA != prm.A || lA1 != prm.A1) {
    pair.lower_parts[0] = ScalarField::sample(grid, [&](std::size_t i) { return -lA * std::pow(g.y(i), prm.eps); });
    pair.lower_parts[1] = ScalarField::sample(grid, [&](std::size_t i) { return -lA1 * std::exp(-prm.eps * g.y(i)); });
    pair.finalize();
  }
  return pair;
}

/// Knot barriers min{A R_j^eps Theta(psi_j), A1 y^{eps/2}, A2 R_c^{-eps} Theta(psi_c)} and negatives,
/// with Theta the angular profile selected in BarrierParams.
///
/// When the center is not a knot an order-0 term A R_c^eps mu0(psi_c) joins the knot terms.
/// `ground` maps a knot order to the ground state of the hemisphere operator for that order.
inline BarrierPair build_knot_barriers(const GridPtr& grid, const HiggsData& data, const BarrierParams& prm,
                                       const std::map<int, GroundState>& ground) {
  const GradedGrid& g = *grid;
  if (!data.poly) throw InputError("knot barriers need the Higgs field polynomial p(z)");
  const int N0 = data.poly->degree();
  double limit = 1.0;
  for (const auto& k : data.knots) {
    const auto it = ground.find(k.order);
    if (it == ground.end()) throw InputError("missing ground state for knot order " + std::to_string(k.order));
    limit = std::min(limit, it->second.delta_plus());
  }
  if (!(prm.eps > 0.0 && prm.eps < limit)) {
    throw InputError("epsilon must lie in (0, " + std::to_string(limit) +
                     "), the bound min(1, delta0+) from the knot ground states");
  }
  if (!(prm.A > 0.0 && prm.A1 > 0.0 && prm.A2 > 0.0)) throw InputError("barrier constants must be positive");
  if (!(prm.gamma > 0.0 && prm.gamma <= 1.0)) throw InputError("angular exponent gamma must lie in (0, 1]");
  if (ground.find(N0) == ground.end()) throw InputError("missing ground state for the far-field degree");
  // With gamma <= 1, J(sin^gamma) >= 2 gamma sin^gamma for every order, and near y = 0 the profile
  // stays away from the y^2 kernel of the boundary operator.
  auto profile = [&](int n, double psi) {
    return prm.ground_state_profile ? ground.at(n)(psi) : std::pow(std::sin(psi), prm.gamma);
  };
  const Complex c = g.kind() == DomainKind::AxisymSlab ? Complex{0.0, 0.0} : g.spec().center;
  std::vector<std::string> names;
  std::vector<ScalarField> parts;
  for (std::size_t j = 0; j < data.knots.size(); ++j) {
    const int order = data.knots[j].order;
    const Complex p = data.knots[j].position;
    parts.push_back(ScalarField::sample(grid, [&](std::size_t i) {
      const double r = std::abs(g.z(i) - p);
      const double y = g.y(i);
      const double R = std::hypot(r, y);
      return R > 0.0 ? prm.A * std::pow(R, prm.eps) * profile(order, std::atan2(y, r)) : 0.0;
    }));
    names.push_back("knot" + std::to_string(j) + ":A*R^eps*Theta");
  }
  // A knot-free center sees the plain Nahm pole; an order-0 constituent there caps the far term.
  const bool center_is_knot = std::any_of(data.knots.begin(), data.knots.end(),
                                          [&](const KnotPoint& k) { return std::abs(k.position - c) == 0.0; });
  if (!center_is_knot) {
    if (ground.find(0) == ground.end()) throw InputError("missing ground state for order 0");
    parts.push_back(ScalarField::sample(grid, [&](std::size_t i) {
      const double r = std::abs(g.z(i) - c);
      const double y = g.y(i);
      const double R = std::hypot(r, y);
      return R > 0.0 ? prm.A * std::pow(R, prm.eps) * profile(0, std::atan2(y, r)) : 0.0;
    }));
    names.emplace_back("center:A*R^eps*Theta");
  }
  parts.push_back(ScalarField::sample(grid, [&](std::size_t i) { return prm.A1 * std::pow(g.y(i), 0.5 * prm.eps); }));
  names.emplace_back("A1*y^(eps/2)");
  parts.push_back(ScalarField::sample(grid, [&](std::size_t i) {
    const double r = std::abs(g.z(i) - c);
    const double y = g.y(i);
    const double R = std::hypot(r, y);
    return R > 0.0 ? prm.A2 * std::pow(R, -prm.eps) * profile(N0, std::atan2(y, r)) : prm.A2;
  }));
  names.emplace_back("A2*R^-eps*Theta");
  return detail::mirrored(std::move(names), std::move(parts), prm);
}

/// Ground states for every knot order and the far-field degree of the data.
inline std::map<int, GroundState> ground_states_for(const HiggsData& data, std::size_t resolution = 256) {
  std::map<int, GroundState> out;
  std::vector<int> orders;
  for (const auto& k : data.knots) orders.push_back(k.order);
  if (data.poly) orders.push_back(data.poly->degree());
  orders.push_back(0);
  for (int n : orders) {
    if (out.find(n) == out.end()) out.emplace(n, GroundState(eigen_J(n, 0, 1, resolution)));
  }
  return out;
}

struct BarrierViolation {
  std::size_t node = 0;
  bool upper = true;
  int part = -1;
  double value = 0.0;
};

struct BarrierReport {
  double min_upper = std::numeric_limits<double>::infinity();   // min over unknowns of N^(v+)
  double max_lower = -std::numeric_limits<double>::infinity();  // max over unknowns of N^(v-)
  std::vector<BarrierViolation> violations;
  bool ordered = true;  // v- <= v+ everywhere
  bool boundary_ok = true;  // v- <= boundary data <= v+ on Dirichlet nodes

  bool valid() const { return violations.empty() && ordered && boundary_ok; }
};

/// Evaluates N^ on the active constituent at every unknown node.
///
/// A smooth constituent lies above the min at neighbouring nodes, so a nonnegative value at its
/// active nodes implies the same for the spliced barrier (and symmetrically for the lower one).
inline BarrierReport verify_barrier(const SemilinearProblem& problem, const BarrierPair& pair,
                                    double relative_slack = 1e-12) {
  if (pair.upper.grid().get() != problem.grid.get() && pair.upper.size() != problem.grid->size()) {
    throw InputError("barrier and problem grids differ");
  }
  const DiscreteOperator& op = *problem.op;
  const auto& rho = op.row_scale();
  BarrierReport rep;
  for (std::size_t i = 0; i < problem.grid->size(); ++i) {
    if (pair.lower[i] > pair.upper[i]) rep.ordered = false;
    if (op.unknown_of(i) < 0 && (problem.boundary[i] > pair.upper[i] + 1e-14 || problem.boundary[i] < pair.lower[i] - 1e-14)) {
      rep.boundary_ok = false;
    }
  }
  auto evaluate = [&](const ScalarField& part, std::size_t k, std::size_t i, double& scale) {
    const double flux = op.row_flux(k, part.values()) / rho[i];
    const double nl = problem.nonlinearity(i, part[i]);
    scale = std::abs(flux) + std::abs(nl) + std::abs(problem.f[i]);
    return flux + nl + problem.f[i];
  };
  const auto& nodes = op.unknown_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t i = nodes[k];
    double scale = 0.0;
    const double up = evaluate(pair.upper_parts[static_cast<std::size_t>(pair.upper_active[i])], k, i, scale);
    rep.min_upper = std::min(rep.min_upper, up);
    if (up < -relative_slack * scale) rep.violations.push_back({i, true, pair.upper_active[i], up});
    const double lo = evaluate(pair.lower_parts[static_cast<std::size_t>(pair.lower_active[i])], k, i, scale);
    rep.max_lower = std::max(rep.max_lower, lo);
    if (lo > relative_slack * scale) rep.violations.push_back({i, false, pair.lower_active[i], lo});
  }
  return rep;
}

struct TunedBarriers {
  BarrierPair pair;
  BarrierReport report;
  int doublings = 0;
};

/// Doubles the constant of every violating constituent until the pair is valid.
///
/// `build` maps parameters to a barrier pair; constituent k is scaled by constant_of(k).
template <class Build>
TunedBarriers tune_barriers(const SemilinearProblem& problem, BarrierParams prm, Build&& build, int max_doublings = 60) {
  TunedBarriers out;
  for (int it = 0; it <= max_doublings; ++it) {
    out.pair = build(prm);
    out.report = verify_barrier(problem, out.pair);
    out.doublings = it;
    if (out.report.valid()) return out;
    const std::size_t parts = out.pair.upper_parts.size();
    std::vector<bool> bump(parts, false);
    std::vector<bool> bump_lower(parts, false);
    for (const auto& v : out.report.violations) {
      (v.upper ? bump : bump_lower)[static_cast<std::size_t>(v.part)] = true;
    }
    if (!out.report.ordered || !out.report.boundary_ok || out.report.violations.empty()) {
      std::fill(bump.begin(), bump.end(), true);
      std::fill(bump_lower.begin(), bump_lower.end(), true);
    }
    // Knot constituents share A; the last two parts are A1 and A2 (cylinder: A and A1).
    if (parts == 2) {
      // The lower e^{-eps y} piece saturates, so its constant is raised to hand the node to -A y^eps.
      if (prm.lower_A <= 0.0) prm.lower_A = prm.A;
      if (prm.lower_A1 <= 0.0) prm.lower_A1 = prm.A1;
      if (bump[0]) prm.A *= 2.0;
      if (bump[1]) prm.A1 *= 2.0;
      if (bump_lower[0]) prm.lower_A *= 2.0;
      if (bump_lower[1]) prm.lower_A1 *= 2.0;
    } else {
      for (std::size_t k = 0; k < parts; ++k) bump[k] = bump[k] || bump_lower[k];
      bool knot = false;
      for (std::size_t k = 0; k + 2 < parts; ++k) knot = knot || bump[k];
      if (knot) prm.A *= 2.0;
      if (bump[parts - 2]) prm.A1 *= 2.0;
      if (bump[parts - 1]) prm.A2 *= 2.0;
    }
  }
  throw ConvergenceError("barrier constants did not validate after " + std::to_string(max_doublings) +
                         " doublings; the source may be too large for the barrier family");
}

}  // namespace nahmpole
