// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nahmpole/model_solutions.hpp"
#include "nahmpole/semilinear.hpp"

namespace nahmpole {

/// Blend geometry for the approximate solution. A zero knot radius selects an automatic value.
struct ApproxParams {
  double knot_radius = 0.0;  // knot ball radius; bumps blend over [0.5, 0.9] of it
  double pole_lo = 0.05;     // knot domains: literal pole profile below this fraction of the smallest knot radius
  double pole_hi = 0.45;     // spatial-distance profile above this fraction (must stay below 0.5)
  double blend_lo = 0.25;    // cylinder: pure Nahm-pole profile below this height
  double blend_hi = 3.5;     // cylinder: pure limit solution above this height
};

/// u_hat together with its exact source f = N(u_hat), evaluated without cancellation.
struct ApproximateSolution {
  ScalarField u_hat;
  ScalarField source;
  std::vector<double> knot_radii;
};

namespace detail {

/// y used to evaluate singular profiles: nodes on y = 0 use half the first spacing.
inline double evaluation_height(const GradedGrid& g, std::size_t i) {
  const double y = g.y(i);
  if (y > 0.0) return y;
  const auto& ya = g.axis(g.vertical_axis()).nodes;
  return 0.5 * ya[1];
}

struct KnotGeometry {
  std::vector<KnotPoint> knots;
  std::vector<Polynomial> deflated;
  std::vector<double> radii;
  Complex center;
  int far_degree = 0;
};

inline KnotGeometry knot_geometry(const GradedGrid& g, const HiggsData& data, const ApproxParams& prm) {
  if (!data.poly) throw InputError("knot domains need the Higgs field polynomial p(z)");
  const Polynomial& p = *data.poly;
  const DomainSpec& spec = g.spec();
  KnotGeometry kg;
  kg.knots = data.knots;
  kg.far_degree = p.degree();
  kg.center = g.kind() == DomainKind::AxisymSlab ? Complex{0.0, 0.0} : spec.center;
  int total = 0;
  for (const auto& k : kg.knots) {
    if (std::abs(p(k.position)) > 1e-8 * std::max(1.0, std::abs(p.leading()))) {
      throw InputError("supplied knots are inconsistent with p(z)");
    }
    total += k.order;
    Polynomial dk = p;
    for (int m = 1; m < k.order; ++m) {
      dk = dk.derivative();
      if (std::abs(dk(k.position)) > 1e-8 * std::max(1.0, std::abs(p.leading()))) {
        throw InputError("supplied knot order exceeds the root multiplicity of p(z)");
      }
    }
    Polynomial q = p.deflate(k.position, k.order);
    if (std::abs(q(k.position)) < 1e-12 * std::max(1.0, std::abs(p.leading()))) {
      throw InputError("supplied knot order is below the root multiplicity of p(z)");
    }
    kg.deflated.push_back(std::move(q));
  }
  if (total != p.degree()) throw InputError("supplied knots are inconsistent with p(z): orders do not sum to deg p");
  if (g.kind() == DomainKind::AxisymSlab) {
    if (kg.knots.size() > 1 || (kg.knots.size() == 1 && std::abs(kg.knots[0].position) != 0.0)) {
      throw InputError("axisymmetric domains allow a single knot at the origin");
    }
  }
  for (std::size_t j = 0; j < kg.knots.size(); ++j) {
    double rho = prm.knot_radius > 0.0 ? prm.knot_radius : 1.0;
    if (prm.knot_radius <= 0.0) {
      for (std::size_t k = 0; k < kg.knots.size(); ++k) {
        if (k != j) rho = std::min(rho, 0.45 * std::abs(kg.knots[j].position - kg.knots[k].position));
      }
    }
    kg.radii.push_back(rho);
  }
  for (std::size_t j = 0; j < kg.knots.size(); ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      if (std::abs(kg.knots[j].position - kg.knots[k].position) < kg.radii[j] + kg.radii[k]) {
        throw InputError("knot balls overlap; reduce knot_radius");
      }
    }
  }
  return kg;
}

/// Approximate solution on knot domains.
///
/// Inside the ball of radius rho_j about a knot the profile U_{n_j}(z - z_j) - log|q_j| is used. Outside,
/// the pole profile -log y - log|a| - sum_j n_j log d_j, where d_j is |z - z_j| in a layer near y = 0 and
/// the distance in space R_j higher up; the latter stays finite above the knots.
/// Everything is written as -log y - log|a| - sum_j n_j log R_j + E_k with E_k regular, so that u_hat and
/// the source are evaluated without cancellation. P = sum_j n_j log(r_j / R_j) carries the axis singularities.
inline ApproximateSolution knot_approximation(const GridPtr& grid, const HiggsData& data, const ApproxParams& prm) {
  const GradedGrid& g = *grid;
  const KnotGeometry kg = knot_geometry(g, data, prm);
  if (!(0.0 < prm.pole_lo && prm.pole_lo < prm.pole_hi && prm.pole_hi < 0.5)) {
    throw InputError("pole layer fractions must satisfy 0 < pole_lo < pole_hi < 0.5");
  }
  const Polynomial& p = *data.poly;
  const std::size_t J = kg.knots.size();
  const double log_lead = std::log(std::abs(p.leading()));
  double rho_min = 1.0;
  for (double r : kg.radii) rho_min = std::min(rho_min, r);
  const double ya = prm.pole_lo * rho_min;
  const double yb = prm.pole_hi * rho_min;
  ApproximateSolution out{ScalarField(grid, 0.0), ScalarField(grid, 0.0), kg.radii};

  struct Polar {
    Complex d;
    double r, R, psi;
  };
  std::vector<Polar> pk(J);
  std::vector<double> w(J + 1), lap(J + 1), grad_y(J + 1), E(J + 1), Ey(J + 1);
  std::vector<Complex> grad(J + 1), Eh(J + 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = evaluation_height(g, i);
    const Complex z = g.z(i);
    for (std::size_t j = 0; j < J; ++j) {
      const Complex d = z - kg.knots[j].position;
      const double r = std::abs(d);
      pk[j] = Polar{d, r, std::hypot(r, y), std::atan2(y, r)};
    }

    // Knot ball weights and their derivatives; the far weight takes the rest.
    double s = 0.0;
    grad[J] = 0.0;
    grad_y[J] = 0.0;
    lap[J] = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const Step st = ramp(pk[j].R, 0.5 * kg.radii[j], 0.9 * kg.radii[j]);
      w[j] = 1.0 - st.v;
      grad[j] = st.d1 != 0.0 ? (-st.d1 / pk[j].R) * pk[j].d : Complex{0.0};
      grad_y[j] = st.d1 != 0.0 ? -st.d1 * y / pk[j].R : 0.0;
      lap[j] = st.d1 != 0.0 || st.d2 != 0.0 ? -(st.d2 + 2.0 * st.d1 / pk[j].R) : 0.0;
      s += w[j];
      grad[J] -= grad[j];
      grad_y[J] -= grad_y[j];
      lap[J] -= lap[j];
    }
    w[J] = 1.0 - s;

    // P, its gradient and Laplacian (only needed where finite).
    double P = 0.0, Py = 0.0, lapP = 0.0, sum_nR = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const int n = kg.knots[j].order;
      P += n * std::log(pk[j].r / pk[j].R);
      Py -= n * y / (pk[j].R * pk[j].R);
      lapP -= n / (pk[j].R * pk[j].R);
      sum_nR += n * std::log(pk[j].R);
    }
    auto grad_P_h = [&](std::size_t skip) {
      Complex gh{0.0};
      for (std::size_t j = 0; j < J; ++j) {
        if (j == skip) continue;
        const Polar& q = pk[j];
        gh += static_cast<double>(kg.knots[j].order) * (q.d / (q.r * q.r) - q.d / (q.R * q.R));
      }
      return gh;
    };
    const Step layer = ramp(y, ya, yb);  // 0 in the literal pole layer, 1 above it

    double sum_we = 0.0, sum_w_e = 0.0, grad_term = 0.0, lap_term = 0.0, far_lap = 0.0;
    for (std::size_t k = 0; k <= J; ++k) {
      if (w[k] == 0.0 && grad[k] == Complex{0.0} && grad_y[k] == 0.0 && lap[k] == 0.0) continue;
      double e = 0.0;
      if (k < J) {
        // Knot k: D_k = n_k log cos psi_k + log((n_k + 1) / S_{n_k}(psi_k)), E_k = D_k - P.
        const Polar& q = pk[k];
        const int n = kg.knots[k].order;
        const double S = eval_Sn(n, q.psi);
        const double dpsi = -eval_Sn_derivative(n, q.psi) / S;
        const double R2 = q.R * q.R;
        E[k] = std::log((n + 1) / S);
        Eh[k] = q.r > 0.0 ? (-y / R2 * dpsi / q.r) * q.d : Complex{0.0};
        Ey[k] = q.r / R2 * dpsi;
        for (std::size_t j = 0; j < J; ++j) {
          if (j == k) continue;
          E[k] -= kg.knots[j].order * std::log(pk[j].r / pk[j].R);
          Ey[k] += kg.knots[j].order * y / (pk[j].R * pk[j].R);
        }
        Eh[k] -= grad_P_h(k);
        e = std::expm1(2.0 * (E[k] + P));
      } else {
        // Far: D = tau(y) P, E = (tau - 1) P; its Laplacian enters through far_lap.
        const double tau = layer.v;
        if (tau < 1.0) {
          E[k] = (tau - 1.0) * P;
          Eh[k] = (tau - 1.0) * grad_P_h(J);
          Ey[k] = (tau - 1.0) * Py + layer.d1 * P;
          far_lap = layer.d2 * P + 2.0 * layer.d1 * Py + tau * lapP;
        } else {
          E[k] = 0.0;
          Eh[k] = 0.0;
          Ey[k] = 0.0;
          far_lap = lapP;
        }
      }
      sum_we += w[k] * E[k];
      sum_w_e += w[k] * e;
      grad_term += grad[k].real() * Eh[k].real() + grad[k].imag() * Eh[k].imag() + grad_y[k] * Ey[k];
      lap_term += lap[k] * E[k];
    }
    out.u_hat[i] = -std::log(y) - log_lead - sum_nR + sum_we;
    const bool pure_knot = std::any_of(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(J), [](double x) { return x == 1.0; });
    if (!pure_knot) {
      // Knot constituents solve Lap D = expm1(2D) / y^2; the far one contributes its Laplacian directly.
      out.source[i] = (std::expm1(2.0 * (sum_we + P)) - sum_w_e) / (y * y) - 2.0 * grad_term - lap_term - w[J] * far_lap;
    }
  }
  return out;
}

/// Far-field data U_N(z - c) - log|a| of a knot problem at one point.
inline double knot_far_field(const Polynomial& p, Complex center, Complex z, double y) {
  return eval_Un(p.degree(), std::abs(z - center), y).value - std::log(std::abs(p.leading()));
}

/// Approximate solution on the half-cylinder: Nahm pole near y = 0, the limit solution above.
inline ApproximateSolution cylinder_approximation(const GridPtr& grid, const HiggsData& data,
                                                  const ScalarField& u_inf, const ApproxParams& prm) {
  const GradedGrid& g = *grid;
  if (!data.knots.empty()) {
    throw InputError("knot singularities are supported on the plane and axisymmetric domains only");
  }
  const GridPtr hg = g.horizontal_grid();
  if (u_inf.size() != hg->size()) throw InputError("limit solution does not match the horizontal grid");
  const double ya = prm.blend_lo;
  const double yb = prm.blend_hi;
  if (!(0.0 < ya && ya < yb && yb <= g.spec().y_max)) {
    throw InputError("cylinder blend heights must satisfy 0 < blend_lo < blend_hi <= y_max");
  }
  const DiscreteOperator hop(hg, sample_horizontal(*hg, data.g0_sq));
  std::vector<double> a(hg->size());
  for (std::size_t k = 0; k < hg->size(); ++k) {
    const double a2 = data.alpha_sq(hg->z(k));
    if (!(a2 > 0.0)) throw InputError("|alpha|^2 must be positive on the torus");
    a[k] = -0.5 * std::log(a2);
  }
  const std::vector<double> La = hop.apply(a);               // -g0^{-2} Lap a
  const std::vector<double> Lu = hop.apply(u_inf.values());  // -g0^{-2} Lap u_inf
  ApproximateSolution out{ScalarField(grid, 0.0), ScalarField(grid, 0.0), {}};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t k = g.horizontal_index(i);
    const Complex z = hg->z(k);
    const double y = evaluation_height(g, i);
    const double K = data.K(z);
    const double a2 = data.alpha_sq(z);
    const double b2 = data.beta_sq(z);
    const Step st = ramp(y, ya, yb);
    const double tau = 1.0 - st.v;
    const double G0 = -std::log(y) + a[k];
    const double uinf = u_inf[k];
    if (tau == 1.0) {
      out.u_hat[i] = G0;
      out.source[i] = K + La[k] - a2 * b2 * y * y;
      continue;
    }
    const double u = tau * G0 + (1.0 - tau) * uinf;
    out.u_hat[i] = u;
    const double tau1 = -st.d1;
    const double tau2 = -st.d2;
    const double uyy = tau2 * (G0 - uinf) - 2.0 * tau1 / y + tau / (y * y);
    const double Lh = tau * La[k] + (1.0 - tau) * Lu[k];
    out.source[i] = K + Lh - uyy + a2 * std::exp(2.0 * u) - b2 * std::exp(-2.0 * u);
  }
  return out;
}

}  // namespace detail

/// Builds u_hat and f = N(u_hat). The cylinder needs the limit solution on the horizontal grid.
inline ApproximateSolution build_approximate_solution(const GridPtr& grid, const HiggsData& data,
                                                      const ApproxParams& prm = {},
                                                      const ScalarField* u_inf = nullptr) {
  switch (grid->kind()) {
    case DomainKind::PlaneHalfSpace:
    case DomainKind::AxisymSlab: return detail::knot_approximation(grid, data, prm);
    case DomainKind::TorusHalfCylinder:
      if (u_inf == nullptr) throw InputError("the cylinder approximation needs the limit solution");
      return detail::cylinder_approximation(grid, data, *u_inf, prm);
    default: throw InputError("approximate solutions are defined on three-dimensional domains");
  }
}

}  // namespace nahmpole
