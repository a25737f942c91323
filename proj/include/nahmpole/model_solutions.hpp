// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "nahmpole/core_domain.hpp"

namespace nahmpole {

// ---------------------------------------------------------------------------
// Knot model solutions.
// ---------------------------------------------------------------------------

/// sum_{k=0}^n (1 + sin psi)^{n-k} (1 - sin psi)^k.
inline double eval_Sn(int n, double psi) {
  if (n < 0) throw InputError("knot order must be nonnegative");
  const double s = std::sin(psi);
  const double a = 1.0 + s;
  const double b = 1.0 - s;
  double acc = 0.0;
  double ak = std::pow(a, n);
  double bk = 1.0;
  for (int k = 0; k <= n; ++k) {
    acc += ak * bk;
    ak = a != 0.0 ? ak / a : 0.0;
    bk *= b;
  }
  return acc;
}

/// d S_n / d psi.
inline double eval_Sn_derivative(int n, double psi) {
  const double s = std::sin(psi);
  const double a = 1.0 + s;
  const double b = 1.0 - s;
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double da = (n - k) > 0 ? (n - k) * std::pow(a, n - k - 1) * std::pow(b, k) : 0.0;
    const double db = k > 0 ? k * std::pow(a, n - k) * std::pow(b, k - 1) : 0.0;
    acc += da - db;
  }
  return std::cos(psi) * acc;
}

struct UnValue {
  double value = 0.0;        // stable decomposition -log y - n log R + log((n+1)/S_n)
  double closed_form = 0.0;  // log(2(n+1) / ((R+y)^{n+1} - (R-y)^{n+1}))
  double consistency = 0.0;  // |value - closed_form|
};

/// Witten's order-n knot solution of -(Lap + d_y^2) u + r^{2n} e^{2u} = 0.
inline UnValue eval_Un(int n, double r, double y) {
  if (n < 0) throw InputError("knot order must be nonnegative");
  if (r < 0.0 || y < 0.0) throw InputError("eval_Un requires r >= 0 and y >= 0");
  const double R = std::hypot(r, y);
  if (R == 0.0) throw InputError("coordinate singularity at the knot");
  if (y == 0.0) throw InputError("eval_Un is singular on the boundary y = 0");
  const double psi = std::atan2(y, r);
  UnValue out;
  out.value = -std::log(y) - n * std::log(R) + std::log((n + 1) / eval_Sn(n, psi));
  const double a = R + y;
  const double b = R - y;
  out.closed_form = std::log(2.0 * (n + 1)) - std::log(std::pow(a, n + 1) - std::pow(b, n + 1));
  out.consistency = std::abs(out.value - out.closed_form);
  return out;
}

/// Deviation of U_n from the plain Nahm-pole profile -log y - n log r, with its gradient.
///
/// D_n = n log cos(psi) + log((n+1)/S_n(psi)); it vanishes to second order at psi = 0.
struct KnotDeviation {
  double value = 0.0;
  double d_r = 0.0;
  double d_y = 0.0;
};

inline KnotDeviation eval_knot_deviation(int n, double r, double y) {
  const double R2 = r * r + y * y;
  const double psi = std::atan2(y, r);
  const double S = eval_Sn(n, psi);
  KnotDeviation d;
  d.value = (n > 0 ? n * std::log(std::cos(psi)) : 0.0) + std::log((n + 1) / S);
  const double dpsi = -n * std::tan(psi) - eval_Sn_derivative(n, psi) / S;
  d.d_r = dpsi * (-y / R2);
  d.d_y = dpsi * (r / R2);
  return d;
}

struct ModelPhi {
  double phi_z_abs = 0.0;  // |phi_z| (upper-right entry modulus)
  double phi1_diag = 0.0;  // phi_1 = phi1_diag * diag(i, -i)
};

/// Unitary-gauge Higgs fields of the knot model in spherical coordinates.
inline ModelPhi eval_model_phi(int n, double R, double psi, double /*theta*/) {
  if (!(R > 0.0)) throw InputError("eval_model_phi requires R > 0");
  if (!(psi > 0.0)) throw InputError("boundary singularity: psi = 0 lies on the Nahm pole face");
  const double s = std::sin(psi);
  const double a = std::pow(1.0 + s, n + 1);
  const double b = std::pow(1.0 - s, n + 1);
  ModelPhi m;
  m.phi_z_abs = (n + 1) * std::pow(std::cos(psi), n) / (R * s * eval_Sn(n, psi));
  m.phi1_diag = (n + 1) / (2.0 * R) * (a + b) / (a - b);
  return m;
}

// ---------------------------------------------------------------------------
// Symmetry-breaking family of -u'' + e^{2u} = 0.
// ---------------------------------------------------------------------------

inline double eval_sinh_family(double C, double y) {
  if (!(C > 0.0) || !(y > 0.0)) throw InputError("sinh family requires C > 0 and y > 0");
  const double x = C * y;
  if (x > 20.0) return std::log(2.0 * C) - x - std::log1p(-std::exp(-2.0 * x));
  return std::log(C / std::sinh(x));
}

/// u'' of the sinh family, C^2 / sinh^2(Cy).
inline double sinh_family_second_derivative(double C, double y) {
  const double s = std::sinh(C * y);
  return C * C / (s * s);
}

// ---------------------------------------------------------------------------
// Mikhaylov ODE  -1 - u'' + e^{2u} = 0, u ~ -log y at 0, u -> 0 at infinity.
// ---------------------------------------------------------------------------

namespace detail {

/// e^{2s} - 2s - 1 without cancellation for small s.
inline double first_integral_potential(double s) {
  if (std::abs(s) < 0.25) {
    double term = 2.0 * s * 2.0 * s / 2.0;
    double acc = term;
    for (int k = 3; k < 30; ++k) {
      term *= 2.0 * s / k;
      acc += term;
      if (std::abs(term) < 1e-18 * std::abs(acc)) break;
    }
    return acc;
  }
  return std::expm1(2.0 * s) - 2.0 * s;
}

}  // namespace detail

enum class QuadratureScheme { GaussKronrod, TanhSinh };

/// y(u) = int_u^infinity ds / sqrt(e^{2s} - 2s - 1), evaluated with the chosen scheme.
///
/// Gauss-Kronrod works in s on [max(u, 1), inf); tanh-sinh uses w = e^{-s} on [0, e^{-max(u,1)}].
/// Below 1 both use s = e^t, which removes the 1/s behaviour at small s.
inline double mikhaylov_height(double u, QuadratureScheme scheme) {
  if (!(u > 0.0)) throw InputError("mikhaylov_height requires u > 0");
  auto direct = [](double s) { return 1.0 / std::sqrt(detail::first_integral_potential(s)); };
  auto tail = [](double w) {
    if (w <= 0.0) return 1.0;
    return 1.0 / std::sqrt(1.0 - w * w * (1.0 - 2.0 * std::log(w)));
  };
  auto near = [](double t) {
    const double s = std::exp(t);
    return s / std::sqrt(detail::first_integral_potential(s));
  };
  const double top = std::max(u, 1.0);
  double acc = 0.0;
  if (scheme == QuadratureScheme::GaussKronrod) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    acc = GK::integrate(direct, top, std::numeric_limits<double>::infinity(), 12, 1e-14);
    if (u < 1.0) acc += GK::integrate(near, std::log(u), 0.0, 12, 1e-14);
  } else {
    static thread_local boost::math::quadrature::tanh_sinh<double> ts;
    acc = ts.integrate(tail, 0.0, std::exp(-top), 1e-14);
    if (u < 1.0) acc += ts.integrate(near, std::log(u), 0.0, 1e-14);
  }
  return acc;
}

namespace detail {

/// int_{u_lo}^{u_hi} ds / sqrt(F(s)) with a fixed Gauss rule in log s.
inline double mikhaylov_segment(double u_lo, double u_hi) {
  auto near = [](double t) {
    const double s = std::exp(t);
    return s / std::sqrt(first_integral_potential(s));
  };
  return boost::math::quadrature::gauss<double, 20>::integrate(near, std::log(u_lo), std::log(u_hi));
}

}  // namespace detail

/// Solves y(u) = y for u by bracketed Newton iteration in log u.
inline double mikhaylov_invert(double y, QuadratureScheme scheme, double tol = 1e-13) {
  if (!(y > 0.0)) throw InputError("mikhaylov_invert requires y > 0");
  auto fn = [&](double t) {
    const double u = std::exp(t);
    const double val = mikhaylov_height(u, scheme) - y;
    const double deriv = -u / std::sqrt(detail::first_integral_potential(u));
    return std::make_pair(val, deriv);
  };
  double guess = y < 0.5 ? std::log(-std::log(y) + 0.1) : std::log(2.0) - std::sqrt(2.0) * y;
  const double lo = -700.0;
  const double hi = std::log(750.0);
  guess = std::clamp(guess, lo + 1.0, hi - 1.0);
  std::uintmax_t iters = 200;
  const int digits = static_cast<int>(-std::log2(tol));
  const double t = boost::math::tools::newton_raphson_iterate(fn, guess, lo, hi, digits, iters);
  if (iters >= 200) throw ConvergenceError("Mikhaylov inversion did not converge at y = " + std::to_string(y));
  return std::exp(t);
}

/// Tabulated solution of the Mikhaylov ODE on a log-spaced grid.
class OdeSolution {
 public:
  std::vector<double> ys;
  std::vector<double> us;
  std::vector<double> dus;  // u' = -sqrt(e^{2u} - 2u - 1)
  double fitted_C = 0.0;
  double fitted_rate = 0.0;
  double max_first_integral_error = 0.0;  // relative, derivative from tabulated values
  double max_integral_residual = 0.0;     // |y(u_k) - y_k| with the independent scheme
  double max_ode_residual = 0.0;          // -1 - u'' + e^{2u}, u'' from tabulated values, relative
  QuadratureScheme scheme = QuadratureScheme::GaussKronrod;

  /// u(y): cubic Hermite interpolation in log y inside the table, direct inversion outside.
  double operator()(double y) const {
    if (y <= ys.front() || y >= ys.back()) return mikhaylov_invert(y, scheme);
    const double t = std::log(y);
    const double t0 = std::log(ys.front());
    const double dt = (std::log(ys.back()) - t0) / static_cast<double>(ys.size() - 1);
    std::size_t k = std::min(static_cast<std::size_t>((t - t0) / dt), ys.size() - 2);
    const double ta = t0 + dt * static_cast<double>(k);
    const double s = (t - ta) / dt;
    const double m0 = dus[k] * ys[k] * dt;
    const double m1 = dus[k + 1] * ys[k + 1] * dt;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * us[k] + h10 * m0 + h01 * us[k + 1] + h11 * m1;
  }

  double derivative(double y) const { return -std::sqrt(detail::first_integral_potential((*this)(y))); }
};

struct OdeOptions {
  double y_lo = 1e-5;
  double y_hi = 24.0;
  std::size_t nodes = 3000;
  double fit_lo = 6.0;
  double fit_hi = 16.0;
};

inline OdeSolution solve_mikhaylov_ode(double tol, const OdeOptions& opt = {}) {
  if (!(tol > 1e-14 && tol < 1e-4)) throw InputError("tolerance out of range");
  OdeSolution sol;
  const std::size_t n = opt.nodes;
  const double t0 = std::log(opt.y_lo);
  const double dt = (std::log(opt.y_hi) - t0) / static_cast<double>(n - 1);
  sol.ys.resize(n);
  sol.us.resize(n);
  sol.dus.resize(n);
  const double inv_tol = std::min(1e-3 * tol, 1e-13);
  // March outwards: each node solves y_{k-1} + int_u^{u_{k-1}} ds/sqrt(F) = y_k by Newton.
  for (std::size_t k = 0; k < n; ++k) {
    const double y = std::exp(t0 + dt * static_cast<double>(k));
    sol.ys[k] = y;
    if (k == 0) {
      sol.us[k] = mikhaylov_invert(y, QuadratureScheme::GaussKronrod, inv_tol);
    } else {
      const double y_prev = sol.ys[k - 1];
      const double u_prev = sol.us[k - 1];
      double u = u_prev * std::exp(sol.dus[k - 1] * (y - y_prev) / u_prev);
      for (int it = 0;; ++it) {
        if (it == 50) throw ConvergenceError("Mikhaylov table march stalled at y = " + std::to_string(y));
        const double phi = y_prev + detail::mikhaylov_segment(u, u_prev) - y;
        const double dphi = -1.0 / std::sqrt(detail::first_integral_potential(u));
        // Newton in log u keeps the iterate positive.
        const double step = phi / (dphi * u);
        u *= std::exp(-std::clamp(step, -1.0, 1.0));
        if (std::abs(step) < 1e-13) break;
      }
      sol.us[k] = u;
    }
    sol.dus[k] = -std::sqrt(detail::first_integral_potential(sol.us[k]));
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(sol.us[k] > 0.0)) throw InvariantError("Mikhaylov solution lost positivity");
    if (k > 0 && !(sol.us[k] < sol.us[k - 1])) throw InvariantError("Mikhaylov solution lost monotonicity");
  }

  // Finite-difference checks in t = log y (fourth order, uniform in t).
  for (std::size_t k = 2; k + 2 < n; ++k) {
    const double y = sol.ys[k];
    const double ut = (-sol.us[k + 2] + 8 * sol.us[k + 1] - 8 * sol.us[k - 1] + sol.us[k - 2]) / (12 * dt);
    const double utt = (-sol.us[k + 2] + 16 * sol.us[k + 1] - 30 * sol.us[k] + 16 * sol.us[k - 1] - sol.us[k - 2]) /
                       (12 * dt * dt);
    const double up = ut / y;
    const double upp = (utt - ut) / (y * y);
    const double F = detail::first_integral_potential(sol.us[k]);
    const double scale = std::max(1.0, F);
    sol.max_first_integral_error = std::max(sol.max_first_integral_error, std::abs(up * up - F) / scale);
    const double e2u = std::exp(2 * sol.us[k]);
    sol.max_ode_residual = std::max(sol.max_ode_residual, std::abs(-1.0 - upp + e2u) / std::max(1.0, e2u));
  }
  for (std::size_t k = 0; k < n; k += 37) {
    const double yk = mikhaylov_height(sol.us[k], QuadratureScheme::TanhSinh);
    sol.max_integral_residual = std::max(sol.max_integral_residual, std::abs(yk - sol.ys[k]) / std::max(1.0, sol.ys[k]));
  }

  // Far-field fit log u = log C - rate * y.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double y = sol.ys[k];
    if (y < opt.fit_lo || y > opt.fit_hi) continue;
    const double ly = std::log(sol.us[k]);
    sx += y;
    sy += ly;
    sxx += y * y;
    sxy += y * ly;
    ++m;
  }
  if (m < 3) throw InputError("far-field fit window holds fewer than three nodes");
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  sol.fitted_rate = -slope;
  sol.fitted_C = std::exp((sy - slope * sx) / m);
  return sol;
}

// ---------------------------------------------------------------------------
// Smooth cutoffs.
// ---------------------------------------------------------------------------

/// Smooth step on [0, 1] with value and first two derivatives: 1 / (1 + e^g), g = 1/t - 1/(1 - t).
/// All derivatives vanish at both ends, so blends leave no low-order truncation at their edges.
struct Step {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

inline Step smoothstep(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  const double u = 1.0 - t;
  const double g = 1.0 / t - 1.0 / u;
  const double v = 1.0 / (1.0 + std::exp(g));
  const double q = v * (1.0 - v);
  if (q == 0.0) return {v, 0.0, 0.0};
  const double g1 = -1.0 / (t * t) - 1.0 / (u * u);
  const double g2 = 2.0 / (t * t * t) - 2.0 / (u * u * u);
  const double d1 = -q * g1;
  return {v, d1, -(1.0 - 2.0 * v) * d1 * g1 - q * g2};
}

/// Ramp rising from 0 at `lo` to 1 at `hi`, with derivatives in the physical variable.
inline Step ramp(double x, double lo, double hi) {
  const double w = hi - lo;
  Step s = smoothstep((x - lo) / w);
  s.d1 /= w;
  s.d2 /= w * w;
  return s;
}

}  // namespace nahmpole
