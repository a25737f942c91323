// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nahmpole/model_solutions.hpp"

namespace nahmpole {

/// Which potential to use in the hemisphere operator.
///
/// Linearized is 2 r^{2n} e^{2U_n} R^2; Displayed drops the factor 2 and the cos^{2n} weight.
enum class TForm { Linearized, Displayed };

inline double eval_T(int n, double psi, TForm form = TForm::Linearized) {
  if (!(psi > 0.0) || psi > kPi / 2 + 1e-15) throw InputError("eval_T: psi must lie in (0, pi/2]");
  const double s = std::sin(psi);
  const double S = eval_Sn(n, psi);
  const double np1 = n + 1.0;
  if (form == TForm::Displayed) return np1 * np1 / (s * s * S * S);
  const double c = n > 0 ? std::pow(std::max(std::cos(psi), 0.0), 2 * n) : 1.0;
  return 2.0 * np1 * np1 * c / (s * s * S * S);
}

/// Lowest eigenpairs of J = -(1/cos) d(cos d) + m^2/cos^2 + T on the quarter arc [0, pi/2].
struct Spectrum {
  int n = 0;
  int m = 0;
  TForm form = TForm::Linearized;
  std::vector<double> eigenvalues;             // Richardson-extrapolated
  std::array<std::vector<double>, 3> raw;      // per resolution N, 2N, 4N
  double extrapolation_gap = 0.0;              // max relative |R(N,2N) - R(2N,4N)|
  std::vector<double> psi;                     // finest grid, including both ends
  std::vector<std::vector<double>> functions;  // eigenfunctions on `psi`, weighted-normalized
  std::vector<double> weights;                 // cos-weighted dual-cell masses on `psi`
};

namespace detail {

/// Eigenvector of a symmetric tridiagonal matrix for an eigenvalue estimate near `shift`.
inline Eigen::VectorXd tridiagonal_inverse_iteration(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                                                     double shift) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd c(n), d(n);
  for (int it = 0; it < 4; ++it) {
    // Thomas algorithm on (T - shift I) y = x.
    double denom = diag(0) - shift;
    c(0) = n > 1 ? sub(0) / denom : 0.0;
    d(0) = x(0) / denom;
    for (Eigen::Index i = 1; i < n; ++i) {
      denom = diag(i) - shift - sub(i - 1) * c(i - 1);
      c(i) = i + 1 < n ? sub(i) / denom : 0.0;
      d(i) = (x(i) - sub(i - 1) * d(i - 1)) / denom;
    }
    for (Eigen::Index i = n - 2; i >= 0; --i) d(i) -= c(i) * d(i + 1);
    x = d / d.norm();
  }
  return x;
}

struct ArcDiscretization {
  std::vector<double> psi;
  std::vector<double> mass;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;  // full-grid nodal values, one column per pair
};

/// Finite-volume discretization in symmetric form: Dirichlet at psi = 0, natural (m = 0)
/// or Dirichlet (m != 0) at the pole. The generalized problem is reduced with M^{-1/2}.
inline ArcDiscretization solve_arc(int n, int m, std::size_t N, int count, TForm form, bool vectors) {
  const double h = (kPi / 2) / static_cast<double>(N);
  ArcDiscretization out;
  out.psi.resize(N + 1);
  out.mass.assign(N + 1, 0.0);
  for (std::size_t i = 0; i <= N; ++i) out.psi[i] = h * static_cast<double>(i);
  out.psi[N] = kPi / 2;
  for (std::size_t i = 1; i <= N; ++i) {
    const double lo = std::sin(out.psi[i] - 0.5 * h);
    const double hi = i == N ? 1.0 : std::sin(out.psi[i] + 0.5 * h);
    out.mass[i] = hi - lo;
  }
  const std::size_t last = m == 0 ? N : N - 1;
  const std::size_t dim = last;  // unknowns 1..last
  Eigen::VectorXd diag(dim), sub(dim > 0 ? dim - 1 : 0);
  for (std::size_t i = 1; i <= last; ++i) {
    const double wl = std::cos(out.psi[i] - 0.5 * h) / h;
    const double wr = i < N ? std::cos(out.psi[i] + 0.5 * h) / h : 0.0;
    const double c = std::cos(out.psi[i]);
    double V = eval_T(n, out.psi[i], form);
    if (m != 0) V += static_cast<double>(m * m) / (c * c);
    diag(static_cast<Eigen::Index>(i - 1)) = (wl + wr + V * out.mass[i]) / out.mass[i];
    if (i < last) {
      sub(static_cast<Eigen::Index>(i - 1)) = -wr / std::sqrt(out.mass[i] * out.mass[i + 1]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("tridiagonal eigensolver failed");
  const Eigen::Index k = std::min<Eigen::Index>(count, static_cast<Eigen::Index>(dim));
  out.eigenvalues = es.eigenvalues().head(k);
  if (vectors) {
    out.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N + 1), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double lam = out.eigenvalues(j);
      Eigen::VectorXd x = tridiagonal_inverse_iteration(diag, sub, lam + 1e-9 * std::max(1.0, lam));
      double norm = 0.0;
      for (std::size_t i = 1; i <= last; ++i) {
        const double v = x(static_cast<Eigen::Index>(i - 1)) / std::sqrt(out.mass[i]);
        out.vectors(static_cast<Eigen::Index>(i), j) = v;
        norm += out.mass[i] * v * v;
      }
      out.vectors.col(j) /= std::sqrt(norm);
      // Fix the sign so that the function is positive just off psi = 0.
      if (out.vectors(1, j) < 0.0) out.vectors.col(j) *= -1.0;
    }
  }
  return out;
}

}  // namespace detail

/// Lowest `count` eigenpairs, extrapolated over resolutions N, 2N and 4N.
inline Spectrum eigen_J(int n, int m, int count, std::size_t resolution = 256, TForm form = TForm::Linearized) {
  if (n < 0) throw InputError("knot order must be nonnegative");
  if (count < 1 || count > 20) throw InputError("eigenvalue count must lie in [1, 20]");
  if (resolution < 64) throw InputError("hemisphere resolution must be at least 64");
  Spectrum sp;
  sp.n = n;
  sp.m = m;
  sp.form = form;
  std::array<detail::ArcDiscretization, 3> d;
  for (std::size_t r = 0; r < 3; ++r) {
    d[r] = detail::solve_arc(n, m, resolution << r, count, form, r == 2);
    sp.raw[r].assign(d[r].eigenvalues.data(), d[r].eigenvalues.data() + d[r].eigenvalues.size());
  }
  for (int j = 0; j < count; ++j) {
    const double a = (4.0 * sp.raw[1][j] - sp.raw[0][j]) / 3.0;
    const double b = (4.0 * sp.raw[2][j] - sp.raw[1][j]) / 3.0;
    const double gap = std::abs(a - b) / std::max(1.0, std::abs(b));
    sp.extrapolation_gap = std::max(sp.extrapolation_gap, gap);
    sp.eigenvalues.push_back(b);
  }
  if (sp.extrapolation_gap > 1e-6) {
    throw ConvergenceError("eigenvalue extrapolation did not converge (relative gap " +
                           std::to_string(sp.extrapolation_gap) + "); raise the resolution");
  }
  for (std::size_t j = 0; j < sp.eigenvalues.size(); ++j) {
    if (!(sp.eigenvalues[j] > 0.0)) throw InvariantError("non-positive eigenvalue of J");
    if (j > 0 && !(sp.eigenvalues[j] > sp.eigenvalues[j - 1])) throw InvariantError("eigenvalues not increasing");
  }
  sp.psi = d[2].psi;
  sp.weights = d[2].mass;
  for (Eigen::Index j = 0; j < d[2].vectors.cols(); ++j) {
    const auto col = d[2].vectors.col(j);
    sp.functions.emplace_back(col.data(), col.data() + col.size());
  }
  return sp;
}

/// (delta+, delta-) solving delta (delta + 1) = lambda.
inline std::pair<double, double> indicial_radial(double lambda) {
  if (!(lambda > -0.25)) throw InputError("indicial roots are complex for lambda <= -1/4");
  const double s = std::sqrt(1.0 + 4.0 * lambda);
  return {-0.5 + 0.5 * s, -0.5 - 0.5 * s};
}

/// Roots of gamma (gamma - 1) = 2, the exponents of (-d_y^2 + 2/y^2).
inline std::array<double, 2> indicial_boundary() { return {2.0, -1.0}; }

struct IndicialTable {
  int n = 0;
  int m = 0;
  std::vector<double> eigenvalues;
  std::vector<double> delta_plus;
  std::vector<double> delta_minus;
  std::array<double, 2> boundary = indicial_boundary();
};

inline IndicialTable indicial_table(const Spectrum& sp) {
  IndicialTable t;
  t.n = sp.n;
  t.m = sp.m;
  t.eigenvalues = sp.eigenvalues;
  for (double l : sp.eigenvalues) {
    const auto [p, q] = indicial_radial(l);
    t.delta_plus.push_back(p);
    t.delta_minus.push_back(q);
  }
  return t;
}

/// Ground state of J for m = 0, scaled to unit maximum, evaluated by linear interpolation.
class GroundState {
 public:
  GroundState() = default;
  explicit GroundState(const Spectrum& sp) : lambda_(sp.eigenvalues.front()), psi_(sp.psi), mu_(sp.functions.front()) {
    double mx = 0.0;
    for (double v : mu_) mx = std::max(mx, v);
    for (double& v : mu_) v /= mx;
  }

  double lambda() const { return lambda_; }
  double delta_plus() const { return indicial_radial(lambda_).first; }

  double operator()(double psi) const {
    if (psi <= 0.0) return 0.0;
    if (psi >= psi_.back()) return mu_.back();
    const double h = psi_[1] - psi_[0];
    const std::size_t i = std::min(static_cast<std::size_t>(psi / h), psi_.size() - 2);
    const double t = (psi - psi_[i]) / (psi_[i + 1] - psi_[i]);
    return (1.0 - t) * mu_[i] + t * mu_[i + 1];
  }

 private:
  double lambda_ = 0.0;
  std::vector<double> psi_;
  std::vector<double> mu_;
};

}  // namespace nahmpole
