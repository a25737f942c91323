// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nahmpole/semilinear.hpp"

namespace nahmpole {

using Mat2 = Eigen::Matrix2cd;
using MatrixField = std::vector<Mat2>;

namespace detail {

inline Mat2 sigma3() {
  Mat2 m = Mat2::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

inline Mat2 commutator(const Mat2& a, const Mat2& b) { return a * b - b * a; }

/// Largest singular value of a 2x2 matrix.
inline double spectral_norm(const Mat2& m) {
  const double f2 = m.squaredNorm();
  const double d = std::abs(m.determinant());
  return std::sqrt(0.5 * (f2 + std::sqrt(std::max(0.0, f2 * f2 - 4.0 * d * d))));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Metrics and holomorphic data.
// ---------------------------------------------------------------------------

/// Hermitian metric on the rank-2 bundle: diagonal diag(h0 e^u, h0^{-1} e^{-u}) or a general field.
class HermitianMetric {
 public:
  static HermitianMetric diagonal(const ScalarField& u, double h0 = 1.0) {
    if (!(h0 > 0.0) || !std::isfinite(h0)) throw InputError("background metric h0 must be positive and finite");
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!std::isfinite(u[i])) {
        throw InputError("metric is not positive definite: u is not finite at node " + std::to_string(i));
      }
    }
    HermitianMetric m;
    m.grid_ = u.grid();
    m.u_ = u;
    m.h0_ = h0;
    m.diagonal_ = true;
    return m;
  }

  static HermitianMetric general(const GridPtr& grid, MatrixField H) {
    if (H.size() != grid->size()) throw InputError("metric field does not match the grid");
    for (std::size_t i = 0; i < H.size(); ++i) {
      const Mat2& h = H[i];
      const double scale = std::max(1.0, h.norm());
      if (!h.allFinite() || (h - h.adjoint()).norm() > 1e-12 * scale) {
        throw InputError("metric is not Hermitian at node " + std::to_string(i));
      }
      if (!(h(0, 0).real() > 0.0) || !(h.determinant().real() > 0.0)) {
        throw InputError("metric is not positive definite at node " + std::to_string(i));
      }
    }
    HermitianMetric m;
    m.grid_ = grid;
    m.H_ = std::move(H);
    m.diagonal_ = false;
    return m;
  }

  bool is_diagonal() const { return diagonal_; }
  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return grid_->size(); }
  double h0() const { return h0_; }

  const ScalarField& u() const {
    if (!diagonal_) throw InputError("a general metric has no scalar potential");
    return *u_;
  }

  /// log of the (1,1) entry for diagonal metrics.
  double log_h11(std::size_t i) const {
    return diagonal_ ? std::log(h0_) + (*u_)[i] : std::log(H_[i](0, 0).real());
  }

  Mat2 operator()(std::size_t i) const {
    if (!diagonal_) return H_[i];
    const double h = std::exp(log_h11(i));
    Mat2 m = Mat2::Zero();
    m(0, 0) = h;
    m(1, 1) = 1.0 / h;
    return m;
  }

 private:
  GridPtr grid_;
  std::optional<ScalarField> u_;
  MatrixField H_;
  double h0_ = 1.0;
  bool diagonal_ = true;
};

inline HermitianMetric metric_from_scalar(const ScalarField& u, double h0 = 1.0) {
  return HermitianMetric::diagonal(u, h0);
}

/// Higgs field alpha E12 + beta E21 + t sigma3 in the holomorphic frame, alpha and beta measured in h0.
struct HolomorphicHiggs {
  std::function<Complex(Complex)> alpha = [](Complex) { return Complex{1.0, 0.0}; };
  std::function<Complex(Complex)> beta = [](Complex) { return Complex{0.0, 0.0}; };
  std::function<Complex(Complex)> t = [](Complex) { return Complex{0.0, 0.0}; };
  double h0 = 1.0;
  // Rotation weights of alpha and beta about the origin; -1 marks data without that symmetry.
  int alpha_weight = 0;
  int beta_weight = 0;

  /// Matrix of the Higgs field in the frame where the diagonal metric is diag(h0 e^u, h0^{-1} e^{-u}).
  Mat2 frame(Complex z) const {
    Mat2 m = Mat2::Zero();
    const Complex tz = t(z);
    m(0, 0) = tz;
    m(1, 1) = -tz;
    m(0, 1) = alpha(z) / h0;
    m(1, 0) = beta(z) * h0;
    return m;
  }

  static HolomorphicHiggs from_data(const HiggsData& d, double h0 = 1.0) {
    HolomorphicHiggs f;
    f.h0 = h0;
    if (d.poly) {
      const Polynomial p = *d.poly;
      f.alpha = [p](Complex z) { return p(z); };
      const auto& c = p.coefficients();
      const bool monomial = std::all_of(c.begin(), c.end() - 1, [](Complex x) { return x == Complex{0.0, 0.0}; });
      f.alpha_weight = monomial ? p.degree() : -1;
    } else {
      const HorizontalFn a2 = d.alpha_sq;
      f.alpha = [a2](Complex z) { return Complex{std::sqrt(std::max(0.0, a2(z))), 0.0}; };
    }
    const HorizontalFn b2 = d.beta_sq;
    f.beta = [b2](Complex z) { return Complex{std::sqrt(std::max(0.0, b2(z))), 0.0}; };
    return f;
  }
};

namespace detail {

/// Three-point centered first-derivative weights at node i along axis a.
struct Stencil3 {
  std::size_t lo = 0, hi = 0;
  double wl = 0.0, w0 = 0.0, wh = 0.0;
};

inline std::optional<Stencil3> centered(const GradedGrid& g, std::size_t i, std::size_t a) {
  const Axis& ax = g.axis(a);
  const std::size_t n = ax.size();
  const std::size_t ia = g.index_along(i, a);
  const std::size_t s = g.stride(a);
  Stencil3 st;
  if (ax.kind == AxisKind::Periodic) {
    const double h = ax.period / static_cast<double>(n);
    st.lo = i - ia * s + ((ia + n - 1) % n) * s;
    st.hi = i - ia * s + ((ia + 1) % n) * s;
    st.wl = -0.5 / h;
    st.wh = 0.5 / h;
    return st;
  }
  if (ia == 0 || ia + 1 == n) return std::nullopt;
  const double hm = ax.nodes[ia] - ax.nodes[ia - 1];
  const double hp = ax.nodes[ia + 1] - ax.nodes[ia];
  st.lo = i - s;
  st.hi = i + s;
  st.wl = -hp / (hm * (hm + hp));
  st.w0 = (hp - hm) / (hm * hp);
  st.wh = hm / (hp * (hm + hp));
  return st;
}

/// Grid roles: radial axis (axisymmetric), Cartesian horizontal axes and the vertical axis.
struct AxesLayout {
  bool radial = false;
  std::vector<std::size_t> horizontal;
  std::size_t vertical = 0;
};

inline AxesLayout layout(const GradedGrid& g) {
  if (!g.has_vertical()) throw InputError("gauge fields need a grid with a vertical axis");
  AxesLayout l;
  l.vertical = g.vertical_axis();
  for (std::size_t a = 0; a < g.horizontal_dims(); ++a) l.horizontal.push_back(a);
  l.radial = !l.horizontal.empty() && g.axis(0).kind == AxisKind::Radial;
  return l;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Unitary gauge.
// ---------------------------------------------------------------------------

/// Connection and Higgs fields in unitary gauge. On axisymmetric grids the fields are stored on the
/// theta = 0 half-plane; each entry carries a rotation weight m (F ~ e^{i m theta}).
struct UnitaryTriplet {
  GridPtr grid;
  MatrixField A_z, A_zbar, A_y, phi_z, phi_zbar, phi1;
  std::vector<char> valid;  // nodes where every field is defined
  Eigen::Matrix2i w_A_z = Eigen::Matrix2i::Zero();
  Eigen::Matrix2i w_A_zbar = Eigen::Matrix2i::Zero();
  Eigen::Matrix2i w_phi_z = Eigen::Matrix2i::Zero();
  Eigen::Matrix2i w_phi_zbar = Eigen::Matrix2i::Zero();
};

struct UnitarityReport {
  double connection = 0.0;  // max |A_zbar + A_z^*| and |A_y + A_y^*|, relative
  double higgs = 0.0;       // max |phi_zbar - phi_z^*|, relative
  double phi1 = 0.0;        // max |phi1 + phi1^*|, relative
  bool ok(double tol = 1e-10) const { return connection <= tol && higgs <= tol && phi1 <= tol; }
};

namespace detail {

/// Horizontal and vertical first derivatives of a scalar field at node i, if the stencils exist.
/// The radial derivative on the axis uses evenness of the field.
struct ScalarGradient {
  Complex dz{0.0}, dzbar{0.0};
  double dy = 0.0;
};

inline std::optional<ScalarGradient> scalar_gradient(const GradedGrid& g, const AxesLayout& l,
                                                     const std::vector<double>& u, const std::vector<char>& ok,
                                                     std::size_t i) {
  auto diff = [&](std::size_t a) -> std::optional<double> {
    const auto st = centered(g, i, a);
    if (!st) return std::nullopt;
    if (!ok[st->lo] || !ok[st->hi]) return std::nullopt;
    return st->wl * u[st->lo] + st->w0 * u[i] + st->wh * u[st->hi];
  };
  ScalarGradient out;
  double dx1 = 0.0, dx2 = 0.0;
  if (l.radial) {
    if (g.index_along(i, 0) == 0) {
      if (!ok[i + g.stride(0)]) return std::nullopt;
    } else {
      const auto d = diff(0);
      if (!d) return std::nullopt;
      dx1 = *d;
    }
  } else {
    for (std::size_t k = 0; k < l.horizontal.size(); ++k) {
      const auto d = diff(l.horizontal[k]);
      if (!d) return std::nullopt;
      (k == 0 ? dx1 : dx2) = *d;
    }
  }
  const auto dy = diff(l.vertical);
  if (!dy) return std::nullopt;
  out.dz = 0.5 * Complex{dx1, -dx2};
  out.dzbar = 0.5 * Complex{dx1, dx2};
  out.dy = *dy;
  return out;
}

}  // namespace detail

/// Unitary gauge fields of a diagonal metric: g = H^{1/2}, A_z = g^{-1} d_z g, A_zbar = -(g^{-1} d_zbar g),
/// phi_z = g phi g^{-1}, phi_zbar = g^{-1} phi^* g and phi1 = -(i/2)(g^{-1} d_y g + d_y g g^{-1}).
inline UnitaryTriplet unitary_triplet(const HermitianMetric& metric, const HolomorphicHiggs& higgs) {
  if (!metric.is_diagonal()) throw InputError("unitary reconstruction needs a diagonal metric");
  if (std::abs(std::log(higgs.h0) - std::log(metric.h0())) > 1e-14) {
    throw InputError("Higgs field and metric use different background metrics h0");
  }
  const GridPtr& grid = metric.grid();
  const GradedGrid& g = *grid;
  const detail::AxesLayout l = detail::layout(g);
  if (l.radial && (higgs.alpha_weight < 0 || higgs.beta_weight < 0)) {
    throw InputError("axisymmetric reconstruction needs rotation-equivariant data such as p(z) = a z^n");
  }
  const std::size_t n = g.size();
  std::vector<double> logh(n);
  std::vector<char> ok(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    logh[i] = metric.log_h11(i);
    ok[i] = g.y(i) > 0.0 ? 1 : 0;
    const Complex t = higgs.t(g.z(i));
    if (t != Complex{0.0, 0.0}) {
      throw InputError("unsupported data: only t = 0 Higgs fields can be reconstructed");
    }
  }
  UnitaryTriplet T;
  T.grid = grid;
  for (auto* f : {&T.A_z, &T.A_zbar, &T.A_y, &T.phi_z, &T.phi_zbar, &T.phi1}) f->assign(n, Mat2::Zero());
  T.valid.assign(n, 0);
  T.w_A_z << -1, -1, -1, -1;
  T.w_A_zbar << 1, 1, 1, 1;
  T.w_phi_z << 0, higgs.alpha_weight, higgs.beta_weight, 0;
  T.w_phi_zbar = -T.w_phi_z.transpose();

  const Mat2 s3 = detail::sigma3();
  const Complex I{0.0, 1.0};
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    const auto grad = detail::scalar_gradient(g, l, logh, ok, i);
    if (!grad) continue;
    T.valid[i] = 1;
    Mat2 gm = Mat2::Zero(), gi = Mat2::Zero();
    gm(0, 0) = std::exp(0.5 * logh[i]);
    gm(1, 1) = std::exp(-0.5 * logh[i]);
    gi(0, 0) = gm(1, 1);
    gi(1, 1) = gm(0, 0);
    // d g = g (d logh / 2) sigma3 for the diagonal square root.
    const Mat2 dz_g = gm * (0.5 * grad->dz) * s3;
    const Mat2 dzbar_g = gm * (0.5 * grad->dzbar) * s3;
    const Mat2 dy_g = gm * (0.5 * grad->dy) * s3;
    const Mat2 phi = higgs.frame(g.z(i));
    T.A_z[i] = gi * dz_g;
    T.A_zbar[i] = -(gi * dzbar_g);
    T.A_y[i] = 0.5 * (gi * dy_g - dy_g * gi);
    T.phi_z[i] = gm * phi * gi;
    T.phi_zbar[i] = gi * phi.adjoint() * gm;
    T.phi1[i] = -0.5 * I * (gi * dy_g + dy_g * gi);
  }
  return T;
}

inline UnitarityReport check_unitarity(const UnitaryTriplet& T) {
  UnitarityReport r;
  for (std::size_t i = 0; i < T.valid.size(); ++i) {
    if (!T.valid[i]) continue;
    const double sa = 1.0 + T.A_z[i].norm() + T.A_y[i].norm();
    r.connection = std::max({r.connection, (T.A_zbar[i] + T.A_z[i].adjoint()).norm() / sa,
                             (T.A_y[i] + T.A_y[i].adjoint()).norm() / sa});
    r.higgs = std::max(r.higgs, (T.phi_zbar[i] - T.phi_z[i].adjoint()).norm() / (1.0 + T.phi_z[i].norm()));
    r.phi1 = std::max(r.phi1, (T.phi1[i] + T.phi1[i].adjoint()).norm() / (1.0 + T.phi1[i].norm()));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Field-equation residuals.
// ---------------------------------------------------------------------------

struct EbeResidual {
  ScalarField moment, holomorphic, parallel;  // spectral norms per node
  std::vector<char> valid;
  double max_moment = 0.0, max_holomorphic = 0.0, max_parallel = 0.0;
  std::size_t valid_count = 0;
};

namespace detail {

/// d_z, d_zbar and d_y of a matrix field at node i; entries carry rotation weights on axisymmetric grids.
struct MatrixGradient {
  Mat2 dz = Mat2::Zero(), dzbar = Mat2::Zero(), dy = Mat2::Zero();
};

inline std::optional<MatrixGradient> matrix_gradient(const GradedGrid& g, const AxesLayout& l, const MatrixField& F,
                                                     const Eigen::Matrix2i& weight, const std::vector<char>& ok,
                                                     std::size_t i) {
  auto diff = [&](std::size_t a) -> std::optional<Mat2> {
    const auto st = centered(g, i, a);
    if (!st || !ok[st->lo] || !ok[st->hi]) return std::nullopt;
    return Mat2(st->wl * F[st->lo] + st->w0 * F[i] + st->wh * F[st->hi]);
  };
  MatrixGradient out;
  if (l.radial) {
    const double r = g.coordinate(i, 0);
    if (!(r > 0.0)) return std::nullopt;
    const auto dr = diff(0);
    if (!dr) return std::nullopt;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double m = weight(a, b);
        out.dz(a, b) = 0.5 * ((*dr)(a, b) + m / r * F[i](a, b));
        out.dzbar(a, b) = 0.5 * ((*dr)(a, b) - m / r * F[i](a, b));
      }
    }
  } else {
    Mat2 d1 = Mat2::Zero(), d2 = Mat2::Zero();
    for (std::size_t k = 0; k < l.horizontal.size(); ++k) {
      const auto d = diff(l.horizontal[k]);
      if (!d) return std::nullopt;
      (k == 0 ? d1 : d2) = *d;
    }
    const Complex I{0.0, 1.0};
    out.dz = 0.5 * (d1 - I * d2);
    out.dzbar = 0.5 * (d1 + I * d2);
  }
  const auto dy = diff(l.vertical);
  if (!dy) return std::nullopt;
  out.dy = *dy;
  return out;
}

}  // namespace detail

/// Moment-map, holomorphicity and parallelism residuals of a unitary triplet, by composed centered differences.
inline EbeResidual ebe_residual(const UnitaryTriplet& T, const HiggsData& data) {
  const GradedGrid& g = *T.grid;
  const detail::AxesLayout l = detail::layout(g);
  const std::size_t n = g.size();
  EbeResidual R{ScalarField(T.grid), ScalarField(T.grid), ScalarField(T.grid), std::vector<char>(n, 0)};
  const Mat2 s3 = detail::sigma3();
  const Complex I{0.0, 1.0};
  const Eigen::Matrix2i zero = Eigen::Matrix2i::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    if (!T.valid[i]) continue;
    const auto gAzbar = detail::matrix_gradient(g, l, T.A_zbar, T.w_A_zbar, T.valid, i);
    const auto gAz = detail::matrix_gradient(g, l, T.A_z, T.w_A_z, T.valid, i);
    const auto gphi = detail::matrix_gradient(g, l, T.phi_z, T.w_phi_z, T.valid, i);
    const auto gphi1 = detail::matrix_gradient(g, l, T.phi1, zero, T.valid, i);
    if (!gAzbar || !gAz || !gphi || !gphi1) continue;
    const Complex z = g.z(i);
    const double g0_sq = data.g0_sq(z);
    const Mat2 M = (4.0 / g0_sq) * (gAzbar->dz - gAz->dzbar + detail::commutator(T.A_z[i], T.A_zbar[i])) -
                   2.0 * I * (gphi1->dy + detail::commutator(T.A_y[i], T.phi1[i])) +
                   detail::commutator(T.phi_z[i], T.phi_zbar[i]) + data.K(z) * s3;
    const Mat2 Hz = gphi->dzbar + detail::commutator(T.A_zbar[i], T.phi_z[i]);
    const Mat2 Py = gphi->dy + detail::commutator(T.A_y[i] - I * T.phi1[i], T.phi_z[i]);
    R.valid[i] = 1;
    ++R.valid_count;
    R.moment[i] = detail::spectral_norm(M);
    R.holomorphic[i] = detail::spectral_norm(Hz);
    R.parallel[i] = detail::spectral_norm(Py);
    R.max_moment = std::max(R.max_moment, R.moment[i]);
    R.max_holomorphic = std::max(R.max_holomorphic, R.holomorphic[i]);
    R.max_parallel = std::max(R.max_parallel, R.parallel[i]);
  }
  return R;
}

// ---------------------------------------------------------------------------
// Hermitian-metric form.
// ---------------------------------------------------------------------------

enum class MetricRepresentation { Diagonal, General };

struct HermitianResidual {
  ScalarField norm;    // spectral norm at unknown nodes
  ScalarField sigma3;  // (1/2) Re tr(R sigma3)
  std::vector<char> mask;
  double max_norm = 0.0;
};

namespace detail {

inline Mat2 hermitian_power(const Mat2& H, double p) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(H);
  const Eigen::Vector2d ev = es.eigenvalues().array().pow(p);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline Mat2 hermitian_log(const Mat2& H) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(H);
  const Eigen::Vector2d ev = es.eigenvalues().array().log();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// Finite-volume residual of the metric equation: the discrete d_y(H^{-1} d_y H) and horizontal terms are
/// written with log(H_i^{-1} H_j) across each face, plus K sigma3 and [phi, H^{-1} phi^* H].
inline HermitianResidual hermitian_residual(const DiscreteOperator& op, const HermitianMetric& metric,
                                            const HolomorphicHiggs& higgs, const HiggsData& data,
                                            MetricRepresentation rep = MetricRepresentation::Diagonal) {
  const GradedGrid& g = op.grid();
  if (metric.size() != g.size()) throw InputError("metric does not match the operator grid");
  if (rep == MetricRepresentation::Diagonal && !metric.is_diagonal()) {
    throw InputError("diagonal representation needs a diagonal metric");
  }
  HermitianResidual R{ScalarField(op.grid_ptr()), ScalarField(op.grid_ptr()), std::vector<char>(g.size(), 0)};
  const Mat2 s3 = detail::sigma3();
  std::vector<double> Lu;
  if (rep == MetricRepresentation::Diagonal) {
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = metric.log_h11(i);
    Lu = op.apply(u);
  }
  const auto& rho = op.row_scale();
  const auto& nodes = op.unknown_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t i = nodes[k];
    const Complex z = g.z(i);
    const Mat2 Hi = metric(i);
    Mat2 r = Mat2::Zero();
    if (rep == MetricRepresentation::Diagonal) {
      r = (Lu[i] + data.K(z)) * s3;
    } else {
      const Mat2 S = detail::hermitian_power(Hi, -0.5);
      const Mat2 Sinv = detail::hermitian_power(Hi, 0.5);
      Mat2 flux = Mat2::Zero();
      op.for_each_face(k, [&](std::size_t j, double w) {
        flux -= w * (S * detail::hermitian_log(S * metric(j) * S) * Sinv);
      });
      r = flux / rho[i] + data.K(z) * s3;
    }
    const Mat2 phi = higgs.frame(z);
    r += detail::commutator(phi, Hi.inverse() * phi.adjoint() * Hi);
    R.mask[i] = 1;
    R.norm[i] = detail::spectral_norm(r);
    R.sigma3[i] = 0.5 * (r * s3).trace().real();
    R.max_norm = std::max(R.max_norm, R.norm[i]);
  }
  return R;
}

/// sigma(H1, H2) = tr(H1^{-1} H2) + tr(H2^{-1} H1) - 4.
inline ScalarField sigma_distance(const HermitianMetric& H1, const HermitianMetric& H2) {
  if (H1.size() != H2.size()) {
    throw InputError("metrics live on different grids");
  }
  ScalarField s(H1.grid());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (H1.is_diagonal() && H2.is_diagonal()) {
      const double sh = std::sinh(0.5 * (H1.log_h11(i) - H2.log_h11(i)));
      s[i] = 8.0 * sh * sh;
    } else {
      const Mat2 a = H1(i), b = H2(i);
      s[i] = (a.inverse() * b).trace().real() + (b.inverse() * a).trace().real() - 4.0;
    }
  }
  return s;
}

struct SubharmonicReport {
  double min_laplacian = std::numeric_limits<double>::infinity();  // min of -(L sigma) over unknown nodes
  std::size_t violations = 0;
  std::size_t worst_node = 0;
  bool ok() const { return violations == 0; }
};

/// Discrete check that sigma is subharmonic: -(L sigma)_i >= -threshold at every unknown node.
inline SubharmonicReport check_subharmonic(const DiscreteOperator& op, const ScalarField& sigma,
                                           double threshold = 0.0) {
  if (sigma.size() != op.grid().size()) throw InputError("field does not match the operator grid");
  const auto Ls = op.apply(sigma.values());
  SubharmonicReport r;
  for (std::size_t i : op.unknown_nodes()) {
    const double v = -Ls[i];
    if (v < r.min_laplacian) {
      r.min_laplacian = v;
      r.worst_node = i;
    }
    if (v < -threshold) ++r.violations;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Boundary behaviour.
// ---------------------------------------------------------------------------

struct AsymptoticsOptions {
  std::size_t layers = 4;       // positive y layers used per column
  double exponent_tol = 0.1;    // |exponent + 1| allowed for a Nahm pole
  double alpha_floor = 1e-8;    // columns with |alpha| below this skip the coefficient check
};

struct AsymptoticsReport {
  std::size_t columns = 0;
  double max_exponent_error = 0.0;     // max |exponent + 1|
  double max_coefficient_error = 0.0;  // max |c |alpha| / h0 - 1|
  double mean_exponent = 0.0;
  bool nahm = false;
};

namespace detail {

/// Least-squares slope and intercept of v against x.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& v) {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(x.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) {
    A(static_cast<Eigen::Index>(k), 0) = x[k];
    A(static_cast<Eigen::Index>(k), 1) = 1.0;
    b(static_cast<Eigen::Index>(k)) = v[k];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  return {c(0), c(1)};
}

}  // namespace detail

/// Fits h11 ~ c y^e on the first positive layers of every column; a Nahm pole has e = -1 and c = h0/|alpha|.
inline AsymptoticsReport boundary_asymptotics_check(const HermitianMetric& metric, const HolomorphicHiggs& higgs,
                                                    const AsymptoticsOptions& opt = {}) {
  const GradedGrid& g = *metric.grid();
  const detail::AxesLayout l = detail::layout(g);
  if (opt.layers < 2) throw InputError("asymptotics fit needs at least two layers");
  const Axis& ya = g.axis(l.vertical);
  std::size_t first = 0;
  while (first < ya.size() && !(ya.nodes[first] > 0.0)) ++first;
  if (first + opt.layers > ya.size()) throw InputError("grid has too few positive layers for the fit");
  const std::size_t ny = ya.size();
  const std::size_t stride_y = g.stride(l.vertical);
  AsymptoticsReport rep;
  double sum = 0.0;
  for (std::size_t base = 0; base < g.size(); ++base) {
    if (g.index_along(base, l.vertical) != 0) continue;
    std::vector<double> x, v;
    for (std::size_t k = first; k < first + opt.layers && k < ny; ++k) {
      const std::size_t i = base + k * stride_y;
      x.push_back(std::log(g.y(i)));
      v.push_back(metric.log_h11(i));
    }
    const auto [e, c] = detail::linear_fit(x, v);
    ++rep.columns;
    sum += e;
    rep.max_exponent_error = std::max(rep.max_exponent_error, std::abs(e + 1.0));
    const double a = std::abs(higgs.alpha(g.z(base)));
    if (a > opt.alpha_floor) {
      const double coef = std::exp(c) * a / higgs.h0;
      rep.max_coefficient_error = std::max(rep.max_coefficient_error, std::abs(coef - 1.0));
    }
  }
  rep.mean_exponent = rep.columns ? sum / static_cast<double>(rep.columns) : 0.0;
  rep.nahm = rep.columns > 0 && rep.max_exponent_error <= opt.exponent_tol;
  return rep;
}

struct KnotAsymptoticsOptions {
  double r_min = 0.05, r_max = 0.3;  // window in the distance to the knot
  double psi0 = 0.7853981633974483;  // central polar angle measured from the boundary
  double psi_halfwidth = 0.35;
};

struct KnotAsymptoticsReport {
  double exponent = 0.0;  // fitted b in log(y h11) = a + b log R + quadratic in psi
  double error = 0.0;     // |b + n|
  std::size_t samples = 0;
};

/// Radial exponent of y h11 about a boundary point; a knot of order n gives R^{-n}.
inline KnotAsymptoticsReport knot_asymptotics_check(const HermitianMetric& metric, Complex center, int order,
                                                    const KnotAsymptoticsOptions& opt = {}) {
  const GradedGrid& g = *metric.grid();
  detail::layout(g);
  std::vector<std::array<double, 4>> rows;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = g.y(i);
    if (!(y > 0.0)) continue;
    const double r = std::abs(g.z(i) - center);
    const double R = std::hypot(r, y);
    if (R < opt.r_min || R > opt.r_max) continue;
    const double dpsi = std::atan2(y, r) - opt.psi0;
    if (std::abs(dpsi) > opt.psi_halfwidth) continue;
    rows.push_back({1.0, std::log(R), dpsi, dpsi * dpsi});
    rhs.push_back(std::log(y) + metric.log_h11(i));
  }
  if (rows.size() < 8) throw InputError("too few nodes in the knot fit window");
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), 4);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (int c = 0; c < 4; ++c) A(static_cast<Eigen::Index>(k), c) = rows[k][static_cast<std::size_t>(c)];
    b(static_cast<Eigen::Index>(k)) = rhs[k];
  }
  const Eigen::Vector4d c = A.colPivHouseholderQr().solve(b);
  KnotAsymptoticsReport rep;
  rep.exponent = c(1);
  rep.error = std::abs(c(1) + order);
  rep.samples = rows.size();
  return rep;
}

}  // namespace nahmpole
