// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "nahmpole/gauge_hermitian.hpp"
#include "nahmpole/model_library.hpp"

using namespace nahmpole;

namespace {

GridPtr axisym(std::size_t n, double R, double y0, double y1, double y_exponent = 1.0) {
  DomainSpec s;
  s.kind = DomainKind::AxisymSlab;
  s.extents = {R};
  s.y_min = y0;
  s.y_max = y1;
  GradingParams gp;
  gp.y_exponent = y_exponent;
  return build_grid(s, {n, n}, gp);
}

GridPtr plane(std::size_t n, double half, double y0, double y1) {
  DomainSpec s;
  s.kind = DomainKind::PlaneHalfSpace;
  s.extents = {half, half};
  s.y_min = y0;
  s.y_max = y1;
  GradingParams gp;
  gp.y_exponent = 1.0;
  return build_grid(s, {n, n, n}, gp);
}

HiggsData monomial(int n) {
  std::vector<std::pair<Complex, int>> roots;
  if (n > 0) roots.push_back({Complex{0.0, 0.0}, n});
  return HiggsData::from_polynomial(Polynomial::from_roots({1.0, 0.0}, roots), {});
}

ScalarField knot_field(const GridPtr& g, int n, Complex c = {0.0, 0.0}) {
  return ScalarField::sample(g, [&](std::size_t i) { return eval_Un(n, std::abs(g->z(i) - c), g->y(i)).value; });
}

double max_in_box(const EbeResidual& r, const ScalarField& f, const GradedGrid& g, double rmax, double ylo,
                  double yhi) {
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!r.valid[i] || std::abs(g.z(i)) > rmax || g.y(i) < ylo || g.y(i) > yhi) continue;
    m = std::max(m, f[i]);
  }
  return m;
}

}  // namespace

TEST(Metric, RejectsNonFiniteScalar) {
  auto g = axisym(8, 1.0, 0.1, 1.0);
  ScalarField u(g, 0.0);
  u[5] = std::nan("");
  EXPECT_THROW(metric_from_scalar(u), InputError);
  EXPECT_THROW(metric_from_scalar(ScalarField(g, 0.0), -1.0), InputError);
}

TEST(Metric, GeneralRejectsNonHermitianAndIndefinite) {
  auto g = axisym(8, 1.0, 0.1, 1.0);
  MatrixField H(g->size(), Mat2::Identity());
  H[3](0, 1) = 0.5;
  EXPECT_THROW(HermitianMetric::general(g, H), InputError);
  H[3] = -Mat2::Identity();
  EXPECT_THROW(HermitianMetric::general(g, H), InputError);
  H[3] = Mat2::Identity();
  EXPECT_NO_THROW(HermitianMetric::general(g, H));
}

TEST(Unitary, NahmPoleTriplet) {
  auto g = axisym(65, 1.0, 0.2, 1.2);
  const auto u = ScalarField::sample(g, [&](std::size_t i) { return -std::log(g->y(i)); });
  const auto T = unitary_triplet(metric_from_scalar(u), HolomorphicHiggs::from_data(monomial(0)));
  EXPECT_TRUE(check_unitarity(T).ok());
  const Complex I{0.0, 1.0};
  std::size_t checked = 0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    if (!T.valid[i]) continue;
    const double y = g->y(i);
    EXPECT_NEAR(std::abs(T.phi_z[i](0, 1) - 1.0 / y), 0.0, 1e-12 / y);
    EXPECT_LT(T.A_z[i].norm(), 1e-13);
    EXPECT_LT(T.A_y[i].norm(), 1e-13);
    EXPECT_NEAR(std::abs(T.phi1[i](0, 0) - I / (2.0 * y)), 0.0, 2e-3 / y);
    EXPECT_NEAR(std::abs(T.phi1[i](1, 1) + I / (2.0 * y)), 0.0, 2e-3 / y);
    ++checked;
  }
  EXPECT_GT(checked, 3000u);
}

TEST(Unitary, KnotFieldsMatchModel) {
  const int n = 2;
  double prev = 0.0;
  for (std::size_t N : {65u, 129u}) {
    auto g = axisym(N, 1.5, 0.1, 1.6);
    const auto T = unitary_triplet(metric_from_scalar(knot_field(g, n)), HolomorphicHiggs::from_data(monomial(n)));
    EXPECT_EQ(T.w_phi_z(0, 1), 2);
    EXPECT_EQ(T.w_phi_zbar(1, 0), -2);
    double phi_err = 0.0, phi1_err = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      if (!T.valid[i]) continue;
      const double r = g->z(i).real(), y = g->y(i);
      if (r < 0.2 || y < 0.2) continue;
      const auto m = eval_model_phi(n, std::hypot(r, y), std::atan2(y, r), 0.0);
      phi_err = std::max(phi_err, std::abs(std::abs(T.phi_z[i](0, 1)) - m.phi_z_abs) / m.phi_z_abs);
      phi1_err = std::max(phi1_err, std::abs(T.phi1[i](0, 0).imag() - m.phi1_diag) / (1.0 + std::abs(m.phi1_diag)));
    }
    EXPECT_LT(phi_err, 1e-12);
    EXPECT_LT(phi1_err, 2e-2);
    if (prev > 0.0) {
      EXPECT_GT(prev / phi1_err, 3.5);
    }
    prev = phi1_err;
  }
}

TEST(Unitary, RejectsUnsupportedData) {
  auto g = axisym(8, 1.0, 0.1, 1.0);
  const auto metric = metric_from_scalar(ScalarField(g, 0.0));
  auto h = HolomorphicHiggs::from_data(monomial(1));
  h.t = [](Complex) { return Complex{0.1, 0.0}; };
  EXPECT_THROW(unitary_triplet(metric, h), InputError);
  const auto shifted = HiggsData::from_polynomial(Polynomial::from_roots({1.0, 0.0}, {{{0.3, 0.0}, 1}}), {});
  EXPECT_THROW(unitary_triplet(metric, HolomorphicHiggs::from_data(shifted)), InputError);
  const auto general = HermitianMetric::general(g, MatrixField(g->size(), Mat2::Identity()));
  EXPECT_THROW(unitary_triplet(general, HolomorphicHiggs::from_data(monomial(1))), InputError);
}

TEST(EbeResidual, AxisymmetricKnotConvergesAtSecondOrder) {
  const int n = 1;
  double prev[3] = {0, 0, 0};
  for (std::size_t N : {33u, 65u, 129u}) {
    auto g = axisym(N, 2.0, 0.25, 2.25);
    const auto T = unitary_triplet(metric_from_scalar(knot_field(g, n)), HolomorphicHiggs::from_data(monomial(n)));
    const auto r = ebe_residual(T, monomial(n));
    const double cur[3] = {max_in_box(r, r.moment, *g, 1.5, 0.5, 1.5), max_in_box(r, r.holomorphic, *g, 1.5, 0.5, 1.5),
                           max_in_box(r, r.parallel, *g, 1.5, 0.5, 1.5)};
    if (prev[0] > 0.0) {
      for (int k = 0; k < 3; ++k) EXPECT_GT(prev[k] / cur[k], 3.2) << "component " << k << " N " << N;
    }
    std::copy(cur, cur + 3, prev);
  }
}

TEST(EbeResidual, CartesianShiftedKnot) {
  const Complex c{0.3, -0.2};
  const auto data = HiggsData::from_polynomial(Polynomial::from_roots({1.0, 0.0}, {{c, 1}}), {});
  double prev = 0.0;
  for (std::size_t N : {17u, 33u}) {
    auto g = plane(N, 1.0, 0.5, 1.5);
    const auto T = unitary_triplet(metric_from_scalar(knot_field(g, 1, c)), HolomorphicHiggs::from_data(data));
    EXPECT_TRUE(check_unitarity(T).ok());
    const auto r = ebe_residual(T, data);
    EXPECT_GT(r.valid_count, 0u);
    const double cur = std::max({max_in_box(r, r.moment, *g, 0.5, 0.75, 1.25),
                                 max_in_box(r, r.holomorphic, *g, 0.5, 0.75, 1.25),
                                 max_in_box(r, r.parallel, *g, 0.5, 0.75, 1.25)});
    if (prev > 0.0) {
      EXPECT_GT(prev / cur, 3.2);
    }
    prev = cur;
  }
}

TEST(EbeResidual, ConstantMetricWithoutHiggsFieldIsFlat) {
  auto g = plane(9, 1.0, 0.5, 1.5);
  auto h = HolomorphicHiggs::from_data(HiggsData::constant(0.0, 0.0, 0.0));
  const auto T = unitary_triplet(metric_from_scalar(ScalarField(g, 0.3)), h);
  const auto r = ebe_residual(T, HiggsData::constant(0.0, 0.0, 0.0));
  EXPECT_LT(std::max({r.max_moment, r.max_holomorphic, r.max_parallel}), 1e-13);
}

TEST(HermitianResidual, DiagonalMatchesScalarResidual) {
  auto g = axisym(24, 1.0, 0.25, 1.25);
  auto data = HiggsData::constant(-0.5, 2.0, 0.3);
  const auto u = ScalarField::sample(g, [&](std::size_t i) { return 0.2 * g->z(i).real() - 0.4 * g->y(i); });
  DiscreteOperator op(g, {});
  const auto expect = scalar_residual(op, data, u.values());
  for (double h0 : {1.0, 2.5}) {
    const auto metric = metric_from_scalar(u, h0);
    const auto higgs = HolomorphicHiggs::from_data(data, h0);
    const auto rd = hermitian_residual(op, metric, higgs, data);
    MatrixField H(g->size());
    for (std::size_t i = 0; i < H.size(); ++i) H[i] = metric(i);
    const auto rg = hermitian_residual(op, HermitianMetric::general(g, H), higgs, data, MetricRepresentation::General);
    for (std::size_t i : op.unknown_nodes()) {
      EXPECT_NEAR(rd.sigma3[i], expect[i], 1e-10 * (1.0 + std::abs(expect[i])));
      EXPECT_NEAR(rg.sigma3[i], expect[i], 1e-9 * (1.0 + std::abs(expect[i])));
      EXPECT_NEAR(rd.norm[i], std::abs(expect[i]), 1e-10 * (1.0 + std::abs(expect[i])));
    }
  }
}

TEST(HermitianResidual, ConstantGaugeTransformOfPoleSolution) {
  auto g = axisym(24, 1.0, 0.25, 1.25);
  const auto data = monomial(0);
  const auto u = ScalarField::sample(g, [&](std::size_t i) { return -std::log(g->y(i)); });
  DiscreteOperator op(g, {});
  const auto higgs = HolomorphicHiggs::from_data(data);
  const auto base = hermitian_residual(op, metric_from_scalar(u), higgs, data);
  // E12 commutes with a unipotent upper-triangular G, so G^* H G solves the same equation.
  Mat2 G = Mat2::Identity();
  G(0, 1) = 0.3;
  MatrixField H(g->size());
  const auto metric = metric_from_scalar(u);
  for (std::size_t i = 0; i < H.size(); ++i) H[i] = G.adjoint() * metric(i) * G;
  const auto moved = hermitian_residual(op, HermitianMetric::general(g, H), higgs, data, MetricRepresentation::General);
  const double cond2 = std::pow(1.35, 2);
  for (std::size_t i : op.unknown_nodes()) EXPECT_LE(moved.norm[i], 2.0 * cond2 * base.norm[i] + 1e-10);
  EXPECT_GT(moved.max_norm, 0.0);
}

TEST(HermitianResidual, IdentityMetricWithoutSource) {
  auto g = plane(9, 1.0, 0.5, 1.5);
  DiscreteOperator op(g, {});
  const auto data = HiggsData::constant(0.0, 0.0, 0.0);
  Mat2 P;
  P << 2.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 1.0;
  const auto r = hermitian_residual(op, HermitianMetric::general(g, MatrixField(g->size(), P)),
                                    HolomorphicHiggs::from_data(data), data, MetricRepresentation::General);
  EXPECT_LT(r.max_norm, 1e-13);
  EXPECT_THROW(hermitian_residual(op, HermitianMetric::general(g, MatrixField(g->size(), P)),
                                  HolomorphicHiggs::from_data(data), data),
               InputError);
}

TEST(Distance, CoshOracle) {
  auto g = axisym(8, 1.0, 0.1, 1.0);
  const auto s = sigma_distance(metric_from_scalar(ScalarField(g, 0.1)), metric_from_scalar(ScalarField(g, 0.0)));
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], 0.020016672223214016, 1e-15);
  // Background factors enter as a shift of u.
  const auto t = sigma_distance(metric_from_scalar(ScalarField(g, 0.0), std::exp(0.1)),
                                metric_from_scalar(ScalarField(g, 0.0)));
  EXPECT_NEAR(t[0], s[0], 1e-15);
}

TEST(Distance, GeneralFormula) {
  auto g = axisym(8, 1.0, 0.1, 1.0);
  const Mat2 H2 = Mat2::Identity();
  Mat2 H1;
  H1 << 2.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 1.0;
  const auto s = sigma_distance(HermitianMetric::general(g, MatrixField(g->size(), H1)),
                                HermitianMetric::general(g, MatrixField(g->size(), H2)));
  // tr H1 = 3, H1^{-1} = [[1, -i], [i, 2]] so tr H1^{-1} = 3.
  EXPECT_NEAR(s[0], 2.0, 1e-14);
  const auto d = sigma_distance(metric_from_scalar(ScalarField(g, 0.4)),
                                HermitianMetric::general(g, MatrixField(g->size(), H2)));
  EXPECT_NEAR(d[0], 4.0 * (std::cosh(0.4) - 1.0), 1e-14);
}

TEST(Distance, TwoPoleSolutionsAreSubharmonic) {
  auto g = plane(17, 1.0, 0.25, 1.25);
  DiscreteOperator op(g, {});
  const auto u1 = ScalarField::sample(g, [&](std::size_t i) { return -std::log(g->y(i)); });
  const auto u2 = ScalarField::sample(g, [&](std::size_t i) { return -std::log(g->y(i) + 0.5); });
  const auto s = sigma_distance(metric_from_scalar(u1), metric_from_scalar(u2));
  const auto rep = check_subharmonic(op, s, 1e-12);
  EXPECT_TRUE(rep.ok());
  EXPECT_GT(rep.min_laplacian, 0.0);
  const auto bad = ScalarField::sample(g, [&](std::size_t i) { return -g->y(i) * g->y(i); });
  const auto brep = check_subharmonic(op, bad, 1e-12);
  EXPECT_GT(brep.violations, 0u);
  EXPECT_NEAR(brep.min_laplacian, -2.0, 1e-9);
}

TEST(Asymptotics, PoleProfileHasUnitExponent) {
  auto g = axisym(24, 1.0, 0.0, 1.0, 3.0);
  const auto data = HiggsData::constant(0.0, 4.0, 0.0);
  const auto u = ScalarField::sample(g, [&](std::size_t i) {
    const double y = g->y(i);
    return y > 0.0 ? -std::log(y) - std::log(2.0) + y * y : 0.0;
  });
  const auto rep = boundary_asymptotics_check(metric_from_scalar(u, 1.5), HolomorphicHiggs::from_data(data, 1.5));
  EXPECT_EQ(rep.columns, 24u);
  EXPECT_TRUE(rep.nahm);
  EXPECT_LT(rep.max_exponent_error, 1e-3);
  EXPECT_LT(rep.max_coefficient_error, 1e-3);
}

TEST(Asymptotics, FlatMetricIsNotNahm) {
  auto g = axisym(16, 1.0, 0.0, 1.0, 2.0);
  const auto rep = boundary_asymptotics_check(metric_from_scalar(ScalarField(g, 0.0)),
                                              HolomorphicHiggs::from_data(monomial(0)));
  EXPECT_FALSE(rep.nahm);
  EXPECT_NEAR(rep.mean_exponent, 0.0, 1e-12);
}

TEST(Asymptotics, KnotExponents) {
  auto g = axisym(96, 1.0, 0.0, 1.0, 1.5);
  for (int n : {1, 2, 3}) {
    const auto u = ScalarField::sample(g, [&](std::size_t i) {
      const double y = g->y(i);
      return y > 0.0 ? eval_Un(n, g->z(i).real(), y).value : 0.0;
    });
    const auto rep = knot_asymptotics_check(metric_from_scalar(u), {0.0, 0.0}, n);
    EXPECT_GT(rep.samples, 20u);
    EXPECT_LT(rep.error, n == 1 ? 1e-10 : 0.05) << "order " << n;
  }
}
