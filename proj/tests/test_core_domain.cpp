// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "nahmpole/core_domain.hpp"

using namespace nahmpole;

namespace {

DomainSpec torus(double lx = 1.0, double l3 = 1.0, double ymax = 4.0) {
  DomainSpec s;
  s.kind = DomainKind::TorusHalfCylinder;
  s.extents = {lx, l3};
  s.y_max = ymax;
  return s;
}

}  // namespace

TEST(Polynomial, FromRootsAndDeflate) {
  const Complex a{0.5, 0.0};
  const Polynomial p = Polynomial::from_roots({2.0, 0.0}, {{a, 2}, {Complex{-1.0, 1.0}, 1}});
  EXPECT_EQ(p.degree(), 3);
  EXPECT_NEAR(std::abs(p(a)), 0.0, 1e-14);
  const Polynomial q = p.deflate(a, 2);
  EXPECT_EQ(q.degree(), 1);
  const Complex z{0.3, -0.7};
  EXPECT_NEAR(std::abs(q(z) * (z - a) * (z - a) - p(z)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(p.derivative()(z) - Complex{2.0, 0.0} * (2.0 * (z - a) * (z - Complex{-1.0, 1.0}) + (z - a) * (z - a))), 0.0, 1e-13);
}

TEST(Grid, TorusShapeAndClasses) {
  auto g = build_grid(torus(), {16, 16, 64});
  EXPECT_EQ(g->size(), 16u * 16u * 64u);
  EXPECT_EQ(g->dimension(), 3u);
  EXPECT_DOUBLE_EQ(g->axis(2).nodes.front(), 0.0);
  EXPECT_DOUBLE_EQ(g->axis(2).nodes.back(), 4.0);
  std::size_t bottom = 0, top = 0, interior = 0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    switch (g->classify(i)) {
      case NodeClass::BottomFace: ++bottom; break;
      case NodeClass::Top: ++top; break;
      case NodeClass::Interior: ++interior; break;
      default: FAIL() << "unexpected class on a torus";
    }
  }
  EXPECT_EQ(bottom, 256u);
  EXPECT_EQ(top, 256u);
  EXPECT_EQ(interior, 256u * 62u);
}

TEST(Grid, YGradingMonotoneAndClusteredAtZero) {
  auto g = build_grid(torus(), {8, 8, 32}, GradingParams{2.0, 1.0, 1.0, true});
  const auto& y = g->axis(2).nodes;
  for (std::size_t k = 1; k < y.size(); ++k) EXPECT_GT(y[k], y[k - 1]);
  EXPECT_LT(y[1] - y[0], y.back() - y[y.size() - 2]);
}

TEST(Grid, RejectsBadInput) {
  EXPECT_THROW(build_grid(torus(), {4, 16, 16}), InputError);
  EXPECT_THROW(build_grid(torus(1, 1, 0.0), {16, 16, 16}), InputError);
  EXPECT_THROW(build_grid(torus(), {16, 16}), InputError);
  DomainSpec s = torus();
  s.knots = {{Complex{2.0, 0.5}, 1}};
  EXPECT_THROW(build_grid(s, {16, 16, 16}), InputError);
  s.knots = {{Complex{0.5, 0.5}, 0}};
  EXPECT_THROW(build_grid(s, {16, 16, 16}), InputError);
  GradingParams gp;
  gp.y_exponent = 5.0;
  EXPECT_THROW(build_grid(torus(), {16, 16, 16}, gp), InputError);
}

TEST(Grid, PlaneFarFieldDegreeChecked) {
  DomainSpec s;
  s.kind = DomainKind::PlaneHalfSpace;
  s.extents = {2.0, 2.0};
  s.y_max = 2.0;
  s.knots = {{Complex{0.0, 0.0}, 2}};
  s.far_field_degree = 1;
  EXPECT_THROW(build_grid(s, {8, 8, 8}), InputError);
  s.far_field_degree = 2;
  EXPECT_NO_THROW(build_grid(s, {8, 8, 8}));
}

TEST(Grid, QuadratureIntegratesPolynomials) {
  auto g = build_grid(torus(2.0, 3.0, 1.0), {8, 8, 64});
  double sum = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) sum += g->quadrature_weight(i) * g->y(i);
  EXPECT_NEAR(sum, 6.0 * 0.5, 1e-12);
  EXPECT_NEAR(g->measure(), 6.0, 1e-14);
}

TEST(Grid, AxisymHasAxisNodes) {
  DomainSpec s;
  s.kind = DomainKind::AxisymSlab;
  s.extents = {3.0};
  s.y_max = 3.0;
  auto g = build_grid(s, {16, 16});
  EXPECT_EQ(g->classify(g->flat(std::vector<std::size_t>{0, 5})), NodeClass::Axis);
  EXPECT_FALSE(g->is_dirichlet(g->flat(std::vector<std::size_t>{0, 5})));
  EXPECT_EQ(g->classify(g->flat(std::vector<std::size_t>{15, 5})), NodeClass::Lateral);
}

TEST(Spherical, CoordinatesAndSingularity) {
  const KnotPoint k{Complex{1.0, 0.0}, 1};
  const auto c = spherical_coords(Complex{1.0, 1.0}, 1.0, k);
  EXPECT_NEAR(c.R, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(c.psi, kPi / 4, 1e-15);
  EXPECT_NEAR(c.theta, kPi / 2, 1e-15);
  EXPECT_THROW(spherical_coords(Complex{1.0, 0.0}, 0.0, k), InputError);
  EXPECT_THROW(spherical_coords(Complex{1.0, 0.0}, -1.0, k), InputError);
}

TEST(Norms, InteriorSkipsBoundary) {
  auto g = build_grid(torus(), {8, 8, 16});
  ScalarField f(g, 0.0);
  for (std::size_t i = 0; i < g->size(); ++i) f[i] = g->is_dirichlet(i) ? 100.0 : 1.0;
  EXPECT_DOUBLE_EQ(field_norms(f, Region::Interior).linf, 1.0);
  EXPECT_DOUBLE_EQ(field_norms(f, Region::All).linf, 100.0);
}

TEST(Solvability, WarnsOnPositiveMeanK) {
  DomainSpec s;
  s.kind = DomainKind::LimitSurface;
  s.extents = {1.0, 1.0};
  auto g = build_grid(s, {8, 8});
  EXPECT_FALSE(solvability_warning(*g, HiggsData::constant(1.0, 1.0, 0.0)).empty());
  EXPECT_TRUE(solvability_warning(*g, HiggsData::constant(-1.0, 1.0, 0.0)).empty());
}
