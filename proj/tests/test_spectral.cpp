// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "nahmpole/spectral.hpp"

using namespace nahmpole;

namespace {

// Discrete Rayleigh quotient with the same flux and mass weights as the solver.
double rayleigh(const Spectrum& sp, const std::vector<double>& mu) {
  const std::size_t N = sp.psi.size() - 1;
  const double h = sp.psi[1] - sp.psi[0];
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double d = mu[i + 1] - mu[i];
    num += std::cos(sp.psi[i] + 0.5 * h) / h * d * d;
  }
  for (std::size_t i = 1; i <= N; ++i) {
    if (mu[i] == 0.0) continue;
    const double c = std::cos(sp.psi[i]);
    double V = eval_T(sp.n, sp.psi[i], sp.form);
    if (sp.m != 0) V += sp.m * sp.m / (c * c);
    num += V * sp.weights[i] * mu[i] * mu[i];
    den += sp.weights[i] * mu[i] * mu[i];
  }
  return num / den;
}

}  // namespace

TEST(Potential, SpecialValues) {
  for (double psi : {0.1, 0.7, 1.4}) EXPECT_NEAR(eval_T(0, psi), 2.0 / std::pow(std::sin(psi), 2), 1e-12);
  for (int n = 0; n <= 5; ++n) EXPECT_NEAR(1e-4 * 1e-4 * eval_T(n, 1e-4), 2.0, 1e-3);
  for (int n = 1; n <= 4; ++n) EXPECT_NEAR(eval_T(n, kPi / 2), 0.0, 1e-20);
  EXPECT_THROW(eval_T(1, 0.0), InputError);
  EXPECT_NEAR(eval_T(0, 0.5, TForm::Displayed), 0.5 * eval_T(0, 0.5), 1e-14);
}

TEST(Potential, PositiveOnOpenArc) {
  for (int n = 0; n <= 6; ++n) {
    for (int k = 1; k < 200; ++k) EXPECT_GT(eval_T(n, k * (kPi / 2) / 200), 0.0);
  }
}

TEST(Hemisphere, GroundStateForFlatPole) {
  const Spectrum sp = eigen_J(0, 0, 3);
  EXPECT_NEAR(sp.eigenvalues[0], 6.0, 1e-6);
  // mu_0 is proportional to sin^2(psi).
  const auto& mu = sp.functions[0];
  const std::size_t mid = sp.psi.size() / 2;
  const double scale = mu[mid] / std::pow(std::sin(sp.psi[mid]), 2);
  for (std::size_t i = 1; i < sp.psi.size(); i += 37) {
    EXPECT_NEAR(mu[i], scale * std::pow(std::sin(sp.psi[i]), 2), 1e-4 * scale);
  }
}

TEST(Hemisphere, EigenvaluesPositiveAndIncreasing) {
  for (int n = 0; n <= 3; ++n) {
    const Spectrum sp = eigen_J(n, 0, 5);
    for (std::size_t j = 0; j < sp.eigenvalues.size(); ++j) {
      EXPECT_GT(sp.eigenvalues[j], 0.0);
      if (j > 0) {
        EXPECT_GT(sp.eigenvalues[j], sp.eigenvalues[j - 1]);
      }
    }
  }
}

TEST(Hemisphere, GroundStateIncreasesWithMode) {
  for (int n = 0; n <= 2; ++n) {
    double prev = 0.0;
    for (int m = 0; m <= 4; ++m) {
      const double l0 = eigen_J(n, m, 1).eigenvalues[0];
      EXPECT_GT(l0, prev);
      prev = l0;
    }
  }
}

TEST(Hemisphere, RayleighAndOrthogonality) {
  const Spectrum sp = eigen_J(2, 0, 4);
  for (std::size_t a = 0; a < sp.functions.size(); ++a) {
    EXPECT_NEAR(rayleigh(sp, sp.functions[a]), sp.raw[2][a], 1e-8 * sp.raw[2][a]);
    for (std::size_t b = 0; b < sp.functions.size(); ++b) {
      double ip = 0.0;
      for (std::size_t i = 0; i < sp.psi.size(); ++i) ip += sp.weights[i] * sp.functions[a][i] * sp.functions[b][i];
      EXPECT_NEAR(ip, a == b ? 1.0 : 0.0, 1e-8);
    }
  }
}

TEST(Hemisphere, RejectsBadArguments) {
  EXPECT_THROW(eigen_J(0, 0, 21), InputError);
  EXPECT_THROW(eigen_J(0, 0, 2, 32), InputError);
}

TEST(Indicial, RadialRoots) {
  auto [p, q] = indicial_radial(6.0);
  EXPECT_EQ(p, 2.0);
  EXPECT_EQ(q, -3.0);
  std::tie(p, q) = indicial_radial(2.0);
  EXPECT_EQ(p, 1.0);
  EXPECT_EQ(q, -2.0);
  std::tie(p, q) = indicial_radial(0.0);
  EXPECT_EQ(p, 0.0);
  EXPECT_EQ(q, -1.0);
  EXPECT_THROW(indicial_radial(-0.3), InputError);
}

TEST(Indicial, BoundaryRootsAnnihilatePowers) {
  const auto r = indicial_boundary();
  EXPECT_EQ(r[0], 2.0);
  EXPECT_EQ(r[1], -1.0);
  // (-d_y^2 + 2/y^2) y^g = (2 - g(g-1)) y^{g-2}.
  for (double g : r) EXPECT_EQ(2.0 - g * (g - 1.0), 0.0);
  EXPECT_EQ(2.0 - 3.0 * 2.0, -4.0);
}

TEST(Indicial, TableConsistency) {
  const IndicialTable t = indicial_table(eigen_J(1, 0, 4));
  for (std::size_t j = 0; j < t.eigenvalues.size(); ++j) {
    EXPECT_NEAR(t.delta_plus[j] * (t.delta_plus[j] + 1.0), t.eigenvalues[j], 1e-10 * t.eigenvalues[j]);
    if (j > 0) {
      EXPECT_GT(t.delta_plus[j], t.delta_plus[j - 1]);
    }
  }
}

TEST(Hemisphere, GroundStateInterpolant) {
  const GroundState g(eigen_J(1, 0, 1));
  EXPECT_NEAR(g.lambda(), 4.0, 1e-6);
  EXPECT_EQ(g(0.0), 0.0);
  double mx = 0.0;
  for (int k = 0; k <= 100; ++k) mx = std::max(mx, g(k * (kPi / 2) / 100));
  EXPECT_NEAR(mx, 1.0, 1e-3);
}
