#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "driftscope/diffusion.hpp"
#include "driftscope/error.hpp"
#include "oracles.hpp"

using namespace driftscope;

TEST(GaussianKernel, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(gaussian_kernel({0.3, -1}, 1.0, {0.3, -1}), 1.0 / (2 * std::numbers::pi));
  EXPECT_DOUBLE_EQ(gaussian_kernel({0, 0}, 1.0, {1, 1}), std::exp(-1.0) / (2 * std::numbers::pi));
  EXPECT_THROW(gaussian_kernel({0, 0}, 0.0, {1, 1}), DomainError);
  EXPECT_THROW(gaussian_kernel({0, 0}, -1.0, {1, 1}), DomainError);
}

TEST(GaussianKernel, SymmetricInEndpoints) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 50; ++i) {
    const Vec2 x{u(rng), u(rng)}, y{u(rng), u(rng)};
    EXPECT_EQ(gaussian_kernel(x, 0.3, y), gaussian_kernel(y, 0.3, x));
  }
}

TEST(GaussianKernel, IntegratesToOne) {
  const Grid g = Grid::covering({-4, -4}, {4, 4}, 321, 321);
  const auto p = sample_scalar([](Vec2 y) { return gaussian_kernel({0.1, -0.2}, 0.5, y); }, g);
  EXPECT_NEAR(field_mass(p), 1.0, 1e-6);
}

TEST(OuKernel, ClosedFormAtOrigin) {
  const double s2 = (1.0 - std::exp(-2.0)) / 2.0;
  EXPECT_NEAR(ou_kernel({0, 0}, 1.0, {0, 0}, 1.0), 1.0 / (2 * std::numbers::pi * s2), 1e-15);
}

TEST(OuKernel, LargeTimeApproachesStationaryDensity) {
  const double theta = 0.7;
  const double s2 = 1.0 / (2.0 * theta);
  for (Vec2 y : {Vec2{0, 0}, Vec2{0.5, -1.0}}) {
    const double stationary = std::exp(-norm2(y) / (2 * s2)) / (2 * std::numbers::pi * s2);
    EXPECT_NEAR(ou_kernel({2.0, 1.0}, 40.0, y, theta) / stationary, 1.0, 1e-10);
  }
}

TEST(OuKernel, SmallRateApproachesBrownian) {
  const Vec2 x{0.4, -0.3}, y{-0.2, 0.5};
  double prev = INFINITY;
  for (double theta : {1e-1, 1e-2, 1e-3}) {
    const double rel = std::abs(ou_kernel(x, 0.5, y, theta) / gaussian_kernel(x, 0.5, y) - 1.0);
    EXPECT_LT(rel, 2.0 * theta * 0.5);
    EXPECT_LT(rel, prev);
    prev = rel;
  }
}

TEST(OuKernel, MatchesIndependentOracle) {
  EXPECT_NEAR(ou_kernel({1, 0}, 0.1, {0.8, 0.2}, 1.0), oracle::ou_density(1, 0, 0.1, 0.8, 0.2, 1.0), 1e-13);
  EXPECT_NEAR(log_ou_kernel({1, 0}, 0.0025, {0.9, 0.05}, 1.0),
              std::log(oracle::ou_density(1, 0, 0.0025, 0.9, 0.05, 1.0)), 1e-12);
}

TEST(OuKernel, RejectsNonpositiveArguments) {
  EXPECT_THROW(ou_kernel({0, 0}, 1.0, {0, 0}, 0.0), DomainError);
  EXPECT_THROW(ou_kernel({0, 0}, 1.0, {0, 0}, -1.0), DomainError);
  EXPECT_THROW(ou_kernel({0, 0}, 0.0, {0, 0}, 1.0), DomainError);
}

TEST(KernelSpec, BrownianValueIsTheClosedFormBitwise) {
  const KernelSpec k(BrownianKernel{});
  EXPECT_EQ(k.value({0.1, 0.2}, 0.3, {-0.4, 0.5}), gaussian_kernel({0.1, 0.2}, 0.3, {-0.4, 0.5}));
  const auto d = k.density({1, 0}, 0.0025, {-1, 0});
  ASSERT_TRUE(d);
  EXPECT_NEAR(d->log(), log_gaussian_kernel({1, 0}, 0.0025, {-1, 0}), 1e-12);
  EXPECT_FALSE(d->linear_scale());
}

TEST(KernelSpec, ProductOfOneDimensionalOuIsTwoDimensionalOu) {
  const KernelSpec prod(ProductKernel{Ou1D{1.0}, Ou1D{1.0}});
  const KernelSpec ou(OuKernel{1.0});
  for (double t : {0.0025, 0.1, 1.0}) {
    const Vec2 x{0.3, -0.9}, y{-0.5, 0.4};
    EXPECT_NEAR(prod.density(x, t, y)->log(), ou.density(x, t, y)->log(), 1e-12);
  }
}

TEST(KernelSpec, ProductOfBrownianIsBrownian) {
  const KernelSpec prod(ProductKernel{Brownian1D{}, Brownian1D{}});
  EXPECT_NEAR(prod.value({0, 1}, 0.2, {0.5, 0.3}), gaussian_kernel({0, 1}, 0.2, {0.5, 0.3}), 1e-15);
}

TEST(KernelSpec, TabulatedLooksUpSourceAndTime) {
  const Grid g = Grid::covering({-3, -3}, {3, 3}, 121, 121);
  const auto slice = sample_scalar([](Vec2 y) { return gaussian_kernel({0, 0}, 0.5, y); }, g);
  const KernelSpec k(TabulatedKernel{{TabulatedSource{{0, 0}, {0.5}, {slice}}}, 1e-9});
  const Vec2 y{0.37, -0.21};
  const auto d = k.density({0, 0}, 0.5, y);
  ASSERT_TRUE(d);
  EXPECT_TRUE(d->linear_scale());
  EXPECT_NEAR(d->linear(), interp(slice, y), 1e-15);
  EXPECT_THROW(k.density({0.5, 0}, 0.5, y), DataError);
  EXPECT_THROW(k.density({0, 0}, 0.4, y), DataError);
  EXPECT_THROW(k.density({0, 0}, 0.5, {5, 0}), DataError);
}

TEST(KernelSpec, TabulatedRejectsNegativeAndExcessMass) {
  const Grid g = Grid::covering({-1, -1}, {1, 1}, 11, 11);
  std::vector<double> neg(g.size(), 0.0);
  neg[3] = -1e-3;
  EXPECT_THROW(KernelSpec(TabulatedKernel{{TabulatedSource{{0, 0}, {0.1}, {ScalarField(g, neg)}}}}), DataError);
  const auto heavy = sample_scalar([](Vec2) { return 1.0; }, g);  // mass 4
  EXPECT_THROW(KernelSpec(TabulatedKernel{{TabulatedSource{{0, 0}, {0.1}, {heavy}}}}), DataError);
}

TEST(KernelSpec, TabulatedZeroValueIsNotADensity) {
  const Grid g = Grid::covering({-1, -1}, {1, 1}, 11, 11);
  const KernelSpec k(TabulatedKernel{{TabulatedSource{{0, 0}, {0.1}, {ScalarField::zeros(g)}}}});
  EXPECT_FALSE(k.density({0, 0}, 0.1, {0.2, 0.2}));
}
