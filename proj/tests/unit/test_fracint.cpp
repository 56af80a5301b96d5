#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "expect_error.hpp"
#include "fspde/fbm.hpp"
#include "fspde/fracint.hpp"
#include "oracles.hpp"

using namespace fspde;

namespace {

Path from_fn(std::size_t points, double (*f)(double)) {
  const auto g = uniform_grid(1.0, points);
  std::vector<double> v;
  for (double t : g) v.push_back(f(t));
  return Path::scalar(g, v);
}

double ident(double t) { return t; }
double square(double t) { return t * t; }
double constant(double) { return 2.0; }

}  // namespace

TEST(Exponents, DefaultsAreAdmissible) {
  for (double H : {0.55, 0.7, 0.9}) {
    const FracExponents e = FracExponents::defaults(H);
    EXPECT_NO_THROW(e.validate(H));
    EXPECT_GT(e.alpha, 1.0 - H);
    EXPECT_LT(e.alpha, 0.5);
    EXPECT_GT(e.holder, 1.0 - e.alpha);
    EXPECT_LT(e.holder, H);
  }
  FracExponents bad = FracExponents::defaults(0.7);
  bad.alpha = 0.2;
  EXPECT_FSPDE_ERROR(bad.validate(0.7), ErrorKind::Domain, "alpha");
}

TEST(Weyl, LeftDerivativeOfIdentity) {
  // D^alpha r at t = 1 is 1 / Gamma(2 - alpha); at alpha = 0.3 that is 1.10054...
  const Path h = from_fn(4097, ident);
  EXPECT_NEAR(weyl_left_derivative(h, 0.3, 0.0, 1.0), 1.0 / std::tgamma(1.7), 1e-10);
  EXPECT_NEAR(1.0 / std::tgamma(1.7), 1.10054, 1e-5);
}

TEST(Weyl, RightDerivativeOfIdentity) {
  // Folded sign: +(c - t)^alpha / Gamma(1 + alpha) with alpha = 1 - order.
  const Path l = from_fn(4097, ident);
  const double order = 0.6, alpha = 0.4;
  EXPECT_NEAR(weyl_right_derivative(l, order, 1.0, 0.25),
              std::pow(0.75, alpha) / std::tgamma(1.0 + alpha), 1e-10);
}

TEST(Weyl, RequiresOrderedEndpoints) {
  const Path h = from_fn(17, ident);
  EXPECT_FSPDE_ERROR(weyl_left_derivative(h, 0.3, 0.5, 0.5), ErrorKind::Domain, "a < t");
  EXPECT_FSPDE_ERROR(weyl_right_derivative(h, 0.3, 0.5, 0.75), ErrorKind::Domain, "t < c");
}

TEST(Stieltjes, ClassicalPolynomialOracle) {
  // int_0^1 r d(r^2) = 2/3.
  const Path h = from_fn(2048, ident), l = from_fn(2048, square);
  EXPECT_NEAR(stieltjes_integral(h, l, 0.4, 0.0, 1.0), 2.0 / 3.0, 1e-3);
  // int_0^1 r dr = 1/2.
  EXPECT_NEAR(stieltjes_integral(h, h, 0.4, 0.0, 1.0), 0.5, 1e-3);
}

TEST(Stieltjes, ConstantIntegrandGivesIncrement) {
  const Path h = from_fn(1025, constant), l = from_fn(1025, square);
  // int_{1/4}^{3/4} 2 d(r^2) = 2 (9/16 - 1/16) = 1.
  EXPECT_NEAR(stieltjes_integral(h, l, 0.4, 0.25, 0.75), 1.0, 1e-3);
}

TEST(Stieltjes, CrucialInequalityOnFbm) {
  const auto grid = uniform_grid(1.0, 257);
  const double alpha = 0.4;
  for (std::uint64_t k = 0; k < 5; ++k) {
    const Path h = sample_fbm_1d(0.7, grid, derive_seed(1, {k})).path;
    const Path l = sample_fbm_1d(0.7, grid, derive_seed(2, {k})).path;
    const double lhs = std::abs(stieltjes_integral(h, l, alpha, 0.0, 1.0));
    const double rhs = lambda_alpha_norm(l, alpha, 0.0, 1.0).lambda_alpha * walpha1_seminorm(h, alpha);
    EXPECT_LE(lhs, rhs);
  }
}

TEST(Stieltjes, GridMismatchRejected) {
  const Path h = from_fn(17, ident), l = from_fn(33, ident);
  EXPECT_FSPDE_ERROR(stieltjes_integral(h, l, 0.4, 0.0, 1.0), ErrorKind::GridMismatch, "grids");
}

TEST(FracNorms, Walpha1OfConstant) {
  // Only the |h(s)| s^{-alpha} part survives: c T^{1-alpha} / (1-alpha).
  const Path h = from_fn(257, constant);
  EXPECT_NEAR(walpha1_seminorm(h, 0.3), 2.0 / 0.7, 1e-12);
}

TEST(FracNorms, AlphaNormAtOfIdentity) {
  // t + int_0^t (t-s)^{-alpha} ds = t + t^{1-alpha} / (1-alpha).
  const Path h = from_fn(513, ident);
  const double a = 0.3, t = 0.5;
  EXPECT_NEAR(alpha_norm_at(h, a, t), t + std::pow(t, 1 - a) / (1 - a), 1e-12);
}

TEST(FracNorms, Balpha2OfIdentity) {
  // sup |h| = 1 and int_0^1 (t^{1-a}/(1-a))^2 dt = 1 / ((1-a)^2 (3-2a)).
  const Path h = from_fn(4097, ident);
  const double a = 0.3;
  const double expected = std::sqrt(1.0 + 1.0 / ((1 - a) * (1 - a) * (3 - 2 * a)));
  EXPECT_NEAR(balpha2_norm(h, a), expected, 1e-6);
}

TEST(KernelLemmas, BetaKernelBoundHolds) {
  for (double r : {0.1, 0.5, 0.9}) {
    const double lhs = beta_kernel_integral(0.4, 0.8, r, 1.0);
    const double rhs = beta_kernel_bound(0.4, 0.8, r, 1.0);
    EXPECT_LE(lhs, rhs * (1 + 1e-12));
    EXPECT_GT(lhs, 0.0);
  }
  EXPECT_FSPDE_ERROR(beta_kernel_bound(0.4, 0.5, 0.5, 1.0), ErrorKind::Domain, "a + d > 1");
}

TEST(KernelLemmas, RhoRatioStaysBounded) {
  double prev = INFINITY;
  for (double rho : {10.0, 100.0, 1000.0}) {
    const double v = rho_kernel_ratio(0.3, 0.2, 1.0, rho);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_LT(v, 10.0);
    prev = v;
  }
  // Large rho: the integral behaves like Gamma(1 - a) rho^{a-1} t^{-d}.
  EXPECT_NEAR(prev, std::tgamma(0.7) * std::pow(1000.0, -0.2), 0.02);
}
