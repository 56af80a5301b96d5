#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "expect_error.hpp"
#include "fspde/fbm.hpp"
#include "fspde/mollify.hpp"
#include "oracles.hpp"

using namespace fspde;

namespace {

Path linear(std::size_t points, double slope = 1.0) {
  const auto g = uniform_grid(1.0, points);
  std::vector<double> v;
  for (double t : g) v.push_back(slope * t);
  return Path::scalar(g, v);
}

}  // namespace

TEST(Mollify, LinearPathClosedForm) {
  // n int_{t-1/n}^t s ds = t - 1/(2n) once t >= 1/n, and n t^2 / 2 before.
  const double n = 8.0;
  const Path p = linear(257);
  const Path m = mollify_path(p, n);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double t = p.time(k);
    const double expected = t >= 1.0 / n ? t - 0.5 / n : 0.5 * n * t * t;
    EXPECT_NEAR(m.value(k), expected, 1e-13) << "t = " << t;
  }
}

TEST(Mollify, ConstantReproducedAfterWindow) {
  const auto g = uniform_grid(1.0, 129);
  const Path c = Path::scalar(g, std::vector<double>(g.size(), 3.0));
  const Path m = mollify_path(c, 16.0);
  EXPECT_NEAR(m.value(128), 3.0, 1e-13);
  EXPECT_NEAR(m.value(4), 3.0 * 16.0 * g[4], 1e-13);  // truncated window keeps prefactor n
}

TEST(Mollify, WindowMustSpanTwoSteps) {
  const Path p = linear(17);
  EXPECT_FSPDE_ERROR(mollify_path(p, 16.0), ErrorKind::Resolution, "window");
  EXPECT_FSPDE_ERROR(mollify_path(p, 0.5), ErrorKind::Domain, "n must be >= 1");
}

TEST(Mollify, DerivativeOfLinearPath) {
  const Path p = linear(257, 2.0);
  EXPECT_NEAR(mollified_derivative(p, 8.0, 0.5)[0], 2.0, 1e-13);
  EXPECT_NEAR(mollified_derivative(p, 8.0, 0.0625)[0], 2.0 * 8.0 * 0.0625, 1e-13);
}

TEST(Mollify, InterpolateBetweenNodes) {
  const Path p = linear(5, 4.0);
  EXPECT_NEAR(interpolate(p, 0.3), 1.2, 1e-15);
  EXPECT_FSPDE_ERROR(interpolate(p, 1.5), ErrorKind::Domain, "outside");
}

TEST(Stopping, LinearPathHitsLevel) {
  // One mode l(r) = r: Lambda at t is (1 + 1/alpha) t^alpha sin(pi alpha) / pi.
  const auto g = uniform_grid(1.0, 1025);
  const Path q = Path::hilbert(g, 1, std::vector<double>(g.begin(), g.end()));
  const double alpha = 0.25;
  const double c = 5.0 * std::sin(oracle::pi * alpha) / oracle::pi;
  const double level = 0.5 * c;  // reached at t = 1/16
  const double tau = stopping_time(q, alpha, level, 1.0);
  EXPECT_NEAR(tau, 1.0 / 16.0, 1.0 / 1024.0);
  EXPECT_EQ(stopping_time(q, alpha, 10.0 * c, 1.0), 1.0);
}

TEST(Stopping, StopPathFreezesValue) {
  const Path p = linear(9);
  const Path s = stop_path(p, 0.5);
  EXPECT_EQ(s.value(4), 0.5);
  EXPECT_EQ(s.value(8), 0.5);
  EXPECT_EQ(s.value(2), 0.25);
}

TEST(Rate, LinearPathRateIsAlpha) {
  // Hoelder exponent 1: the error decays like n^{-alpha}.
  const Path p = linear(4097);
  const std::vector<double> ns{8, 16, 32, 64, 128};
  const RateEstimate r = mollify_error_rate(p, 0.35, 1.0, ns);
  EXPECT_NEAR(r.slope, 0.35, 0.05);
  for (std::size_t k = 1; k < r.errors.size(); ++k) EXPECT_LT(r.errors[k], r.errors[k - 1]);
}

TEST(Rate, NeedsThreeValues) {
  const Path p = linear(1025);
  const std::vector<double> ns{8, 16};
  EXPECT_FSPDE_ERROR(mollify_error_rate(p, 0.35, 0.7, ns), ErrorKind::Domain, "three");
}

TEST(DriftBound, DerivativeBelowNormBound) {
  QfbmSpec spec;
  spec.hurst = 0.8;
  const auto grid = uniform_grid(1.0, 1025);
  const double alpha = 0.35;
  for (std::uint64_t s = 0; s < 4; ++s) {
    const Path q = sample_qfbm(spec, grid, derive_seed(17, {s}));
    const StoppedFamily fam = stopped_family(q, alpha, 2.0, 32.0);
    const double tau = fam.tau;
    for (double t : {0.25, 0.5, 1.0}) {
      const DriftBound b = mollified_drift_bound(fam.stopped, alpha, 32.0, t);
      EXPECT_LE(b.lhs, b.norm_rhs * (1 + 1e-12)) << "t = " << t << " tau = " << tau;
      if (b.lambda_rhs > 0) {
        EXPECT_NEAR(b.norm_rhs / b.lambda_rhs, std::tgamma(alpha) * std::tgamma(1 - alpha), 1e-9);
      }
    }
  }
}
