#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "expect_error.hpp"
#include "fspde/spde.hpp"
#include "oracles.hpp"

using namespace fspde;

namespace {

FieldFn constant(double c) {
  return [c](std::span<const double>, std::span<double> out) {
    for (double& o : out) o = c;
  };
}

MildSolveConfig single_mode(double dt = 1.0 / 64.0) {
  MildSolveConfig cfg;
  cfg.op = dirichlet_laplacian(1);
  cfg.noise.modes = 1;
  cfg.dt = dt;
  cfg.horizon = 1.0;
  return cfg;
}

}  // namespace

TEST(StepWeights, ClosedForms) {
  const std::vector<double> eig{2.0, 5.0};
  const double h = 0.1;
  const StepWeights w = StepWeights::make(eig, h);
  for (std::size_t k = 0; k < 2; ++k) {
    const double d = std::exp(-eig[k] * h);
    EXPECT_NEAR(w.decay[k], d, 1e-15);
    EXPECT_NEAR(w.drift[k], (1 - d) / eig[k], 1e-15);
    EXPECT_NEAR(w.wiener[k], std::sqrt((1 - d * d) / (2 * eig[k] * h)), 1e-15);
    EXPECT_NEAR(w.path[k], (1 - d) / (eig[k] * h), 1e-15);
  }
  const StepWeights fast = StepWeights::make(eig, h, 10.0);
  EXPECT_NEAR(fast.decay[0], std::exp(-10.0 * 2.0 * h), 1e-15);
  EXPECT_FSPDE_ERROR(StepWeights::make(eig, 0.0), ErrorKind::Domain, "positive");
}

TEST(MildConfig, Validation) {
  MildSolveConfig cfg;
  cfg.dt = 0.3;
  EXPECT_FSPDE_ERROR(cfg.steps(), ErrorKind::Resolution, "integer multiple");
  cfg = {};
  cfg.noise.modes = 2;
  EXPECT_FSPDE_ERROR(cfg.validate(), ErrorKind::Config, "noise modes");
  cfg = {};
  cfg.scheme = "crank-nicolson";
  EXPECT_FSPDE_ERROR(cfg.validate(), ErrorKind::Config, "unknown scheme");
}

TEST(MildSolve, PureDecayIsExact) {
  MildSolveConfig cfg;
  cfg.u0 = {1.0, -0.5, 0.25, 2.0};
  const Path u = solve_mild(cfg, CoefficientSet{}, NoiseSample{});
  for (std::size_t j = 0; j < u.size(); ++j) {
    for (int k = 0; k < 4; ++k) {
      const double exact = std::exp(-oracle::dirichlet(k + 1) * u.time(j)) * cfg.u0[k];
      EXPECT_NEAR(u.value(j, k), exact, 1e-14);
    }
  }
}

TEST(MildSolve, ConstantForcingIsExact) {
  // u' = -l u + a from 0: a (1 - e^{-l t}) / l, reproduced exactly by the scheme.
  MildSolveConfig cfg = single_mode();
  CoefficientSet cs;
  cs.f = constant(3.0);
  const Path u = solve_mild(cfg, cs, NoiseSample{});
  const double l = oracle::dirichlet(1);
  for (std::size_t j = 0; j < u.size(); ++j) {
    EXPECT_NEAR(u.value(j), 3.0 * (1 - std::exp(-l * u.time(j))) / l, 1e-14);
  }
}

TEST(MildSolve, OuVarianceMonteCarlo) {
  MildSolveConfig cfg = single_mode();
  CoefficientSet cs;
  cs.sigma = constant(1.0);
  const auto grid = cfg.grid();
  std::vector<double> sq(3000);
  for (std::size_t r = 0; r < sq.size(); ++r) {
    const Path u = solve_mild(cfg, cs, NoiseSample{sample_wiener(grid, 1, derive_seed(4, {r})), Path()});
    sq[r] = u.value(u.size() - 1) * u.value(u.size() - 1);
  }
  const auto m = oracle::moments(sq);
  EXPECT_LE(std::abs(m.mean - oracle::ou_variance(oracle::dirichlet(1), 1.0)), 4 * m.se);
}

TEST(MildSolve, AdditiveFbmVarianceMonteCarlo) {
  MildSolveConfig cfg = single_mode(1.0 / 128.0);
  cfg.noise.hurst = 0.7;
  CoefficientSet cs;
  cs.g = constant(1.0);
  std::vector<double> sq(3000);
  for (std::size_t r = 0; r < sq.size(); ++r) {
    const NoiseSample n = sample_noise(cfg, derive_seed(6, {r}));
    const Path u = solve_mild(cfg, cs, NoiseSample{Path(), n.fbm});
    sq[r] = u.value(u.size() - 1) * u.value(u.size() - 1);
  }
  const auto m = oracle::moments(sq);
  const double exact = oracle::additive_fbm_variance(0.7, oracle::dirichlet(1), 1.0);
  EXPECT_LE(std::abs(m.mean - exact), 4 * m.se) << m.mean << " vs " << exact;
}

TEST(MildSolve, DeterministicForSeed) {
  MildSolveConfig cfg;
  cfg.u0 = {1, 0, 0, 0};
  CoefficientSet cs;
  cs.sigma = constant(0.3);
  cs.g = [](std::span<const double> u, std::span<double> out) {
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = 0.5 + 0.1 * std::sin(u[i]);
  };
  const Path a = solve_mild(cfg, cs, sample_noise(cfg, 99));
  const Path b = solve_mild(cfg, cs, sample_noise(cfg, 99));
  EXPECT_EQ(a, b);
}

TEST(MildSolve, BlowUpNamesStep) {
  MildSolveConfig cfg = single_mode(0.25);
  cfg.u0 = {10.0};
  CoefficientSet cs;
  cs.f = [](std::span<const double> u, std::span<double> out) { out[0] = u[0] * u[0] * u[0] * u[0]; };
  EXPECT_FSPDE_ERROR(solve_mild(cfg, cs, NoiseSample{}), ErrorKind::BlowUp, "step");
}

TEST(MildSolve, NoiseOnWrongGridRejected) {
  MildSolveConfig cfg = single_mode();
  CoefficientSet cs;
  cs.sigma = constant(1.0);
  const Path w = sample_wiener(uniform_grid(1.0, 33), 1, 1);
  EXPECT_FSPDE_ERROR(solve_mild(cfg, cs, NoiseSample{w, Path()}), ErrorKind::GridMismatch, "grid");
}

TEST(Mollified, ApproachesYoungSolution) {
  MildSolveConfig cfg;
  cfg.dt = 1.0 / 512.0;
  cfg.u0 = {1, 0.5, 0, 0};
  CoefficientSet cs;
  cs.g = [](std::span<const double> u, std::span<double> out) {
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = 0.5 + 0.2 * std::sin(u[i]);
  };
  const NoiseSample n = sample_noise(cfg, 12);
  const Path exact = solve_mild(cfg, cs, NoiseSample{Path(), n.fbm});
  auto dist = [&](double nn) {
    const Path m = solve_mollified(cfg, cs, NoiseSample{Path(), n.fbm}, INFINITY, nn);
    double d = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      for (std::size_t k = 0; k < m.dim(); ++k) d = std::max(d, std::abs(m.value(j, k) - exact.value(j, k)));
    }
    return d;
  };
  EXPECT_LT(dist(128.0), dist(8.0));
}

TEST(Coefficients, LipschitzChecks) {
  CoefficientSet cs;
  cs.f = [](std::span<const double> u, std::span<double> out) {
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::sin(u[i]);
  };
  cs.g = constant(0.5);
  cs.constants.lf = 1.0;
  cs.constants.lg = 0.1;
  cs.constants.c1 = 0.5;
  EXPECT_TRUE(validate_coefficients(cs, 3, 1).pass());
  cs.constants.lf = 0.5;
  const CoefficientReport r = validate_coefficients(cs, 3, 1);
  EXPECT_FALSE(r.pass());
  EXPECT_EQ(r.lines.front().name, "L_f");
  EXPECT_GT(r.lines.front().measured, 0.5);
}

TEST(Convolution, ZeroSigmaGivesZero) {
  const SpectralOperator op = dirichlet_laplacian(2);
  const auto grid = uniform_grid(1.0, 65);
  const Path sigma = Path::hilbert(grid, 2, std::vector<double>(grid.size() * 2, 0.0));
  const Path z = stochastic_convolution_wiener(op, sigma, sample_wiener(grid, 2, 3));
  for (double v : z.data()) EXPECT_EQ(v, 0.0);
}

TEST(KBounds, RatiosFinite) {
  MildSolveConfig cfg;
  cfg.dt = 1.0 / 128.0;
  cfg.u0 = {1, 0.5, 0.25, 0};
  CoefficientSet cs;
  cs.g = [](std::span<const double> u, std::span<double> out) {
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = 0.5 + 0.2 * std::sin(u[i]);
  };
  const NoiseSample n = sample_noise(cfg, 21);
  const Path u = solve_mild(cfg, cs, NoiseSample{Path(), n.fbm});
  const Path v = solve_mild(cfg, cs, NoiseSample{Path(), sample_noise(cfg, 22).fbm});
  const KBoundsReport r = k_bounds_report(cfg.op, u, v, cs.g, n.fbm, 0.4, 0.45, 0.5, 1.0);
  EXPECT_GT(r.lambda, 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(std::isfinite(r.ratio[i]));
  EXPECT_FSPDE_ERROR(k_bounds_report(cfg.op, u, v, cs.g, n.fbm, 0.4, 0.3, 0.5, 1.0), ErrorKind::Domain,
                     "alpha < beta");
}
