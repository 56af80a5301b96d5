#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "expect_error.hpp"
#include "fspde/fastslow.hpp"
#include "oracles.hpp"

using namespace fspde;

namespace {

const ConditionLine* find_line(const ConditionReport& r, const std::string& prefix) {
  for (const auto& l : r.lines) {
    if (l.condition.rfind(prefix, 0) == 0) return &l;
  }
  return nullptr;
}

std::vector<std::string> failed(const ConditionReport& r) {
  std::vector<std::string> out;
  for (const auto& l : r.lines) {
    if (!l.pass) out.push_back(l.condition);
  }
  return out;
}

ValidationBudget small_budget() {
  ValidationBudget b;
  b.pairs = 1000;
  return b;
}

FastSlowConfig quick_config(const LinearTestSystem& sys, double eps) {
  FastSlowConfig cfg = sys.config;
  cfg.eps = eps;
  cfg.dt = 1.0 / 32.0;
  cfg.c_sub = 0.2;
  cfg.replicates = 4;
  return cfg;
}

}  // namespace

TEST(Conditions, ThresholdValue) {
  const double l1 = oracle::pi * oracle::pi;
  EXPECT_NEAR(c3_threshold(l1), oracle::c3_limit(l1), 1e-12);
  EXPECT_NEAR(c3_threshold(l1), 16.412, 2e-3);
}

TEST(Conditions, LinearSystemAccepted) {
  const LinearTestSystem sys = linear_test_system(4);
  const ConditionReport r = validate_conditions(sys.coeffs, sys.params, sys.config.op, small_budget());
  EXPECT_TRUE(r.pass()) << r.text();
  EXPECT_NO_THROW(r.require());
  const double l1 = oracle::dirichlet(1);
  EXPECT_NEAR(sys.params.eta(l1), 2 * l1 + 2 - 2, 1e-12);
}

TEST(Conditions, EtaRejected) {
  LinearTestSystem sys = linear_test_system(4);
  sys.params.beta3 = sys.config.op.lowest();
  const ConditionReport r = validate_conditions(sys.coeffs, sys.params, sys.config.op, small_budget());
  EXPECT_EQ(failed(r), std::vector<std::string>{"(A5) eta"});
  const ConditionLine* l = find_line(r, "(A5) eta");
  ASSERT_NE(l, nullptr);
  EXPECT_NE(l->detail.find("eta = 2*lambda_1 - 2*beta_3 - C_2 = -2"), std::string::npos) << l->detail;
  EXPECT_NE(l->detail.find("must be > 0"), std::string::npos);
  EXPECT_FSPDE_ERROR(r.require(), ErrorKind::Condition, "(A5) eta");
}

TEST(Conditions, KappaRejected) {
  LinearTestSystem sys = linear_test_system(4);
  sys.params.c3 = 21.5;  // above 2 lambda_1 + 2 beta_1 = 2 pi^2 + 1
  const ConditionReport r = validate_conditions(sys.coeffs, sys.params, sys.config.op, small_budget());
  const auto f = failed(r);
  EXPECT_EQ(f, (std::vector<std::string>{"(A5) kappa", "(Thm) C_3 threshold"}));
  EXPECT_NE(find_line(r, "(A5) kappa")->detail.find("<= 0, must be > 0"), std::string::npos);
}

TEST(Conditions, ThresholdRejectedAlone) {
  LinearTestSystem sys = linear_test_system(4);
  sys.params.c3 = 17.0;
  const ConditionReport r = validate_conditions(sys.coeffs, sys.params, sys.config.op, small_budget());
  EXPECT_EQ(failed(r), std::vector<std::string>{"(Thm) C_3 threshold"});
  const std::string& d = find_line(r, "(Thm) C_3 threshold")->detail;
  EXPECT_NE(d.find("C_3 = 17 >= 2*lambda_1^2/(2+lambda_1) = 16.41"), std::string::npos) << d;
}

TEST(Conditions, BoundedFastSkipsThresholdOnlyWhenProbeAgrees) {
  LinearTestSystem sys = linear_test_system(2);
  sys.params.c3 = 17.0;
  sys.coeffs.bounded_fast = true;  // F = d(x) - y is not bounded: the probe disagrees
  ConditionReport r = validate_conditions(sys.coeffs, sys.params, sys.config.op, small_budget());
  EXPECT_FALSE(find_line(r, "(Thm) C_3 threshold")->pass);

  sys.coeffs.F = [](std::span<const double> x, std::span<const double> y, std::span<double> out) {
    for (std::size_t k = 0; k < y.size(); ++k) out[k] = 0.5 + 0.25 * std::sin(x[k]) - std::tanh(y[k]);
  };
  r = validate_conditions(sys.coeffs, sys.params, sys.config.op, small_budget());
  const ConditionLine* l = find_line(r, "(Thm) C_3 threshold");
  EXPECT_TRUE(l->pass);
  EXPECT_NE(l->detail.find("skipped"), std::string::npos);
}

TEST(Conditions, UnderstatedLipschitzConstantCaught) {
  LinearTestSystem sys = linear_test_system(2);
  sys.params.c1 = 0.5;  // b(x, y) = y has Lipschitz constant 1
  const ConditionReport r = validate_conditions(sys.coeffs, sys.params, sys.config.op, small_budget());
  EXPECT_FALSE(find_line(r, "(A1) b Lipschitz")->pass);
}

TEST(FastSlowConfig, DerivedQuantities) {
  FastSlowConfig cfg;
  cfg.eps = 0.05;
  EXPECT_NEAR(cfg.effective_delta(), 0.05 * std::sqrt(-std::log(0.05)), 1e-15);
  cfg.c_sub = 0.1;
  EXPECT_EQ(cfg.substeps(), 200u);
  EXPECT_EQ(cfg.steps(), 128u);
  cfg.eps = 1e-9;
  EXPECT_FSPDE_ERROR(cfg.substeps(), ErrorKind::Resolution, "below the floor");
  cfg.eps = 1.5;
  EXPECT_FSPDE_ERROR(cfg.validate(), ErrorKind::Config, "eps");
}

TEST(AnalyticBbar, SingleModeValue) {
  const SpectralOperator op = dirichlet_laplacian(1);
  LinearFastSpec fast;
  fast.c = 1.0;
  fast.d = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  fast.g_diag = {0.5};
  LinearDriftSpec drift;
  drift.b_diag = {1.0};
  const auto v = analytic_bbar_linear(std::vector<double>{0.0}, op, fast, drift);
  EXPECT_NEAR(v[0], 1.0 / (oracle::pi * oracle::pi + 1.0), 1e-15);
  EXPECT_NEAR(v[0], 0.09199, 1e-5);
}

TEST(AnalyticBbar, LinearSystemModes) {
  const LinearTestSystem sys = linear_test_system(4);
  const auto x = sys.config.initial_x();
  std::vector<double> out(4);
  sys.bbar(x, out);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(out[k], oracle::linear_bbar(k, x[k]), 1e-15);
  EXPECT_NEAR(x[1], 0.5, 0.0);
}

TEST(InvariantDrift, TimeAverageMatchesClosedForm) {
  const LinearTestSystem sys = linear_test_system(2);
  const auto x = sys.config.initial_x();
  InvariantBudget b;
  b.horizon = 2000.0;
  b.rel_tolerance = 0.05;
  const InvariantMeasureEstimate e =
      estimate_invariant_drift(x, sys.config.op, sys.coeffs, sys.params, b);
  for (int k = 0; k < 2; ++k) {
    EXPECT_LE(std::abs(e.bbar[k] - oracle::linear_bbar(k, x[k])), 4.0 * e.se[k]) << "mode " << k;
  }
  EXPECT_EQ(e.method, "time-average");
}

TEST(InvariantDrift, BurnInAndBudgetErrors) {
  const LinearTestSystem sys = linear_test_system(2);
  const auto x = sys.config.initial_x();
  InvariantBudget b;
  b.horizon = 50.0;
  b.burn_in = 0.01;
  EXPECT_FSPDE_ERROR(estimate_invariant_drift(x, sys.config.op, sys.coeffs, sys.params, b),
                     ErrorKind::Domain, "5/eta");
  b.burn_in = 0.0;
  b.rel_tolerance = 1e-6;
  EXPECT_FSPDE_ERROR(estimate_invariant_drift(x, sys.config.op, sys.coeffs, sys.params, b),
                     ErrorKind::Budget, "relative SE");
}

TEST(Tabulated, InterpolatesAndGuardsDomain) {
  const TabulatedBbar t({0.0, 1.0, 2.0}, {{0.0, 1.0, 4.0}});
  std::vector<double> out(1);
  t(std::vector<double>{1.5}, out);
  EXPECT_NEAR(out[0], 2.5, 1e-15);
  EXPECT_FSPDE_ERROR(t(std::vector<double>{2.5}, out), ErrorKind::Domain, "domain exceeded");
}

TEST(FastSlow, NoiseAndPathsDeterministic) {
  const LinearTestSystem sys = linear_test_system(4);
  const FastSlowConfig cfg = quick_config(sys, 0.1);
  const ReplicateNoise a = replicate_noise(cfg, 5), b = replicate_noise(cfg, 5), c = replicate_noise(cfg, 6);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_NE(a.digest(), c.digest());
  const FastSlowPath p = solve_fastslow(cfg, sys.coeffs, a);
  const FastSlowPath q = solve_fastslow(cfg, sys.coeffs, b);
  EXPECT_EQ(p.x, q.x);
  EXPECT_EQ(p.y, q.y);
  EXPECT_EQ(p.noise_digest, a.digest());
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(p.x.value(0, k), 1.0 / static_cast<double>(k + 1));
}

TEST(FastSlow, SlowDriftIndependentOfFastMatchesAveraged) {
  // With b depending on x only, the slow equation is the averaged one.
  LinearTestSystem sys = linear_test_system(4);
  sys.coeffs.b = [](std::span<const double> x, std::span<const double>, std::span<double> out) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = -0.3 * x[k];
  };
  const BbarProvider bbar = [](std::span<const double> x, std::span<double> out) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = -0.3 * x[k];
  };
  const FastSlowConfig cfg = quick_config(sys, 0.05);
  const ReplicateNoise n = replicate_noise(cfg, 8);
  const FastSlowPath p = solve_fastslow(cfg, sys.coeffs, n);
  const Path xbar = solve_averaged(cfg, sys.coeffs.g, bbar, n.fbm);
  for (std::size_t j = 0; j < xbar.size(); ++j) {
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(p.x.value(j, k), xbar.value(j, k), 1e-12);
  }
}

TEST(Khasminskii, ResetAtBreakpoints) {
  const LinearTestSystem sys = linear_test_system(2);
  const FastSlowConfig cfg = quick_config(sys, 0.1);
  const ReplicateNoise n = replicate_noise(cfg, 3);
  const FastSlowPath p = solve_fastslow(cfg, sys.coeffs, n);
  const double delta = 4.0 * cfg.dt;
  const KhasminskiiPath k = khasminskii_auxiliary(cfg, sys.coeffs, n, p, delta);
  ASSERT_FALSE(k.breakpoints.empty());
  EXPECT_EQ(k.breakpoints.front(), 0u);
  for (std::size_t j : k.breakpoints) {
    EXPECT_EQ(j % 4, 0u);
    for (std::size_t m = 0; m < 2; ++m) EXPECT_EQ(k.y_hat.value(j, m), p.y.value(j, m));
  }
  EXPECT_FSPDE_ERROR(khasminskii_auxiliary(cfg, sys.coeffs, n, p, 1.5 * cfg.dt),
                     ErrorKind::Resolution, "integer multiple");
}

TEST(Averaging, ErrorEstimateShape) {
  const LinearTestSystem sys = linear_test_system(2);
  const FastSlowConfig cfg = quick_config(sys, 0.1);
  const AveragingError e1 = averaging_error(cfg, sys.coeffs, sys.bbar, 1);
  const AveragingError e3 = averaging_error(cfg, sys.coeffs, sys.bbar, 3);
  EXPECT_EQ(e1.samples.size(), 4u);
  EXPECT_TRUE(e1.coupling_ok);
  EXPECT_GT(e1.error.mean, 0.0);
  EXPECT_EQ(e1.samples, e3.samples);
  EXPECT_NEAR(e1.delta, 0.1 * std::sqrt(-std::log(0.1)), 1e-15);
}

TEST(Averaging, ReplicateErrorCarriesContext) {
  LinearTestSystem sys = linear_test_system(1);
  sys.coeffs.F = [](std::span<const double>, std::span<const double> y, std::span<double> out) {
    out[0] = 10.0 + y[0] * y[0] * y[0] * y[0];
  };
  const FastSlowConfig cfg = quick_config(sys, 0.1);
  try {
    averaging_error(cfg, sys.coeffs, sys.bbar, 2);
    ADD_FAILURE() << "expected a blow-up";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BlowUp);
    const std::string w = e.what();
    EXPECT_NE(w.find("eps = 0.1, replicate "), std::string::npos) << w;
    EXPECT_NE(w.find("blew up"), std::string::npos) << w;
  }
}

TEST(Averaging, StudyNeedsDecreasingEps) {
  const LinearTestSystem sys = linear_test_system(2);
  const FastSlowConfig cfg = quick_config(sys, 0.1);
  const std::vector<double> two{0.1, 0.05}, unordered{0.1, 0.2, 0.05};
  EXPECT_FSPDE_ERROR(averaging_study(cfg, sys.coeffs, sys.bbar, two), ErrorKind::Domain, "three");
  EXPECT_FSPDE_ERROR(averaging_study(cfg, sys.coeffs, sys.bbar, unordered), ErrorKind::Domain,
                     "decreasing");
}

namespace {

FastSlowCoefficients zero_coefficients() {
  FastSlowCoefficients c;
  c.b = [](std::span<const double>, std::span<const double>, std::span<double> o) {
    for (double& v : o) v = 0.0;
  };
  c.F = c.b;
  c.G = c.b;
  c.g = [](std::span<const double>, std::span<double> o) {
    for (double& v : o) v = 0.0;
  };
  return c;
}

}  // namespace

TEST(FastSlow, ZeroCoefficientsArePureDecay) {
  LinearTestSystem sys = linear_test_system(2);
  FastSlowConfig cfg = quick_config(sys, 0.1);
  cfg.y0 = {1.0, -1.0};
  const FastSlowPath p = solve_fastslow(cfg, zero_coefficients(), replicate_noise(cfg, 1));
  for (std::size_t j = 0; j < p.x.size(); ++j) {
    const double t = p.x.time(j);
    for (int k = 0; k < 2; ++k) {
      const double l = oracle::dirichlet(k + 1);
      EXPECT_NEAR(p.x.value(j, k), std::exp(-l * t) * cfg.x0[k], 1e-14);
      EXPECT_NEAR(p.y.value(j, k), std::exp(-l * t / cfg.eps) * cfg.y0[k], 1e-14);
    }
  }
}

TEST(Frozen, ZeroCoefficientsArePureDecay) {
  const SpectralOperator op = dirichlet_laplacian(2);
  const std::vector<double> x{0.0, 0.0}, y0{1.0, 2.0};
  const Path y = solve_frozen(op, zero_coefficients(), x, y0, 0.2, 0.01, 3);
  for (std::size_t j = 0; j < y.size(); ++j) {
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(y.value(j, k), std::exp(-oracle::dirichlet(k + 1) * y.time(j)) * y0[k], 1e-14);
    }
  }
}

TEST(FastSlow, FastOuStationaryVarianceIndependentOfEps) {
  // F = -y, G = 0.5, single mode: E|Y|^2 -> G^2 / (2 (lambda_1 + 1)).
  LinearTestSystem sys = linear_test_system(1);
  sys.coeffs.F = [](std::span<const double>, std::span<const double> y, std::span<double> o) {
    o[0] = -y[0];
  };
  const double exact = 0.25 / (2.0 * (oracle::dirichlet(1) + 1.0));
  std::vector<double> means;
  for (double eps : {0.1, 0.02}) {
    FastSlowConfig cfg = quick_config(sys, eps);
    std::vector<double> sq(800);
    for (std::size_t r = 0; r < sq.size(); ++r) {
      const FastSlowPath p = solve_fastslow(cfg, sys.coeffs, replicate_noise(cfg, derive_seed(8, {r})));
      sq[r] = p.y.value(p.y.size() - 1) * p.y.value(p.y.size() - 1);
    }
    const auto m = oracle::moments(sq);
    EXPECT_LE(std::abs(m.mean - exact), 4.0 * m.se) << "eps = " << eps;
    means.push_back(m.mean);
  }
  EXPECT_LT(std::max(means[0], means[1]), 2.0 * std::min(means[0], means[1]));
}

TEST(Khasminskii, SingleBlockHasNoInteriorBreakpoints) {
  const LinearTestSystem sys = linear_test_system(2);
  const FastSlowConfig cfg = quick_config(sys, 0.1);
  const ReplicateNoise n = replicate_noise(cfg, 3);
  const FastSlowPath p = solve_fastslow(cfg, sys.coeffs, n);
  const KhasminskiiPath k = khasminskii_auxiliary(cfg, sys.coeffs, n, p, cfg.horizon);
  for (std::size_t j : k.breakpoints) EXPECT_TRUE(j == 0 || j == p.x.size() - 1) << j;
}

TEST(InvariantDrift, DriftIndependentOfFastIsExact) {
  LinearTestSystem sys = linear_test_system(2);
  sys.coeffs.b = [](std::span<const double> x, std::span<const double>, std::span<double> o) {
    for (std::size_t k = 0; k < x.size(); ++k) o[k] = 2.0 * x[k];
  };
  InvariantBudget b;
  b.horizon = 20.0;
  const std::vector<double> x{0.5, -1.0};
  const InvariantMeasureEstimate e =
      estimate_invariant_drift(x, sys.config.op, sys.coeffs, sys.params, b);
  EXPECT_NEAR(e.bbar[0], 1.0, 1e-12);
  EXPECT_NEAR(e.bbar[1], -2.0, 1e-12);
  EXPECT_NEAR(e.se[0], 0.0, 1e-12);
}

TEST(Averaged, MatchesMildSolverBitwise) {
  const LinearTestSystem sys = linear_test_system(4);
  const FastSlowConfig cfg = quick_config(sys, 0.1);
  const ReplicateNoise n = replicate_noise(cfg, 4);
  const Path xbar = solve_averaged(cfg, sys.coeffs.g, sys.bbar, n.fbm);
  MildSolveConfig m;
  m.op = cfg.op;
  m.noise = cfg.noise;
  m.exponents = cfg.exponents;
  m.dt = cfg.dt;
  m.horizon = cfg.horizon;
  m.u0 = cfg.x0;
  CoefficientSet cs;
  cs.f = sys.bbar;
  cs.g = sys.coeffs.g;
  EXPECT_EQ(xbar, solve_mild(m, cs, NoiseSample{Path(), n.fbm}));
}
