#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fspde/fbm.hpp"
#include "fspde/fracint.hpp"
#include "fspde/parallel.hpp"
#include "fspde/path.hpp"
#include "fspde/semigroup.hpp"
#include "fspde/spde.hpp"

namespace fspde {

/// A coefficient of two arguments: writes b(x, y) (or F, G) into `out`.
using PairFn = std::function<void(std::span<const double> x, std::span<const double> y,
                                  std::span<double> out)>;

/// Coefficients of the two-scale system. g and G act diagonally per mode.
struct FastSlowCoefficients {
  PairFn b;     // slow drift
  FieldFn g;    // slow fBm coefficient g(x)
  PairFn F;     // fast drift
  PairFn G;     // fast Wiener coefficient (diagonal)
  /// Declared: sup |F| + |G| < infinity (lifts the C_3 threshold).
  bool bounded_fast = false;
  /// Declared bound for sup |b| used by the (B1) box probe; NaN = undeclared.
  double b_bound = std::numeric_limits<double>::quiet_NaN();
};

struct DissipativityParams {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  double beta1 = 0.0, beta2 = 0.0, beta3 = 0.0;
  double lg = std::numeric_limits<double>::quiet_NaN();
  double lg_prime = std::numeric_limits<double>::quiet_NaN();

  /// eta = 2 l_1 - 2 beta_3 - C_2.
  double eta(double lambda1) const { return 2.0 * lambda1 - 2.0 * beta3 - c2; }
  /// kappa = 2 l_1 + 2 beta_1 - C_3.
  double kappa(double lambda1) const { return 2.0 * lambda1 + 2.0 * beta1 - c3; }
};

/// 2 l_1^2 / (2 + l_1), the upper limit on C_3 in the averaging theorem.
double c3_threshold(double lambda1);

struct ConditionLine {
  std::string condition;  // "(A1)", "(A5) eta", ...
  bool pass = true;
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionLine> lines;
  bool pass() const;
  /// One "PASS|FAIL <condition>: <detail>" line per check.
  std::string text() const;
  /// Throws Condition listing every failed line.
  void require() const;
};

struct ValidationBudget {
  std::size_t pairs = 4000;
  double radius = 5.0;      // sampling box [-radius, radius]^M
  double slack = 1.05;      // sampled ratios may exceed declared constants by 5%
  std::uint64_t seed = 1;
};

ConditionReport validate_conditions(const FastSlowCoefficients& coeffs,
                                    const DissipativityParams& params, const SpectralOperator& op,
                                    const ValidationBudget& budget = {});

struct FastSlowConfig {
  SpectralOperator op = dirichlet_laplacian(4);
  QfbmSpec noise;
  FracExponents exponents = FracExponents::defaults(0.7);
  double eps = 0.1;
  double delta = 0.0;  // 0 selects eps * sqrt(-ln eps)
  double horizon = 1.0;
  double dt = 1.0 / 128.0;       // slow step
  double c_sub = 0.1;            // fast step = eps * dt * c_sub
  double min_fast_step = 1e-8;   // resolution floor
  std::vector<double> x0, y0;    // empty means zero
  std::size_t replicates = 200;
  std::uint64_t seed = 20240601;

  double effective_delta() const;
  std::size_t steps() const;
  std::size_t substeps() const;
  std::vector<double> grid() const;
  std::vector<double> initial_x() const;
  std::vector<double> initial_y() const;
  void validate() const;
};

/// The noise of one replicate: the Q-fBm on the slow grid and the seed of
/// the fast Wiener streams (regenerated on demand, one stream per mode).
struct ReplicateNoise {
  Path fbm;
  std::uint64_t wiener_seed = 0;
  /// FNV-1a over the bytes of the fBm path; equal digests mean equal noise.
  std::uint64_t digest() const;
};

ReplicateNoise replicate_noise(const FastSlowConfig& config, std::uint64_t replicate_seed);

struct FastSlowPath {
  Path x;  // slow component on the slow grid
  Path y;  // fast component sampled on the slow grid
  std::uint64_t noise_digest = 0;
};

/// Coupled exponential-Euler stepping. Over each slow step X is frozen at
/// X_j while Y is sub-stepped at h = eps dt c_sub; the slow drift integrates
/// S_{dt - s} b(X_j, Y_s) over the sub-steps and the fBm term is g(X_j) dB.
FastSlowPath solve_fastslow(const FastSlowConfig& config, const FastSlowCoefficients& coeffs,
                            const ReplicateNoise& noise);

/// The frozen equation dY = (AY + F(x, Y)) dt + G(x, Y) dW from y0 on a
/// uniform grid with step dt.
Path solve_frozen(const SpectralOperator& op, const FastSlowCoefficients& coeffs,
                  std::span<const double> x, std::span<const double> y0, double horizon,
                  double dt, std::uint64_t seed);

struct InvariantBudget {
  enum class Method { TimeAverage, Ensemble };
  Method method = Method::TimeAverage;
  double burn_in = 0.0;        // 0 selects 5 / eta
  double horizon = 5000.0;     // averaging window (time average)
  double dt = 2e-3;
  std::size_t batches = 50;    // batch means for the standard error
  std::size_t ensemble = 2000; // replicas (ensemble method)
  double rel_tolerance = 0.01; // required SE / |bbar| (max over modes with bbar != 0)
  std::uint64_t seed = 7;
};

struct InvariantMeasureEstimate {
  std::vector<double> x;
  std::vector<double> bbar;
  std::vector<double> se;
  double burn_in = 0.0;
  double horizon = 0.0;
  std::string method;
};

/// bbar(x) = int b(x, z) mu^x(dz) by a long time average (or an ensemble at
/// the burn-in time). Throws Domain when the burn-in is below 5 / eta and
/// Budget (carrying the achieved SE) when the tolerance is missed.
InvariantMeasureEstimate estimate_invariant_drift(std::span<const double> x,
                                                  const SpectralOperator& op,
                                                  const FastSlowCoefficients& coeffs,
                                                  const DissipativityParams& params,
                                                  const InvariantBudget& budget);

/// F(x, y) = -c y + d(x), G constant diagonal, b(x, y) = b1(x) + B y with
/// diagonal B.
struct LinearFastSpec {
  double c = 1.0;
  FieldFn d;
  std::vector<double> g_diag;
};

struct LinearDriftSpec {
  FieldFn b1;                 // empty means zero
  std::vector<double> b_diag;  // diagonal of B
};

/// bbar_k(x) = b1_k(x) + B_k d_k(x) / (l_k + c).
std::vector<double> analytic_bbar_linear(std::span<const double> x, const SpectralOperator& op,
                                         const LinearFastSpec& fast, const LinearDriftSpec& drift);

/// Supplies bbar(x). Providers may restrict their domain.
using BbarProvider = std::function<void(std::span<const double> x, std::span<double> out)>;

/// A separable table: bbar_k depends only on x_k and is linearly
/// interpolated between nodes. Throws Domain outside the tabulated range.
class TabulatedBbar {
 public:
  TabulatedBbar(std::vector<double> nodes, std::vector<std::vector<double>> values_per_mode);
  void operator()(std::span<const double> x, std::span<double> out) const;
  BbarProvider provider() const;

 private:
  std::vector<double> nodes_;
  std::vector<std::vector<double>> values_;
};

/// dXbar = (A Xbar + bbar(Xbar)) dt + g(Xbar) dB^H, solved by solve_mild
/// with f := bbar and no Wiener term.
Path solve_averaged(const FastSlowConfig& config, const FieldFn& g, const BbarProvider& bbar,
                    const Path& fbm);

struct KhasminskiiPath {
  Path x_hat;
  Path y_hat;
  std::vector<std::size_t> breakpoints;  // slow-grid indices of k delta
};

/// Auxiliary processes driven by the noise of a paired solve_fastslow run.
/// delta must be an integer multiple of the slow step.
KhasminskiiPath khasminskii_auxiliary(const FastSlowConfig& config,
                                      const FastSlowCoefficients& coeffs,
                                      const ReplicateNoise& noise, const FastSlowPath& paired,
                                      double delta);

struct AveragingError {
  double eps = 0.0;
  double delta = 0.0;
  MeanSe error;                 // E ||X^eps - Xbar||^2_{alpha,T}
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  bool coupling_ok = true;      // every replicate used identical fBm bytes
  std::vector<double> samples;  // per-replicate ||X^eps - Xbar||^2_{alpha,T}
};

/// Monte Carlo estimate of E ||X^eps - Xbar||^2_{alpha,T} with synchronous
/// fBm coupling. Replicate r uses derive_seed(config.seed, {r}).
AveragingError averaging_error(const FastSlowConfig& config, const FastSlowCoefficients& coeffs,
                               const BbarProvider& bbar, std::size_t threads = 1);

/// averaging_error for each eps (decreasing, at least 3 entries) with
/// delta = eps sqrt(-ln eps).
std::vector<AveragingError> averaging_study(const FastSlowConfig& base,
                                            const FastSlowCoefficients& coeffs,
                                            const BbarProvider& bbar,
                                            std::span<const double> eps_list,
                                            std::size_t threads = 1);

/// The linear test system: M modes of the Dirichlet Laplacian on [0, 1],
///   b(x, y) = y,  g_k(x) = 0.5 + 0.2 sin x_k,
///   F(x, y) = -y + d(x),  d_k(x) = 0.5 + 0.25 sin x_k,  G = 0.5 I,
/// with X_0 = (1, 1/2, ..., 1/M) and Y_0 = 0.
struct LinearTestSystem {
  FastSlowConfig config;
  FastSlowCoefficients coeffs;
  DissipativityParams params;
  LinearFastSpec fast;
  LinearDriftSpec drift;
  BbarProvider bbar;  // analytic
};

LinearTestSystem linear_test_system(std::size_t modes = 4);

}  // namespace fspde
