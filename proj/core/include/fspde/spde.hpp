#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fspde/fbm.hpp"
#include "fspde/fracint.hpp"
#include "fspde/path.hpp"
#include "fspde/semigroup.hpp"

namespace fspde {

/// A vector field on the Galerkin space: writes F(u) into `out`.
using FieldFn = std::function<void(std::span<const double> u, std::span<double> out)>;
/// Jacobian of a diagonal coefficient: out[i * M + j] = d g_i / d u_j.
using JacobianFn = std::function<void(std::span<const double> u, std::span<double> out)>;

/// Declared constants; NaN means "not declared" and skips the matching check.
struct DeclaredConstants {
  static constexpr double none = std::numeric_limits<double>::quiet_NaN();
  double lf = none;        // Lipschitz constant of f
  double lsigma = none;    // Lipschitz constant of sigma (Hilbert-Schmidt norm)
  double lg = none;        // sup_i |g(v1) e_i - g(v2) e_i| <= lg |v1 - v2|
  double lg_prime = none;  // same for g'
  double c1 = none;        // sup_i |g(v) e_i| <= c1 (1 + |v|)
  double c2 = none;        // second-difference constant of g
};

/// f, sigma and g of the mixed equation. sigma and g act diagonally: the
/// i-th output entry is the coefficient in front of mode i of the noise.
/// Empty functions stand for zero coefficients.
struct CoefficientSet {
  FieldFn f;
  FieldFn sigma;
  FieldFn g;
  JacobianFn g_prime;
  DeclaredConstants constants;
};

struct CheckLine {
  std::string name;
  double declared = 0.0;
  double measured = 0.0;  // sup of the sampled ratio
  bool pass = true;
};

struct CoefficientReport {
  std::vector<CheckLine> lines;
  bool pass() const;
};

/// Samples `pairs` random point pairs in the box [-radius, radius]^M and
/// checks that no sampled ratio exceeds its declared constant by more than 5%.
CoefficientReport validate_coefficients(const CoefficientSet& c, std::size_t modes,
                                        std::uint64_t seed, std::size_t pairs = 2000,
                                        double radius = 5.0);

/// Exponential-Euler weights for one step of length h of the mode-k equation
///   dx = rate (-l_k x + a) dt + sqrt(rate) s dW + rate g dl,
/// with the coefficients frozen at the left point:
///   decay = e^{-rate l h}, drift = (1 - decay) / l,
///   wiener = sqrt((1 - decay^2) / (2 l h))  (multiplies s dW, dW ~ N(0, h)),
///   path = (1 - decay) / (l h)               (multiplies g dl; = drift / h).
struct StepWeights {
  std::vector<double> decay, drift, wiener, path;
  static StepWeights make(std::span<const double> eigenvalues, double h, double rate = 1.0);
};

struct MildSolveConfig {
  SpectralOperator op = dirichlet_laplacian(4);
  QfbmSpec noise;
  FracExponents exponents = FracExponents::defaults(0.7);
  double dt = 1.0 / 256.0;
  double horizon = 1.0;
  std::vector<double> u0;  // empty means zero
  std::string scheme = "exponential-euler";

  std::size_t steps() const;
  std::vector<double> grid() const;
  std::vector<double> initial() const;
  void validate() const;
};

/// Wiener increments (one independent standard Brownian motion per mode) and
/// the Q-fBm, both on the solver grid. An empty wiener path means "no W".
struct NoiseSample {
  Path wiener;
  Path fbm;
};

/// W mode i from derive_seed(seed, Wiener, {i}); B^H from sample_qfbm(seed).
NoiseSample sample_noise(const MildSolveConfig& config, std::uint64_t seed);
Path sample_wiener(std::span<const double> grid, std::size_t modes, std::uint64_t seed);

/// u_{j+1} = S_dt u_j + drift f(u_j) + wiener sigma(u_j) dW_j + path g(u_j) dB_j per mode.
/// Throws BlowUp naming the step index when the state stops being finite.
Path solve_mild(const MildSolveConfig& config, const CoefficientSet& coeffs,
                const NoiseSample& noise);

/// The same scheme driven by the stopped (level N, infinite = no stopping)
/// and mollified (index n) fBm. The fBm term becomes the absolutely
/// continuous drift g(u) d/ds B^{N,n}, integrated exactly over each step.
Path solve_mollified(const MildSolveConfig& config, const CoefficientSet& coeffs,
                     const NoiseSample& noise, double level, double n);

/// Z(t_{j+1}) = S_dt Z(t_j) + wiener sigma_j dW_j with sigma given per grid point.
Path stochastic_convolution_wiener(const SpectralOperator& op, const Path& sigma_values,
                                   const Path& wiener);

/// Z(t_{j+1}) = S_dt Z(t_j) + path g_j dl_j per mode. Each mode of g must have
/// a finite discrete |.|_{alpha,1}; throws Divergence otherwise.
Path stochastic_convolution_fbm(const SpectralOperator& op, const Path& g_values,
                                const Path& driver, double alpha);

/// Pathwise ratios of the four fBm-convolution estimates: the left side is
/// computed with the generalised Stieltjes integral per mode, the right side
/// is the bound without its constant.
struct KBoundsReport {
  double lhs[4] = {0, 0, 0, 0};
  double rhs[4] = {0, 0, 0, 0};
  double ratio[4] = {0, 0, 0, 0};  // 0 when rhs is 0
  double lambda = 0.0;             // Lambda_{alpha,B^H}^{0,t}
};

KBoundsReport k_bounds_report(const SpectralOperator& op, const Path& u, const Path& v,
                              const FieldFn& g, const Path& fbm, double alpha, double beta,
                              double s, double t);

}  // namespace fspde
