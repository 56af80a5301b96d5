#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "fspde/path.hpp"
#include "fspde/rng.hpp"

namespace fspde {

/// E[B(t) B(s)] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double hurst, double t, double s);

enum class FbmMethod { CirculantEmbedding, Cholesky };

struct FbmSample {
  Path path;
  /// Set when circulant embedding was not non-negative definite and the
  /// sampler fell back to a dense Cholesky factorisation.
  bool used_cholesky_fallback = false;
};

/// Exact fBm sampler bound to one Hurst index and one uniform grid starting
/// at t = 0. Construction does the O(K log K) (or O(K^3) fallback) setup;
/// sampling is const and may be called from several threads.
class FbmSampler {
 public:
  FbmSampler(double hurst, std::span<const double> grid,
             FbmMethod method = FbmMethod::CirculantEmbedding);

  /// Fills `out` (size K) with one path, out[0] = 0.
  void sample_into(NormalStream& rng, std::span<double> out) const;
  FbmSample sample(std::uint64_t seed) const;

  double hurst() const { return hurst_; }
  FbmMethod method() const { return method_; }
  bool used_fallback() const { return fallback_; }
  std::span<const double> grid() const { return grid_; }

 private:
  double hurst_;
  std::vector<double> grid_;
  FbmMethod method_;
  bool fallback_ = false;
  std::size_t embed_size_ = 0;           // 2m
  std::vector<double> sqrt_eigen_;       // sqrt(lambda_k / 2m)
  std::vector<double> cholesky_;         // lower factor, row-major (K-1)x(K-1)
};

FbmSample sample_fbm_1d(double hurst, std::span<const double> grid, std::uint64_t seed);

/// Trace-class fBm B^H = sum_i sqrt(lambda_i) e_i beta_i^H truncated to
/// `modes` terms with lambda_i = i^{-decay}.
struct QfbmSpec {
  double hurst = 0.7;
  double decay = 3.0;
  std::size_t modes = 4;

  std::vector<double> weights() const;
  /// Throws Domain unless H in (1/2, 1), decay > 2 and modes >= 1.
  void validate() const;
};

/// Mode i of the result is sqrt(lambda_i) * beta_i^H with beta_i drawn from
/// the stream derive_seed(seed, Fbm, {i}).
Path sample_qfbm(const QfbmSpec& spec, std::span<const double> grid, std::uint64_t seed);

/// Discrete sup over grid pairs s < t of |h(t) - h(s)| / (t - s)^exponent.
double holder_seminorm(const Path& path, double exponent);

struct NormReport {
  double holder_seminorm = 0.0;  // K_w at exponent `holder_exponent`
  double lambda_norm = 0.0;      // ||l||_{alpha,s,t}
  double lambda_alpha = 0.0;     // ||l|| / (Gamma(1-alpha) Gamma(alpha))
  double alpha = 0.0;
  double holder_exponent = 0.0;
  std::size_t grid_points = 0;
};

/// ||l||_{alpha,s,t} = sup_{s<=a<b<=t} ( |l(b)-l(a)|/(b-a)^{1-alpha}
///                      + int_a^b |l(z)-l(a)| / (z-a)^{2-alpha} dz ),
/// with the integral done by product quadrature on the piecewise-linear
/// interpolant. The Hoelder field is evaluated at exponent 1 - alpha unless
/// `holder_exponent` > 0 is given. Hilbert paths use the Euclidean norm.
NormReport lambda_alpha_norm(const Path& path, double alpha, double s, double t,
                             double holder_exponent = 0.0);

/// ||l||_{alpha,t_0,t_k} for every grid index k (profile[0] = 0).
std::vector<double> lambda_norm_profile(const Path& path, double alpha);

/// 1 / (Gamma(1-alpha) Gamma(alpha)) = sin(pi alpha) / pi.
double lambda_normalisation(double alpha);

/// sum_i Lambda_alpha^{0,t}(mode i of qpath); mode i already carries
/// sqrt(lambda_i).
double qfbm_lambda(const Path& qpath, double alpha, double t);

/// qfbm_lambda at every grid point.
std::vector<double> qfbm_lambda_profile(const Path& qpath, double alpha);

/// Midpoint of the admissible interval (1 - H, 1/2).
double default_alpha(double hurst);

}  // namespace fspde
