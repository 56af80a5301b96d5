#include "fspde/fbm.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "fspde/error.hpp"
#include "fspde/quadrature.hpp"

namespace fspde {
namespace {

// The FFTW planner is not re-entrant; execution of an existing plan on
// caller-owned buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

PlanHandle make_forward_plan(std::size_t n) {
  std::vector<std::complex<double>> a(n), b(n);
  std::lock_guard lock(planner_mutex());
  return PlanHandle(fftw_plan_dft_1d(static_cast<int>(n),
                                     reinterpret_cast<fftw_complex*>(a.data()),
                                     reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED));
}

// One plan per transform length, shared by all samplers.
fftw_plan_s* shared_plan(std::size_t n) {
  static std::mutex cache_mutex;
  static std::vector<std::pair<std::size_t, PlanHandle>> cache;
  std::lock_guard lock(cache_mutex);
  for (auto& [len, plan] : cache) {
    if (len == n) return plan.get();
  }
  cache.emplace_back(n, make_forward_plan(n));
  return cache.back().second.get();
}

void forward_fft(std::size_t n, std::vector<std::complex<double>>& in,
                 std::vector<std::complex<double>>& out) {
  fftw_execute_dft(shared_plan(n), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

// Autocovariance of fractional Gaussian noise at integer lag k (unit step).
double fgn_autocov(double hurst, std::size_t k) {
  const double h2 = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  if (k == 0) return 1.0;
  return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) + std::pow(kk - 1.0, h2));
}

void check_grid(std::span<const double> grid) {
  if (grid.size() < 2) fail(ErrorKind::Resolution, "fBm grid needs at least two points");
  if (grid.front() != 0.0) fail(ErrorKind::Resolution, "fBm grid must start at t = 0");
  if (!grid_is_uniform(grid)) {
    fail(ErrorKind::Resolution, "exact fBm sampling requires a uniform grid");
  }
}

}  // namespace

double fbm_covariance(double hurst, double t, double s) {
  if (t < 0.0 || s < 0.0) fail(ErrorKind::Domain, "fBm covariance needs t, s >= 0");
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

FbmSampler::FbmSampler(double hurst, std::span<const double> grid, FbmMethod method)
    : hurst_(hurst), grid_(grid.begin(), grid.end()), method_(method) {
  if (!(hurst > 0.0 && hurst < 1.0)) fail(ErrorKind::Domain, "Hurst index must lie in (0, 1)");
  check_grid(grid_);
  const std::size_t n = grid_.size() - 1;  // number of increments

  if (method_ == FbmMethod::CirculantEmbedding) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    embed_size_ = 2 * m;
    std::vector<std::complex<double>> row(embed_size_), eig(embed_size_);
    for (std::size_t k = 0; k <= m; ++k) row[k] = fgn_autocov(hurst_, k);
    for (std::size_t k = 1; k < m; ++k) row[embed_size_ - k] = row[k];
    forward_fft(embed_size_, row, eig);

    double max_eig = 0.0, min_eig = 0.0;
    for (const auto& e : eig) {
      max_eig = std::max(max_eig, e.real());
      min_eig = std::min(min_eig, e.real());
    }
    if (min_eig < -1e-10 * max_eig) {
      fallback_ = true;
      method_ = FbmMethod::Cholesky;
    } else {
      sqrt_eigen_.resize(embed_size_);
      for (std::size_t k = 0; k < embed_size_; ++k) {
        sqrt_eigen_[k] = std::sqrt(std::max(eig[k].real(), 0.0) / static_cast<double>(embed_size_));
      }
    }
  }

  if (method_ == FbmMethod::Cholesky) {
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        cov(i, j) = cov(j, i) = fbm_covariance(hurst_, grid_[i + 1], grid_[j + 1]);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      fail(ErrorKind::Resolution, "fBm covariance matrix is not positive definite");
    }
    Eigen::MatrixXd lower = llt.matrixL();
    cholesky_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) cholesky_[i * n + j] = lower(i, j);
    }
  }
}

void FbmSampler::sample_into(NormalStream& rng, std::span<double> out) const {
  const std::size_t n = grid_.size() - 1;
  if (out.size() != n + 1) fail(ErrorKind::GridMismatch, "output span does not match sampler grid");
  out[0] = 0.0;

  if (method_ == FbmMethod::Cholesky) {
    std::vector<double> z(n);
    for (auto& v : z) v = rng();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += cholesky_[i * n + j] * z[j];
      out[i + 1] = acc;
    }
    return;
  }

  std::vector<std::complex<double>> w(embed_size_), y(embed_size_);
  for (std::size_t k = 0; k < embed_size_; ++k) {
    const double re = rng();
    const double im = rng();
    w[k] = sqrt_eigen_[k] * std::complex<double>(re, im);
  }
  forward_fft(embed_size_, w, y);
  // Real part has the Toeplitz covariance of unit-step fGn; rescale by dt^H.
  const double dt = grid_[1] - grid_[0];
  const double scale = std::pow(dt, hurst_);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += scale * y[k].real();
    out[k + 1] = acc;
  }
}

FbmSample FbmSampler::sample(std::uint64_t seed) const {
  NormalStream rng(seed);
  std::vector<double> values(grid_.size());
  sample_into(rng, values);
  return {Path::scalar(grid_, std::move(values)), fallback_};
}

FbmSample sample_fbm_1d(double hurst, std::span<const double> grid, std::uint64_t seed) {
  return FbmSampler(hurst, grid).sample(seed);
}

std::vector<double> QfbmSpec::weights() const {
  std::vector<double> w(modes);
  for (std::size_t i = 0; i < modes; ++i) w[i] = std::pow(static_cast<double>(i + 1), -decay);
  return w;
}

void QfbmSpec::validate() const {
  if (!(hurst > 0.5 && hurst < 1.0)) {
    fail(ErrorKind::Domain, "hurst must lie in (1/2, 1), got " + std::to_string(hurst));
  }
  if (!(decay > 2.0)) {
    fail(ErrorKind::Domain,
         "trace weights lambda_i = i^-p need p > 2 so that sum sqrt(lambda_i) < inf");
  }
  if (modes == 0) fail(ErrorKind::Domain, "noise mode count must be positive");
}

Path sample_qfbm(const QfbmSpec& spec, std::span<const double> grid, std::uint64_t seed) {
  spec.validate();
  const FbmSampler sampler(spec.hurst, grid);
  const auto w = spec.weights();
  const std::size_t K = grid.size();
  std::vector<double> values(K * spec.modes);
  std::vector<double> mode(K);
  for (std::size_t i = 0; i < spec.modes; ++i) {
    NormalStream rng(derive_seed(seed, StreamTag::Fbm, {i}));
    sampler.sample_into(rng, mode);
    const double amp = std::sqrt(w[i]);
    for (std::size_t k = 0; k < K; ++k) values[k * spec.modes + i] = amp * mode[k];
  }
  return Path::hilbert(std::vector<double>(grid.begin(), grid.end()), spec.modes,
                       std::move(values));
}

namespace {

double row_distance(const Path& p, std::size_t a, std::size_t b) {
  if (p.dim() == 1) return std::abs(p.value(a) - p.value(b));
  double s = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double d = p.value(a, i) - p.value(b, i);
    s += d * d;
  }
  return std::sqrt(s);
}

// Best two-term quotient ending at each right node b, over left nodes a in
// [lo, b). best[b] for b in [lo, hi].
std::vector<double> lambda_best_by_right_end(const Path& path, double alpha, std::size_t lo,
                                             std::size_t hi) {
  const auto times = path.times();
  const GridKernel kernel(times, alpha - 2.0);
  const GridPower quotient(times, 1.0 - alpha);
  std::vector<double> best(path.size(), 0.0);
  std::vector<double> dist(path.size(), 0.0);
  for (std::size_t a = lo; a < hi; ++a) {
    for (std::size_t j = a + 1; j <= hi; ++j) dist[j] = row_distance(path, a, j);
    double cum = 0.0;
    double prev = 0.0;  // |l(t_a) - l(t_a)|
    for (std::size_t b = a + 1; b <= hi; ++b) {
      const CellWeights w = kernel.cell(a, b - 1, b);
      cum += w.left * prev + w.right * dist[b];
      prev = dist[b];
      const double value = dist[b] / quotient(a, b) + cum;
      if (value > best[b]) best[b] = value;
    }
  }
  return best;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    fail(ErrorKind::Domain, "alpha must lie in (0, 1/2), got " + std::to_string(alpha));
  }
}

}  // namespace

double holder_seminorm(const Path& path, double exponent) {
  if (path.size() < 2) fail(ErrorKind::Resolution, "Hoelder seminorm needs at least two points");
  if (!(exponent > 0.0 && exponent <= 1.0)) {
    fail(ErrorKind::Domain, "Hoelder exponent must lie in (0, 1]");
  }
  const GridPower power(path.times(), exponent);
  double best = 0.0;
  for (std::size_t a = 0; a + 1 < path.size(); ++a) {
    for (std::size_t b = a + 1; b < path.size(); ++b) {
      best = std::max(best, row_distance(path, a, b) / power(a, b));
    }
  }
  return best;
}

double lambda_normalisation(double alpha) {
  return std::sin(std::numbers::pi * alpha) / std::numbers::pi;
}

NormReport lambda_alpha_norm(const Path& path, double alpha, double s, double t,
                             double holder_exponent) {
  check_alpha(alpha);
  const std::size_t lo = path.index_of(s);
  const std::size_t hi = path.index_of(t);
  if (hi <= lo) fail(ErrorKind::Domain, "lambda norm needs s < t");
  const auto best = lambda_best_by_right_end(path, alpha, lo, hi);
  NormReport r;
  r.alpha = alpha;
  r.lambda_norm = *std::max_element(best.begin() + static_cast<std::ptrdiff_t>(lo),
                                    best.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
  r.lambda_alpha = r.lambda_norm * lambda_normalisation(alpha);
  r.holder_exponent = holder_exponent > 0.0 ? holder_exponent : 1.0 - alpha;
  r.grid_points = hi - lo + 1;
  {
    const GridPower power(path.times(), r.holder_exponent);
    double k = 0.0;
    for (std::size_t a = lo; a < hi; ++a) {
      for (std::size_t b = a + 1; b <= hi; ++b) k = std::max(k, row_distance(path, a, b) / power(a, b));
    }
    r.holder_seminorm = k;
  }
  if (!std::isfinite(r.lambda_norm)) fail(ErrorKind::Divergence, "lambda norm is not finite");
  return r;
}

std::vector<double> lambda_norm_profile(const Path& path, double alpha) {
  check_alpha(alpha);
  if (path.size() < 2) fail(ErrorKind::Resolution, "lambda profile needs at least two points");
  auto best = lambda_best_by_right_end(path, alpha, 0, path.size() - 1);
  best[0] = 0.0;
  for (std::size_t k = 1; k < best.size(); ++k) best[k] = std::max(best[k], best[k - 1]);
  return best;
}

std::vector<double> qfbm_lambda_profile(const Path& qpath, double alpha) {
  std::vector<double> total(qpath.size(), 0.0);
  const double c = lambda_normalisation(alpha);
  for (std::size_t i = 0; i < qpath.dim(); ++i) {
    const auto prof = lambda_norm_profile(qpath.component_path(i), alpha);
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += c * prof[k];
  }
  return total;
}

double qfbm_lambda(const Path& qpath, double alpha, double t) {
  const std::size_t hi = qpath.index_of(t);
  if (hi == 0) return 0.0;
  const double c = lambda_normalisation(alpha);
  double total = 0.0;
  for (std::size_t i = 0; i < qpath.dim(); ++i) {
    total += c * lambda_alpha_norm(qpath.component_path(i), alpha, qpath.time(0), t).lambda_norm;
  }
  return total;
}

double default_alpha(double hurst) { return 0.5 * ((1.0 - hurst) + 0.5); }

}  // namespace fspde
