#include "fspde/spde.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <string>

#include "fspde/error.hpp"
#include "fspde/mollify.hpp"
#include "fspde/quadrature.hpp"
#include "fspde/rng.hpp"

namespace fspde {

bool CoefficientReport::pass() const {
  return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
}

namespace {

std::vector<double> eval(const FieldFn& fn, std::span<const double> u) {
  std::vector<double> out(u.size(), 0.0);
  if (fn) fn(u, out);
  return out;
}

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> minus(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

}  // namespace

CoefficientReport validate_coefficients(const CoefficientSet& c, std::size_t modes,
                                        std::uint64_t seed, std::size_t pairs, double radius) {
  NormalStream rng(derive_seed(seed, StreamTag::Validation));
  auto point = [&] {
    std::vector<double> v(modes);
    for (auto& x : v) x = rng.uniform(-radius, radius);
    return v;
  };
  double r_f = 0, r_sigma = 0, r_g = 0, r_gp = 0, r_c1 = 0, r_c2 = 0;
  std::vector<double> j1(modes * modes), j2(modes * modes);
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto v1 = point(), v2 = point(), w1 = point(), w2 = point();
    const double dist = euclidean_norm(minus(v1, v2));
    if (dist == 0.0) continue;
    if (c.f) r_f = std::max(r_f, euclidean_norm(minus(eval(c.f, v1), eval(c.f, v2))) / dist);
    if (c.sigma) {
      r_sigma = std::max(r_sigma, euclidean_norm(minus(eval(c.sigma, v1), eval(c.sigma, v2))) / dist);
    }
    if (c.g) {
      const auto g1 = eval(c.g, v1), g2 = eval(c.g, v2);
      r_g = std::max(r_g, sup_abs(minus(g1, g2)) / dist);
      r_c1 = std::max(r_c1, sup_abs(g1) / (1.0 + euclidean_norm(v1)));
      const auto h1 = eval(c.g, w1), h2 = eval(c.g, w2);
      std::vector<double> second(modes), mixed(modes);
      for (std::size_t i = 0; i < modes; ++i) {
        second[i] = g1[i] - g2[i] - h1[i] + h2[i];
        mixed[i] = v1[i] - v2[i] - w1[i] + w2[i];
      }
      const double rhs = euclidean_norm(mixed) +
                         dist * (euclidean_norm(minus(v1, w1)) + euclidean_norm(minus(v2, w2)));
      if (rhs > 0.0) r_c2 = std::max(r_c2, sup_abs(second) / rhs);
    }
    if (c.g_prime) {
      c.g_prime(v1, j1);
      c.g_prime(v2, j2);
      r_gp = std::max(r_gp, sup_abs(minus(j1, j2)) / dist);
    }
  }
  CoefficientReport report;
  auto add = [&](const char* name, double declared, double measured) {
    if (std::isnan(declared)) return;
    report.lines.push_back({name, declared, measured, measured <= 1.05 * declared});
  };
  add("L_f", c.constants.lf, r_f);
  add("L_sigma", c.constants.lsigma, r_sigma);
  add("L_g", c.constants.lg, r_g);
  add("L'_g", c.constants.lg_prime, r_gp);
  add("c_1", c.constants.c1, r_c1);
  add("c_2", c.constants.c2, r_c2);
  return report;
}

StepWeights StepWeights::make(std::span<const double> eigenvalues, double h, double rate) {
  if (!(h > 0.0 && rate > 0.0)) fail(ErrorKind::Domain, "step and rate must be positive");
  StepWeights w;
  const std::size_t m = eigenvalues.size();
  w.decay.resize(m);
  w.drift.resize(m);
  w.wiener.resize(m);
  w.path.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double l = eigenvalues[k];
    const double x = rate * l * h;
    const double one_minus = -std::expm1(-x);
    w.decay[k] = std::exp(-x);
    w.drift[k] = one_minus / l;
    w.wiener[k] = std::sqrt(-std::expm1(-2.0 * x) / (2.0 * l * h));
    w.path[k] = one_minus / (l * h);
  }
  return w;
}

std::size_t MildSolveConfig::steps() const {
  if (!(dt > 0.0 && horizon > 0.0)) fail(ErrorKind::Domain, "dt and horizon must be positive");
  const double ratio = horizon / dt;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * ratio) {
    fail(ErrorKind::Resolution, "horizon must be an integer multiple of dt");
  }
  return static_cast<std::size_t>(n);
}

std::vector<double> MildSolveConfig::grid() const { return uniform_grid(horizon, steps() + 1); }

std::vector<double> MildSolveConfig::initial() const {
  if (u0.empty()) return std::vector<double>(op.modes(), 0.0);
  return u0;
}

void MildSolveConfig::validate() const {
  noise.validate();
  exponents.validate(noise.hurst);
  (void)steps();
  if (noise.modes != op.modes()) {
    fail(ErrorKind::Config, "noise modes must equal operator modes (diagonal noise)");
  }
  if (!u0.empty() && u0.size() != op.modes()) {
    fail(ErrorKind::Config, "initial value length must equal operator modes");
  }
  if (!std::isfinite(graph_norm(op, exponents.beta, initial()))) {
    fail(ErrorKind::Domain, "initial value is not finite in the V_beta graph norm");
  }
  if (scheme != "exponential-euler") fail(ErrorKind::Config, "unknown scheme '" + scheme + "'");
}

Path sample_wiener(std::span<const double> grid, std::size_t modes, std::uint64_t seed) {
  const std::size_t K = grid.size();
  std::vector<double> values(K * modes, 0.0);
  for (std::size_t i = 0; i < modes; ++i) {
    NormalStream rng(derive_seed(seed, StreamTag::Wiener, {i}));
    double w = 0.0;
    for (std::size_t k = 1; k < K; ++k) {
      w += std::sqrt(grid[k] - grid[k - 1]) * rng();
      values[k * modes + i] = w;
    }
  }
  return Path::hilbert(std::vector<double>(grid.begin(), grid.end()), modes, std::move(values));
}

NoiseSample sample_noise(const MildSolveConfig& config, std::uint64_t seed) {
  config.validate();
  const auto grid = config.grid();
  return {sample_wiener(grid, config.op.modes(), seed), sample_qfbm(config.noise, grid, seed)};
}

namespace {

void check_driver(const Path& p, std::span<const double> grid, std::size_t modes, const char* what) {
  if (p.empty()) return;
  if (p.dim() != modes) fail(ErrorKind::GridMismatch, std::string(what) + " has the wrong mode count");
  if (p.size() != grid.size() || !std::equal(grid.begin(), grid.end(), p.times().begin())) {
    fail(ErrorKind::GridMismatch, std::string(what) + " is not on the solver grid");
  }
}

// Shared time stepper for every mild solve in this module.
Path exponential_euler(const SpectralOperator& op, std::span<const double> grid,
                       std::vector<double> u, const CoefficientSet& c, const Path& wiener,
                       const Path& driver) {
  const std::size_t M = op.modes();
  const std::size_t K = grid.size();
  check_driver(wiener, grid, M, "Wiener path");
  check_driver(driver, grid, M, "fBm driver");
  const StepWeights w = StepWeights::make(op.eigenvalues(), grid[1] - grid[0]);
  std::vector<double> out(K * M);
  std::copy(u.begin(), u.end(), out.begin());
  std::vector<double> f(M), s(M), g(M);
  for (std::size_t j = 0; j + 1 < K; ++j) {
    std::fill(f.begin(), f.end(), 0.0);
    std::fill(s.begin(), s.end(), 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    if (c.f) c.f(u, f);
    if (c.sigma && !wiener.empty()) c.sigma(u, s);
    if (c.g && !driver.empty()) c.g(u, g);
    for (std::size_t k = 0; k < M; ++k) {
      double next = w.decay[k] * u[k] + w.drift[k] * f[k];
      if (!wiener.empty()) next += w.wiener[k] * s[k] * (wiener.value(j + 1, k) - wiener.value(j, k));
      if (!driver.empty()) next += w.path[k] * g[k] * (driver.value(j + 1, k) - driver.value(j, k));
      if (!std::isfinite(next) || std::abs(next) > 1e100) {
        fail(ErrorKind::BlowUp, "mild solver blew up at step " + std::to_string(j + 1) +
                                    " (t = " + std::to_string(grid[j + 1]) + ")");
      }
      u[k] = next;
    }
    std::copy(u.begin(), u.end(), out.begin() + static_cast<std::ptrdiff_t>((j + 1) * M));
  }
  return Path::hilbert(std::vector<double>(grid.begin(), grid.end()), M, std::move(out));
}

}  // namespace

Path solve_mild(const MildSolveConfig& config, const CoefficientSet& coeffs,
                const NoiseSample& noise) {
  config.validate();
  return exponential_euler(config.op, config.grid(), config.initial(), coeffs, noise.wiener,
                           noise.fbm);
}

Path solve_mollified(const MildSolveConfig& config, const CoefficientSet& coeffs,
                     const NoiseSample& noise, double level, double n) {
  config.validate();
  if (!(level > 0.0)) fail(ErrorKind::Domain, "stopping level must be positive");
  Path driver;
  if (!noise.fbm.empty()) {
    const Path stopped =
        std::isinf(level)
            ? noise.fbm
            : stop_path(noise.fbm, stopping_time(noise.fbm, config.exponents.alpha, level,
                                                 noise.fbm.horizon()));
    driver = mollify_path(stopped, n);
  }
  return exponential_euler(config.op, config.grid(), config.initial(), coeffs, noise.wiener,
                           driver);
}

Path stochastic_convolution_wiener(const SpectralOperator& op, const Path& sigma_values,
                                   const Path& wiener) {
  if (!sigma_values.same_grid(wiener) || sigma_values.dim() != wiener.dim() ||
      wiener.dim() != op.modes()) {
    fail(ErrorKind::GridMismatch, "sigma values and Wiener path must share grid and modes");
  }
  const std::size_t M = op.modes();
  const auto grid = wiener.times();
  std::vector<double> out(wiener.size() * M, 0.0);
  for (std::size_t j = 0; j + 1 < wiener.size(); ++j) {
    const StepWeights w = StepWeights::make(op.eigenvalues(), grid[j + 1] - grid[j]);
    for (std::size_t k = 0; k < M; ++k) {
      out[(j + 1) * M + k] = w.decay[k] * out[j * M + k] +
                             w.wiener[k] * sigma_values.value(j, k) *
                                 (wiener.value(j + 1, k) - wiener.value(j, k));
    }
  }
  return Path::hilbert(std::vector<double>(grid.begin(), grid.end()), M, std::move(out));
}

Path stochastic_convolution_fbm(const SpectralOperator& op, const Path& g_values,
                                const Path& driver, double alpha) {
  if (!g_values.same_grid(driver) || g_values.dim() != driver.dim() ||
      driver.dim() != op.modes()) {
    fail(ErrorKind::GridMismatch, "g values and driver must share grid and modes");
  }
  const std::size_t M = op.modes();
  for (std::size_t k = 0; k < M; ++k) {
    if (!std::isfinite(walpha1_seminorm(g_values.component_path(k), alpha))) {
      fail(ErrorKind::Divergence, "integrand mode " + std::to_string(k) + " has infinite |.|_{alpha,1}");
    }
  }
  const auto grid = driver.times();
  std::vector<double> out(driver.size() * M, 0.0);
  for (std::size_t j = 0; j + 1 < driver.size(); ++j) {
    const StepWeights w = StepWeights::make(op.eigenvalues(), grid[j + 1] - grid[j]);
    for (std::size_t k = 0; k < M; ++k) {
      out[(j + 1) * M + k] = w.decay[k] * out[j * M + k] +
                             w.path[k] * g_values.value(j, k) *
                                 (driver.value(j + 1, k) - driver.value(j, k));
    }
  }
  return Path::hilbert(std::vector<double>(grid.begin(), grid.end()), M, std::move(out));
}

namespace {

// int_{t_lo}^{t_r} |x_r - x_q| / (t_r - t_q)^{1+alpha} dq for r in [lo, hi],
// Euclidean norm over modes; entries outside [lo, hi] are 0.
std::vector<double> difference_profile(const Path& x, double alpha, std::size_t lo, std::size_t hi) {
  const GridKernel kernel(x.times(), -alpha - 1.0);
  std::vector<double> out(x.size(), 0.0);
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
      const double d = x.value(a, i) - x.value(b, i);
      s += d * d;
    }
    return std::sqrt(s);
  };
  for (std::size_t r = lo + 1; r <= hi; ++r) {
    double acc = 0.0;
    for (std::size_t m = r; m > lo; --m) {
      const CellWeights w = kernel.cell(r, m, m - 1);
      acc += w.left * dist(r, m) + w.right * dist(r, m - 1);
    }
    out[r] = acc;
  }
  return out;
}

// int_{t_lo}^{t_hi} weight(r) f(r) dr with f averaged per cell and the weight
// integrated per cell by tanh-sinh (endpoint singularities allowed).
template <class Weight>
double weighted_integral(std::span<const double> times, std::size_t lo, std::size_t hi,
                         std::span<const double> f, Weight weight) {
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  double acc = 0.0;
  for (std::size_t m = lo; m < hi; ++m) {
    const double mass = integrator.integrate(weight, times[m], times[m + 1]);
    acc += 0.5 * (f[m] + f[m + 1]) * mass;
  }
  return acc;
}

std::vector<double> row_norms(const Path& x) {
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = euclidean_norm(x.row(k));
  return out;
}

Path g_of(const FieldFn& g, const Path& u) {
  std::vector<double> vals(u.size() * u.dim(), 0.0);
  std::vector<double> out(u.dim());
  for (std::size_t k = 0; k < u.size(); ++k) {
    std::fill(out.begin(), out.end(), 0.0);
    if (g) g(u.row(k), out);
    std::copy(out.begin(), out.end(), vals.begin() + static_cast<std::ptrdiff_t>(k * u.dim()));
  }
  return Path::hilbert(std::vector<double>(u.times().begin(), u.times().end()), u.dim(),
                       std::move(vals));
}

// |sum_k e_k int_a^b kernel_k(r) gvals_k(r) dB_k(r)| by the Stieltjes integral per mode.
template <class Kernel>
double convolution_norm(const Path& gvals, const Path& fbm, double alpha, double a, double b,
                        std::size_t upto, Kernel kernel) {
  double sq = 0.0;
  const auto times = fbm.times();
  for (std::size_t k = 0; k < fbm.dim(); ++k) {
    std::vector<double> h(times.size(), 0.0);
    for (std::size_t r = 0; r <= upto; ++r) h[r] = kernel(k, times[r]) * gvals.value(r, k);
    const double v = stieltjes_integral(Path::scalar({times.begin(), times.end()}, std::move(h)),
                                        fbm.component_path(k), alpha, a, b);
    sq += v * v;
  }
  return std::sqrt(sq);
}

}  // namespace

KBoundsReport k_bounds_report(const SpectralOperator& op, const Path& u, const Path& v,
                              const FieldFn& g, const Path& fbm, double alpha, double beta,
                              double s, double t) {
  if (!(alpha < beta)) fail(ErrorKind::Domain, "need alpha < beta");
  if (!(alpha + beta < 1.0)) fail(ErrorKind::Domain, "need alpha + beta < 1");
  if (!u.same_grid(fbm) || !v.same_grid(fbm) || u.dim() != op.modes() || v.dim() != op.modes() ||
      fbm.dim() != op.modes()) {
    fail(ErrorKind::GridMismatch, "u, v and the fBm must share grid and modes");
  }
  const std::size_t ks = fbm.index_of(s);
  const std::size_t kt = fbm.index_of(t);
  if (kt <= ks) fail(ErrorKind::Domain, "degenerate interval: need s < t");
  if (ks == 0) fail(ErrorKind::Domain, "need s > 0 for the (0, s) estimates");

  const auto times = fbm.times();
  const double t0 = times[0];
  const Path gu = g_of(g, u);
  const Path gdiff = difference(gu, g_of(g, v));
  const Path uv = difference(u, v);

  KBoundsReport r;
  r.lambda = qfbm_lambda(fbm, alpha, t);
  const auto eig = op.eigenvalues();
  auto s_t = [&](std::size_t k, double x) { return std::exp(-eig[k] * (t - x)); };
  auto s_ts = [&](std::size_t k, double x) {
    return std::exp(-eig[k] * (t - x)) - std::exp(-eig[k] * (s - x));
  };
  r.lhs[0] = convolution_norm(gu, fbm, alpha, s, t, kt, s_t);
  r.lhs[1] = convolution_norm(gu, fbm, alpha, t0, s, ks, s_ts);
  r.lhs[2] = convolution_norm(gdiff, fbm, alpha, s, t, kt, s_t);
  r.lhs[3] = convolution_norm(gdiff, fbm, alpha, t0, s, ks, s_ts);

  const auto nu = row_norms(u);
  const auto nuv = row_norms(uv);
  std::vector<double> one_plus(nu.size());
  for (std::size_t k = 0; k < nu.size(); ++k) one_plus[k] = 1.0 + nu[k];

  auto both_ends = [&](double x) {
    return (x > s ? std::pow(x - s, -alpha) : 0.0) + (x < t ? std::pow(t - x, -alpha) : 0.0);
  };
  auto unit = [](double) { return 1.0; };
  auto left_pair = [&](double x) {
    const double a = x > t0 ? std::pow(x - t0, -alpha) : 0.0;
    const double b = x < s ? std::pow(s - x, -beta) : 0.0;
    const double c = x < s ? std::pow(s - x, -alpha - beta) : 0.0;
    return a * b + c;
  };
  auto beta_only = [&](double x) { return x < s ? std::pow(s - x, -beta) : 0.0; };

  // K1 and K3 on [s, t].
  {
    const auto pu = difference_profile(u, alpha, ks, kt);
    const auto pv = difference_profile(v, alpha, ks, kt);
    const auto puv = difference_profile(uv, alpha, ks, kt);
    r.rhs[0] = weighted_integral(times, ks, kt, one_plus, both_ends) +
               weighted_integral(times, ks, kt, pu, unit);
    std::vector<double> cross(times.size());
    for (std::size_t k = 0; k < cross.size(); ++k) cross[k] = nuv[k] * (pu[k] + pv[k]);
    r.rhs[2] = weighted_integral(times, ks, kt, nuv, both_ends) +
               weighted_integral(times, ks, kt, cross, unit) +
               weighted_integral(times, ks, kt, puv, unit);
  }
  // K2 and K4 on [0, s].
  {
    const auto pu = difference_profile(u, alpha, 0, ks);
    const auto pv = difference_profile(v, alpha, 0, ks);
    const auto puv = difference_profile(uv, alpha, 0, ks);
    const double gap = std::pow(t - s, beta);
    r.rhs[1] = gap * (weighted_integral(times, 0, ks, one_plus, left_pair) +
                      weighted_integral(times, 0, ks, pu, beta_only));
    std::vector<double> cross(times.size());
    for (std::size_t k = 0; k < cross.size(); ++k) cross[k] = nuv[k] * (pu[k] + pv[k]);
    r.rhs[3] = gap * (weighted_integral(times, 0, ks, nuv, left_pair) +
                      weighted_integral(times, 0, ks, cross, beta_only) +
                      weighted_integral(times, 0, ks, puv, beta_only));
  }
  for (int i = 0; i < 4; ++i) {
    r.rhs[i] *= r.lambda;
    r.ratio[i] = r.rhs[i] > 0.0 ? r.lhs[i] / r.rhs[i] : 0.0;
  }
  return r;
}

}  // namespace fspde
