#include "fspde/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fspde/error.hpp"
#include "fspde/fbm.hpp"

namespace fspde {
namespace {

// Cell index m with times[m] <= t <= times[m+1].
std::size_t locate(std::span<const double> times, double t) {
  if (t <= times.front()) return 0;
  if (t >= times.back()) return times.size() - 2;
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

void check_window(const Path& path, double n) {
  if (!(n >= 1.0)) fail(ErrorKind::Domain, "mollifier index n must be >= 1");
  if (path.size() < 2) fail(ErrorKind::Resolution, "mollification needs at least two grid points");
  const auto t = path.times();
  double widest = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) widest = std::max(widest, t[k] - t[k - 1]);
  if (1.0 / n < 2.0 * widest * (1.0 - 1e-9)) {
    fail(ErrorKind::Resolution, "mollifier window 1/n = " + std::to_string(1.0 / n) +
                                    " is below two grid steps (" + std::to_string(2.0 * widest) +
                                    ")");
  }
}

// Integral of the interpolant of `mode` from times[0] to x, given the
// cumulative trapezoid sums at the nodes.
double integral_to(const Path& path, std::span<const double> cumulative, std::size_t mode,
                   double x) {
  const auto t = path.times();
  const std::size_t m = locate(t, x);
  const double h = t[m + 1] - t[m];
  const double u = std::clamp(x - t[m], 0.0, h);
  const double v0 = path.value(m, mode);
  const double v1 = path.value(m + 1, mode);
  const double vx = v0 + (v1 - v0) * (u / h);
  return cumulative[m] + 0.5 * u * (v0 + vx);
}

}  // namespace

double interpolate(const Path& path, double t, std::size_t mode) {
  const auto times = path.times();
  if (t < times.front() - 1e-12 || t > times.back() + 1e-12) {
    fail(ErrorKind::Domain, "interpolation time outside the path grid");
  }
  if (path.size() == 1) return path.value(0, mode);
  const std::size_t m = locate(times, t);
  const double w = std::clamp((t - times[m]) / (times[m + 1] - times[m]), 0.0, 1.0);
  return (1.0 - w) * path.value(m, mode) + w * path.value(m + 1, mode);
}

double stopping_time(const Path& qpath, double alpha, double level, double horizon) {
  if (!(level > 0.0)) fail(ErrorKind::Domain, "stopping level N must be positive");
  const std::size_t hi = qpath.index_of(horizon);
  const auto profile = qfbm_lambda_profile(qpath, alpha);
  for (std::size_t k = 0; k <= hi; ++k) {
    if (profile[k] >= level) return qpath.time(k);
  }
  return qpath.time(hi);
}

Path stop_path(const Path& path, double tau) {
  const std::size_t k_tau = path.index_of(tau);
  std::vector<double> values(path.data().begin(), path.data().end());
  const std::size_t d = path.dim();
  for (std::size_t k = k_tau + 1; k < path.size(); ++k) {
    for (std::size_t i = 0; i < d; ++i) values[k * d + i] = path.value(k_tau, i);
  }
  std::vector<double> times(path.times().begin(), path.times().end());
  return path.kind() == PathKind::Scalar ? Path::scalar(std::move(times), std::move(values))
                                         : Path::hilbert(std::move(times), d, std::move(values));
}

Path mollify_path(const Path& path, double n) {
  check_window(path, n);
  const auto t = path.times();
  const std::size_t K = path.size();
  const std::size_t d = path.dim();
  const double window = 1.0 / n;
  std::vector<double> values(K * d);
  std::vector<double> cumulative(K);
  for (std::size_t i = 0; i < d; ++i) {
    cumulative[0] = 0.0;
    for (std::size_t k = 1; k < K; ++k) {
      cumulative[k] = cumulative[k - 1] + 0.5 * (t[k] - t[k - 1]) * (path.value(k - 1, i) + path.value(k, i));
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double start = std::max(t[k] - window, t[0]);
      values[k * d + i] = n * (cumulative[k] - integral_to(path, cumulative, i, start));
    }
  }
  std::vector<double> times(t.begin(), t.end());
  return path.kind() == PathKind::Scalar ? Path::scalar(std::move(times), std::move(values))
                                         : Path::hilbert(std::move(times), d, std::move(values));
}

std::vector<double> mollified_derivative(const Path& path, double n, double t) {
  check_window(path, n);
  const double start = std::max(t - 1.0 / n, path.time(0));
  std::vector<double> out(path.dim());
  for (std::size_t i = 0; i < path.dim(); ++i) {
    out[i] = n * (interpolate(path, t, i) - interpolate(path, start, i));
  }
  return out;
}

RateEstimate mollify_error_rate(const Path& path, double alpha, double holder,
                                std::span<const double> n_values) {
  if (n_values.size() < 3) fail(ErrorKind::Domain, "rate fit needs at least three n values");
  if (!(holder > 1.0 - alpha && holder <= 1.0)) {
    fail(ErrorKind::Domain, "holder exponent must lie in (1 - alpha, 1]");
  }
  RateEstimate r;
  r.holder_seminorm = holder_seminorm(path, holder);
  if (!std::isfinite(r.holder_seminorm)) fail(ErrorKind::Divergence, "path is not Hoelder");
  std::vector<double> x, y;
  for (double n : n_values) {
    const Path diff = difference(path, mollify_path(path, n));
    const double err = lambda_alpha_norm(diff, alpha, path.time(0), path.horizon()).lambda_norm;
    r.n.push_back(n);
    r.errors.push_back(err);
    if (err > 0.0) {
      x.push_back(std::log(1.0 / n));
      y.push_back(std::log(err));
    }
  }
  if (x.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      mx += x[k];
      my += y[k];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      sxx += (x[k] - mx) * (x[k] - mx);
      sxy += (x[k] - mx) * (y[k] - my);
    }
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
  }
  return r;
}

StoppedFamily stopped_family(const Path& qpath, double alpha, double level, double n) {
  StoppedFamily f;
  f.tau = stopping_time(qpath, alpha, level, qpath.horizon());
  f.stopped = stop_path(qpath, f.tau);
  f.mollified = mollify_path(f.stopped, n);
  return f;
}

DriftBound mollified_drift_bound(const Path& stopped_qpath, double alpha, double n, double s) {
  const std::size_t ks = stopped_qpath.index_of(s);
  if (ks == 0) fail(ErrorKind::Domain, "drift bound needs s > t_0");
  DriftBound b;
  const auto deriv = mollified_derivative(stopped_qpath, n, s);
  double sq = 0.0;
  for (double v : deriv) sq += v * v;
  b.lhs = std::sqrt(sq);
  double norm_sum = 0.0;
  for (std::size_t i = 0; i < stopped_qpath.dim(); ++i) {
    norm_sum += lambda_alpha_norm(stopped_qpath.component_path(i), alpha, stopped_qpath.time(0), s)
                    .lambda_norm;
  }
  const double scale = std::pow(n, alpha);
  b.norm_rhs = scale * norm_sum;
  b.lambda_rhs = b.norm_rhs * lambda_normalisation(alpha);
  return b;
}

}  // namespace fspde
