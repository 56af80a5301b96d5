#pragma once

// Closed forms and quadratures used as reference values by the tests. They
// deliberately avoid the library so that a defect there cannot hide itself.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// E[B(t) B(s)] for fBm with Hurst index h.
inline double fbm_cov(double h, double t, double s) {
  return 0.5 * (std::pow(t, 2 * h) + std::pow(s, 2 * h) - std::pow(std::abs(t - s), 2 * h));
}

/// Var u(t) for du = -lambda u dt + dW, u(0) = 0.
inline double ou_variance(double lambda, double t) {
  return (1.0 - std::exp(-2.0 * lambda * t)) / (2.0 * lambda);
}

/// Var u(t) for du = -lambda u dt + dB^H, u(0) = 0, as the double integral
///   2 H (2H-1) int_0^t int_0^r e^{-lambda(2t-r-q)} (r-q)^{2H-2} dq dr,
/// inner integral by tanh-sinh (singular at q = r), outer by Gauss-Kronrod.
inline double additive_fbm_variance(double h, double lambda, double t) {
  boost::math::quadrature::tanh_sinh<double> inner_rule;
  auto outer = [&](double r) {
    if (r <= 0.0) return 0.0;
    auto f = [&](double z) { return std::exp(-lambda * z) * std::pow(z, 2 * h - 2); };
    return std::exp(-2.0 * lambda * (t - r)) * inner_rule.integrate(f, 0.0, r);
  };
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(outer, 0.0, t, 12, 1e-13);
  return 2.0 * h * (2 * h - 1) * v;
}

/// k-th Dirichlet eigenvalue on [0, 1], k >= 1.
inline double dirichlet(int k) { return k * k * pi * pi; }

/// Averaged drift of the linear test system for mode k (0-based) at x_k.
inline double linear_bbar(int k, double xk) {
  return (0.5 + 0.25 * std::sin(xk)) / (dirichlet(k + 1) + 1.0);
}

/// Upper limit for C_3 in the averaging theorem.
inline double c3_limit(double l1) { return 2.0 * l1 * l1 / (2.0 + l1); }

/// Least-squares slope of y on x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / (n - 1.0) / n)};
}

}  // namespace oracle
