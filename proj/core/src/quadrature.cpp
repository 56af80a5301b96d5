#include "fspde/quadrature.hpp"

#include <cmath>

#include "fspde/error.hpp"

namespace fspde {
namespace {

// (expm1(a L) / a) with the a == 0 limit.
double expm1_over(double a, double L) {
  if (a == 0.0) return L;
  return std::expm1(a * L) / a;
}

// expm1((p+2)L)/(p+2) - expm1((p+1)L)/(p+1), computed without cancellation
// for small L by summing the series term by term.
double moment_gap(double p, double L) {
  if (L > 0.1) return expm1_over(p + 2.0, L) - expm1_over(p + 1.0, L);
  double sum = 0.0;
  double a_pow = 1.0;  // (p+2)^(n-1)
  double b_pow = 1.0;  // (p+1)^(n-1)
  double l_term = L;   // L^n / n!
  for (int n = 2; n < 40; ++n) {
    a_pow *= (p + 2.0);
    b_pow *= (p + 1.0);
    l_term *= L / n;
    const double term = (a_pow - b_pow) * l_term;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

CellWeights power_cell_weights(double p, double x0, double x1) {
  if (!(x1 > x0) || x0 < 0.0) fail(ErrorKind::Domain, "cell must satisfy 0 <= x0 < x1");
  if (!(p > -2.0)) fail(ErrorKind::Domain, "power kernel exponent must exceed -2");
  const double h = x1 - x0;
  if (x0 == 0.0) {
    // integral of (x/h) x^p over [0, h]
    const double right = std::pow(h, p + 1.0) / (p + 2.0);
    if (p <= -1.0) return {0.0, right};
    const double m0 = std::pow(h, p + 1.0) / (p + 1.0);
    return {m0 - right, right};
  }
  const double L = std::log1p(h / x0);
  const double base = std::pow(x0, p + 1.0);
  const double m0 = base * expm1_over(p + 1.0, L);
  // integral (x - x0) x^p dx = x0^{p+2} * moment_gap
  const double lin = base * x0 * moment_gap(p, L);
  const double right = lin / h;
  return {m0 - right, right};
}

bool grid_is_uniform(std::span<const double> times, double rel_tol) {
  if (times.size() < 2) return false;
  const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (std::abs((times[k] - times[k - 1]) - h) > rel_tol * h) return false;
  }
  return true;
}

GridKernel::GridKernel(std::span<const double> times, double p)
    : times_(times), p_(p), uniform_(grid_is_uniform(times)) {
  if (uniform_) {
    step_ = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    const std::size_t n = times.size();
    lag_.resize(n);
    const double scale = std::pow(step_, p + 1.0);
    for (std::size_t m = 0; m + 1 < n; ++m) {
      CellWeights w = power_cell_weights(p, static_cast<double>(m), static_cast<double>(m + 1));
      lag_[m] = {w.left * scale, w.right * scale};
    }
  }
}

CellWeights GridKernel::cell(std::size_t anchor, std::size_t near, std::size_t far) const {
  if (uniform_) {
    const std::size_t lag = near > anchor ? near - anchor : anchor - near;
    return lag_[lag];
  }
  const double x0 = std::abs(times_[near] - times_[anchor]);
  const double x1 = std::abs(times_[far] - times_[anchor]);
  return power_cell_weights(p_, x0, x1);
}

GridPower::GridPower(std::span<const double> times, double q)
    : times_(times), q_(q), uniform_(grid_is_uniform(times)) {
  if (uniform_) {
    const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    lag_.resize(times.size());
    for (std::size_t m = 0; m < times.size(); ++m) {
      lag_[m] = std::pow(h * static_cast<double>(m), q);
    }
  }
}

double GridPower::operator()(std::size_t i, std::size_t j) const {
  if (uniform_) return lag_[i > j ? i - j : j - i];
  return std::pow(std::abs(times_[j] - times_[i]), q_);
}

}  // namespace fspde
