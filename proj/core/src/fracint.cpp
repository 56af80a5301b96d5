#include "fspde/fracint.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <string>

#include "fspde/error.hpp"
#include "fspde/fbm.hpp"
#include "fspde/quadrature.hpp"

namespace fspde {
namespace {

void require_open(double v, double lo, double hi, const char* what) {
  if (!(v > lo && v < hi)) {
    fail(ErrorKind::Domain, std::string(what) + " = " + std::to_string(v) + " must lie in (" +
                                std::to_string(lo) + ", " + std::to_string(hi) + ")");
  }
}

void require_scalar(const Path& p, const char* what) {
  if (p.kind() != PathKind::Scalar || p.dim() != 1) {
    fail(ErrorKind::Domain, std::string(what) + " must be a scalar path");
  }
  if (p.size() < 2) fail(ErrorKind::Resolution, std::string(what) + " needs at least two points");
}

// int_{t_lo}^{t_j} (h(t_j) - h(z)) (t_j - z)^{-alpha-1} dz on the interpolant.
double left_difference_integral(const Path& h, const GridKernel& kernel, std::size_t lo,
                                std::size_t j) {
  double acc = 0.0;
  const double hj = h.value(j);
  for (std::size_t m = j; m > lo; --m) {
    const CellWeights w = kernel.cell(j, m, m - 1);
    acc += w.left * (hj - h.value(m)) + w.right * (hj - h.value(m - 1));
  }
  return acc;
}

double row_distance(const Path& h, std::size_t a, std::size_t b) {
  if (h.dim() == 1) return std::abs(h.value(a) - h.value(b));
  double s = 0.0;
  for (std::size_t i = 0; i < h.dim(); ++i) {
    const double d = h.value(a, i) - h.value(b, i);
    s += d * d;
  }
  return std::sqrt(s);
}

double row_norm(const Path& h, std::size_t k) {
  double s = 0.0;
  for (double v : h.row(k)) s += v * v;
  return std::sqrt(s);
}

// Same integral with |h(t_j) - h(z)| (Euclidean over modes) as integrand.
double abs_difference_integral(const Path& h, const GridKernel& kernel, std::size_t lo,
                               std::size_t j) {
  double acc = 0.0;
  for (std::size_t m = j; m > lo; --m) {
    const CellWeights w = kernel.cell(j, m, m - 1);
    acc += w.left * row_distance(h, j, m) + w.right * row_distance(h, j, m - 1);
  }
  return acc;
}

void require_path(const Path& p) {
  if (p.size() < 2) fail(ErrorKind::Resolution, "norm needs at least two grid points");
}

// int_{t_j}^{t_hi} (l(t_j) - l(z)) (z - t_j)^{alpha-2} dz on the interpolant.
double right_difference_integral(const Path& l, const GridKernel& kernel, std::size_t j,
                                 std::size_t hi) {
  double acc = 0.0;
  const double lj = l.value(j);
  for (std::size_t m = j; m < hi; ++m) {
    const CellWeights w = kernel.cell(j, m, m + 1);
    acc += w.left * (lj - l.value(m)) + w.right * (lj - l.value(m + 1));
  }
  return acc;
}

// Right derivative with the pairing sign folded in; node j < hi.
double folded_right(const Path& l, const GridKernel& kernel, double alpha, std::size_t j,
                    std::size_t hi) {
  const double gap = l.time(hi) - l.time(j);
  const double bracket = (l.value(j) - l.value(hi)) / std::pow(gap, 1.0 - alpha) +
                         (1.0 - alpha) * right_difference_integral(l, kernel, j, hi);
  return -bracket / std::tgamma(alpha);
}

double trapezoid(std::span<const double> times, std::span<const double> f, std::size_t lo,
                 std::size_t hi) {
  double acc = 0.0;
  for (std::size_t k = lo; k < hi; ++k) acc += 0.5 * (times[k + 1] - times[k]) * (f[k] + f[k + 1]);
  return acc;
}

}  // namespace

FracExponents FracExponents::defaults(double hurst) {
  require_open(hurst, 0.5, 1.0, "hurst");
  FracExponents e;
  e.alpha = default_alpha(hurst);
  e.beta = 0.5 * (0.5 + (1.0 - e.alpha));
  e.alpha_prime = 0.5 * (e.alpha + (1.0 - e.beta));
  e.holder = 0.5 * ((1.0 - e.alpha) + hurst);
  return e;
}

void FracExponents::validate(double hurst) const {
  require_open(hurst, 0.5, 1.0, "hurst");
  require_open(alpha, 1.0 - hurst, 0.5, "alpha");
  require_open(beta, 0.5, 1.0 - alpha, "beta");
  require_open(alpha_prime, alpha, 1.0 - beta, "alpha_prime");
  require_open(holder, 1.0 - alpha, hurst, "holder");
}

double weyl_left_derivative(const Path& h, double alpha, double a, double t) {
  require_scalar(h, "h");
  require_open(alpha, 0.0, 1.0, "alpha");
  const std::size_t lo = h.index_of(a);
  const std::size_t j = h.index_of(t);
  if (j <= lo) fail(ErrorKind::Domain, "left derivative needs a < t");
  const GridKernel kernel(h.times(), -alpha - 1.0);
  const double direct = h.value(j) / std::pow(t - a, alpha);
  return (direct + alpha * left_difference_integral(h, kernel, lo, j)) /
         std::tgamma(1.0 - alpha);
}

double weyl_right_derivative(const Path& l, double order, double c, double t) {
  require_scalar(l, "l");
  require_open(order, 0.0, 1.0, "order");
  const double alpha = 1.0 - order;
  const std::size_t j = l.index_of(t);
  const std::size_t hi = l.index_of(c);
  if (j >= hi) fail(ErrorKind::Domain, "right derivative needs t < c");
  const GridKernel kernel(l.times(), alpha - 2.0);
  return folded_right(l, kernel, alpha, j, hi);
}

double stieltjes_integral(const Path& h, const Path& l, double alpha, double s, double t) {
  require_scalar(h, "integrand");
  require_scalar(l, "integrator");
  if (!h.same_grid(l)) fail(ErrorKind::GridMismatch, "integrand and integrator grids differ");
  require_open(alpha, 0.0, 1.0, "alpha");
  const std::size_t lo = h.index_of(s);
  const std::size_t hi = h.index_of(t);
  if (hi <= lo) fail(ErrorKind::Domain, "Stieltjes integral needs s < t");

  const auto times = h.times();
  const GridKernel left_kernel(times, -alpha - 1.0);
  const GridKernel right_kernel(times, alpha - 2.0);
  const GridKernel singular(times, -alpha);
  const double g1 = std::tgamma(1.0 - alpha);

  std::vector<double> right(times.size(), 0.0);
  for (std::size_t j = lo; j < hi; ++j) right[j] = folded_right(l, right_kernel, alpha, j, hi);

  // h(s) (r-s)^{-alpha} / Gamma(1-alpha) against the interpolated right factor.
  double singular_part = 0.0;
  for (std::size_t m = lo; m < hi; ++m) {
    const CellWeights w = singular.cell(lo, m, m + 1);
    singular_part += w.left * right[m] + w.right * right[m + 1];
  }
  singular_part *= h.value(lo) / g1;

  std::vector<double> product(times.size(), 0.0);
  for (std::size_t j = lo + 1; j <= hi; ++j) {
    const double reg = ((h.value(j) - h.value(lo)) / std::pow(times[j] - times[lo], alpha) +
                        alpha * left_difference_integral(h, left_kernel, lo, j)) /
                       g1;
    product[j] = reg * right[j];
  }
  return singular_part + trapezoid(times, product, lo, hi);
}

std::vector<double> alpha_difference_profile(const Path& h, double alpha) {
  require_path(h);
  require_open(alpha, 0.0, 1.0, "alpha");
  const GridKernel kernel(h.times(), -alpha - 1.0);
  std::vector<double> out(h.size(), 0.0);
  for (std::size_t j = 1; j < h.size(); ++j) out[j] = abs_difference_integral(h, kernel, 0, j);
  return out;
}

double walpha1_seminorm(const Path& h, double alpha) {
  const auto inner = alpha_difference_profile(h, alpha);
  const auto times = h.times();
  // |h(s)| s^{-alpha}, measured from the first grid point.
  const GridKernel weight(times, -alpha);
  double first = 0.0;
  for (std::size_t m = 0; m + 1 < h.size(); ++m) {
    const CellWeights w = weight.cell(0, m, m + 1);
    first += w.left * row_norm(h, m) + w.right * row_norm(h, m + 1);
  }
  return first + trapezoid(times, inner, 0, h.size() - 1);
}

double alpha_norm_at(const Path& h, double alpha, double t) {
  require_path(h);
  require_open(alpha, 0.0, 1.0, "alpha");
  const std::size_t j = h.index_of(t);
  const GridKernel kernel(h.times(), -alpha - 1.0);
  return row_norm(h, j) + abs_difference_integral(h, kernel, 0, j);
}

double balpha2_norm(const Path& h, double alpha) {
  const auto inner = alpha_difference_profile(h, alpha);
  double sup = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) sup = std::max(sup, row_norm(h, k));
  std::vector<double> sq(inner.size());
  for (std::size_t k = 0; k < inner.size(); ++k) sq[k] = inner[k] * inner[k];
  return std::sqrt(sup * sup + trapezoid(h.times(), sq, 0, h.size() - 1));
}

double beta_kernel_integral(double a, double d, double r, double t) {
  if (!(r > 0.0 && t > r)) fail(ErrorKind::Domain, "kernel integral needs 0 < r < t");
  if (!(a < 1.0)) fail(ErrorKind::Domain, "kernel exponent a must be below 1");
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double gap = t - r;
  // u = r - s puts the singularity at the left end, where abscissae are exact.
  auto f = [&](double u) { return std::pow(u, -a) * std::pow(gap + u, -d); };
  return integrator.integrate(f, 0.0, r);
}

double beta_kernel_bound(double a, double d, double r, double t) {
  if (!(a < 1.0 && a + d > 1.0)) fail(ErrorKind::Domain, "bound needs a < 1 and a + d > 1");
  if (!(t > r)) fail(ErrorKind::Domain, "bound needs r < t");
  return std::pow(t - r, 1.0 - a - d) * boost::math::beta(1.0 - a, a + d - 1.0);
}

double rho_kernel_ratio(double a, double d, double t, double rho) {
  if (!(a < 1.0 && d < 1.0)) fail(ErrorKind::Domain, "kernel exponents must be below 1");
  if (!(t > 0.0 && rho > 0.0)) fail(ErrorKind::Domain, "need t > 0 and rho > 0");
  boost::math::quadrature::tanh_sinh<double> integrator;
  // u = t - r; split so the exponential layer near u = 0 gets its own panel.
  auto near = [&](double u) { return std::exp(-rho * u) * std::pow(u, -a) * std::pow(t - u, -d); };
  auto far = [&](double v) {  // v = t - u = r
    return std::exp(-rho * (t - v)) * std::pow(t - v, -a) * std::pow(v, -d);
  };
  const double split = std::min(0.5 * t, 20.0 / rho);
  double total = integrator.integrate(near, 0.0, split);
  if (split < t) total += integrator.integrate(far, 0.0, t - split);
  return total / std::pow(rho, a + d - 1.0);
}

}  // namespace fspde
