#pragma once

#include <vector>

#include "fspde/path.hpp"

namespace fspde {

/// The exponent family shared by the solution theory.
///   alpha       in (1 - H, 1/2)
///   beta        in (1/2, 1 - alpha)   regularity of initial data
///   alpha_prime in (alpha, 1 - beta)
///   holder      in (1 - alpha, H)
struct FracExponents {
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_prime = 0.0;
  double holder = 0.0;

  /// Midpoints of the admissible intervals, chosen in the order above.
  static FracExponents defaults(double hurst);
  /// Throws Domain naming the first violated interval.
  void validate(double hurst) const;
};

/// Left Weyl derivative D_{a+}^alpha h(t) of a scalar path, a < t grid points.
double weyl_left_derivative(const Path& h, double alpha, double a, double t);

/// Right Weyl derivative of order `order` = 1 - alpha of l_{c-} = l - l(c),
/// evaluated at t < c. The complex phases of the generalised Stieltjes
/// pairing, (-1)^alpha (-1)^{1-alpha} = -1, are folded into the sign of the
/// result, so that int h dl = int D_{s+}^alpha h * (this) dr with no further
/// sign. For l(r) = r this is +(c - t)^alpha / Gamma(1 + alpha).
double weyl_right_derivative(const Path& l, double order, double c, double t);

/// Generalised Stieltjes integral int_s^t h dl of scalar paths on one grid,
///   int_s^t D_{s+}^alpha h(r) D_{t-}^{1-alpha} l_{t-}(r) dr.
/// The h(s) (r - s)^{-alpha} part of the left derivative is integrated by
/// product quadrature; the bounded remainder by the trapezoidal rule.
double stieltjes_integral(const Path& h, const Path& l, double alpha, double s, double t);

/// The norms below accept Hilbert paths, using the Euclidean norm over modes.

/// |h|_{alpha,1} = int_0^T ( |h(s)| / s^alpha + int_0^s |h(s)-h(r)| / (s-r)^{1+alpha} dr ) ds.
double walpha1_seminorm(const Path& h, double alpha);

/// ||h(t)||_alpha = |h(t)| + int_0^t |h(t)-h(s)| / (t-s)^{1+alpha} ds.
double alpha_norm_at(const Path& h, double alpha, double t);

/// ||h||_{alpha,T} = sqrt( sup_t |h(t)|^2 + int_0^T (int_0^t |h(t)-h(s)|/(t-s)^{1+alpha} ds)^2 dt ).
double balpha2_norm(const Path& h, double alpha);

/// int_0^{t_k} |h(t_k)-h(s)| / (t_k-s)^{1+alpha} ds for every grid index k.
std::vector<double> alpha_difference_profile(const Path& h, double alpha);

// Checks of the two kernel lemmas. Both integrals are computed with
// tanh-sinh quadrature, independently of the grid machinery above.

/// int_0^r (r-s)^{-a} (t-s)^{-d} ds.
double beta_kernel_integral(double a, double d, double r, double t);
/// (t-r)^{1-a-d} B(1-a, a+d-1); requires a < 1 and a + d > 1.
double beta_kernel_bound(double a, double d, double r, double t);
/// int_0^t e^{-rho(t-r)} (t-r)^{-a} r^{-d} dr / rho^{a+d-1}.
double rho_kernel_ratio(double a, double d, double t, double rho);

}  // namespace fspde
