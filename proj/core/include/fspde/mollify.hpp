#pragma once

#include <span>
#include <vector>

#include "fspde/path.hpp"

namespace fspde {

/// First grid time t <= horizon with qfbm_lambda(qpath, alpha, t) >= level,
/// or `horizon` when the level is never reached. `horizon` must be a grid point.
double stopping_time(const Path& qpath, double alpha, double level, double horizon);

/// path(t ^ tau); tau must be a grid point. Works for scalar and Hilbert paths.
Path stop_path(const Path& path, double tau);

/// Moving average n * int_{(t-1/n) v 0}^t path(s) ds of the piecewise-linear
/// interpolant, evaluated exactly at every grid point. For t < 1/n the
/// window is truncated at 0 but the prefactor stays n, as in the definition,
/// so constants are reproduced only for t >= 1/n.
/// Throws Resolution when 1/n < 2 grid steps.
Path mollify_path(const Path& path, double n);

/// n (path(t) - path((t - 1/n) v 0)) for every mode at time t (any t in range).
std::vector<double> mollified_derivative(const Path& path, double n, double t);

/// Linear interpolation of one mode at an arbitrary time inside the grid.
double interpolate(const Path& path, double t, std::size_t mode = 0);

struct RateEstimate {
  double slope = 0.0;      // d log(error) / d log(1/n)
  double intercept = 0.0;
  std::vector<double> n;
  std::vector<double> errors;  // ||path - mollified||_{alpha,0,T}
  double holder_seminorm = 0.0;
};

/// Errors ||path - path^{1/n}||_{alpha,0,T} (lambda norm of the difference)
/// over `n_values`, with a least-squares fit of log error on log(1/n).
/// Requires holder in (1 - alpha, 1] and at least three n values. Error
/// values that are exactly zero are reported but left out of the fit.
RateEstimate mollify_error_rate(const Path& path, double alpha, double holder,
                                std::span<const double> n_values);

/// The stopped and mollified family built from one Q-fBm sample.
struct StoppedFamily {
  double tau = 0.0;
  Path stopped;
  Path mollified;
};

StoppedFamily stopped_family(const Path& qpath, double alpha, double level, double n);

/// Both sides of the random-drift bound at time s for a stopped Q-fBm path:
///   lhs = |d/ds B^{N,n}(s)|, Euclidean over modes (already weighted)
///   norm_rhs = n^alpha sum_i ||beta_i^N||_{alpha,0,s}
///   lambda_rhs = n^alpha sum_i Lambda_alpha^{0,s}(beta_i^N)
/// The two right-hand sides differ by the factor Gamma(alpha) Gamma(1-alpha).
struct DriftBound {
  double lhs = 0.0;
  double norm_rhs = 0.0;
  double lambda_rhs = 0.0;
};

DriftBound mollified_drift_bound(const Path& stopped_qpath, double alpha, double n, double s);

}  // namespace fspde
