#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fspde {

/// Product-quadrature weights for one cell of a power-law kernel.
///
/// For f linear on [x0, x1] with f(x0) = fl and f(x1) = fr,
///   integral_{x0}^{x1} f(x) x^p dx = left * fl + right * fr
/// exactly. Requires 0 <= x0 < x1 and p > -2. When x0 == 0 and p <= -1 the
/// left weight is infinite; it is reported as 0 and the caller must supply
/// fl == 0 (the kernels used here always vanish at the singular point).
struct CellWeights {
  double left = 0.0;
  double right = 0.0;
};

CellWeights power_cell_weights(double p, double x0, double x1);

/// Power-law kernel weights on a fixed grid, measured from an anchor node.
/// Uniform grids use per-lag tables, so a full O(K^2) sweep costs no pow()
/// calls in the inner loop.
class GridKernel {
 public:
  GridKernel(std::span<const double> times, double p);

  /// Weights of the cell between nodes j and j+1 (or j-1 and j when the
  /// cell lies to the left of the anchor), with x = |t - t_anchor|. `near`
  /// is the node closer to the anchor.
  CellWeights cell(std::size_t anchor, std::size_t near, std::size_t far) const;

  double exponent() const { return p_; }

 private:
  std::span<const double> times_;
  double p_;
  bool uniform_;
  double step_ = 0.0;
  std::vector<CellWeights> lag_;
};

/// |t_j - t_i|^q with a lag table on uniform grids.
class GridPower {
 public:
  GridPower(std::span<const double> times, double q);
  double operator()(std::size_t i, std::size_t j) const;

 private:
  std::span<const double> times_;
  double q_;
  bool uniform_;
  std::vector<double> lag_;
};

bool grid_is_uniform(std::span<const double> times, double rel_tol = 1e-9);

}  // namespace fspde
