#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fspde {

enum class PathKind { Scalar, Hilbert };

/// A trajectory on a strictly increasing time grid.
///
/// Scalar paths carry one value per grid point. Hilbert paths carry a vector
/// of mode coefficients per grid point, stored row-major (grid point major).
/// Paths are immutable once constructed; all invariants are checked by the
/// factories.
class Path {
 public:
  Path() = default;

  static Path scalar(std::vector<double> times, std::vector<double> values);
  static Path hilbert(std::vector<double> times, std::size_t modes,
                      std::vector<double> values);

  PathKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return times_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return times_.empty(); }

  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> data() const noexcept { return values_; }
  double time(std::size_t k) const { return times_[k]; }
  double horizon() const { return times_.back(); }

  std::span<const double> row(std::size_t k) const {
    return {values_.data() + k * dim_, dim_};
  }
  double value(std::size_t k, std::size_t mode = 0) const {
    return values_[k * dim_ + mode];
  }

  /// Values of one mode over the whole grid.
  std::vector<double> component(std::size_t mode) const;
  Path component_path(std::size_t mode) const;

  /// True when consecutive steps agree to a relative tolerance.
  bool is_uniform(double rel_tol = 1e-9) const;
  double step() const;

  /// Index of the grid point equal to `t` (within a relative tolerance);
  /// throws Resolution if `t` is not a grid point.
  std::size_t index_of(double t) const;

  bool same_grid(const Path& other) const;

  friend bool operator==(const Path&, const Path&) = default;

 private:
  Path(PathKind kind, std::vector<double> times, std::size_t dim,
       std::vector<double> values);

  PathKind kind_ = PathKind::Scalar;
  std::vector<double> times_;
  std::size_t dim_ = 1;
  std::vector<double> values_;
};

/// t_k = horizon * k / (points - 1), k = 0..points-1.
std::vector<double> uniform_grid(double horizon, std::size_t points);

/// Index of `t` inside `times` (relative tolerance), throws if absent.
std::size_t grid_index(std::span<const double> times, double t);

/// Pointwise difference a - b; grids and dimensions must match.
Path difference(const Path& a, const Path& b);

}  // namespace fspde
