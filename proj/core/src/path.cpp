#include "fspde/path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fspde/error.hpp"

namespace fspde {

Path::Path(PathKind kind, std::vector<double> times, std::size_t dim,
           std::vector<double> values)
    : kind_(kind), times_(std::move(times)), dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) fail(ErrorKind::Domain, "path dimension must be positive");
  if (values_.size() != times_.size() * dim_) {
    fail(ErrorKind::Domain, "path values length " + std::to_string(values_.size()) +
                                " does not match " + std::to_string(times_.size()) +
                                " grid points x " + std::to_string(dim_) + " modes");
  }
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (!std::isfinite(times_[k])) fail(ErrorKind::Domain, "non-finite grid time");
    if (k > 0 && !(times_[k] > times_[k - 1])) {
      fail(ErrorKind::Domain,
           "grid times must be strictly increasing (index " + std::to_string(k) + ")");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) fail(ErrorKind::Divergence, "non-finite path value");
  }
}

Path Path::scalar(std::vector<double> times, std::vector<double> values) {
  return Path(PathKind::Scalar, std::move(times), 1, std::move(values));
}

Path Path::hilbert(std::vector<double> times, std::size_t modes,
                   std::vector<double> values) {
  return Path(PathKind::Hilbert, std::move(times), modes, std::move(values));
}

std::vector<double> Path::component(std::size_t mode) const {
  if (mode >= dim_) fail(ErrorKind::Domain, "mode index out of range");
  std::vector<double> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = value(k, mode);
  return out;
}

Path Path::component_path(std::size_t mode) const {
  return Path::scalar(times_, component(mode));
}

bool Path::is_uniform(double rel_tol) const {
  if (size() < 2) return false;
  const double h = (times_.back() - times_.front()) / static_cast<double>(size() - 1);
  for (std::size_t k = 1; k < size(); ++k) {
    if (std::abs((times_[k] - times_[k - 1]) - h) > rel_tol * h) return false;
  }
  return true;
}

double Path::step() const {
  if (!is_uniform()) fail(ErrorKind::Resolution, "path grid is not uniform");
  return (times_.back() - times_.front()) / static_cast<double>(size() - 1);
}

std::size_t Path::index_of(double t) const { return grid_index(times_, t); }

bool Path::same_grid(const Path& other) const { return times_ == other.times_; }

std::vector<double> uniform_grid(double horizon, std::size_t points) {
  if (points < 2) fail(ErrorKind::Resolution, "a grid needs at least two points");
  if (!(horizon > 0.0)) fail(ErrorKind::Domain, "grid horizon must be positive");
  std::vector<double> t(points);
  const double n = static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) t[k] = horizon * static_cast<double>(k) / n;
  t.back() = horizon;
  return t;
}

std::size_t grid_index(std::span<const double> times, double t) {
  if (times.empty()) fail(ErrorKind::Resolution, "empty grid");
  const double scale = std::max(std::abs(times.back() - times.front()), 1e-300);
  auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9 * scale);
  if (it != times.end() && std::abs(*it - t) <= 1e-9 * scale) {
    return static_cast<std::size_t>(it - times.begin());
  }
  fail(ErrorKind::Resolution, "time " + std::to_string(t) + " is not a grid point");
}

Path difference(const Path& a, const Path& b) {
  if (!a.same_grid(b)) fail(ErrorKind::GridMismatch, "difference of paths on different grids");
  if (a.dim() != b.dim()) fail(ErrorKind::GridMismatch, "difference of paths of different dimension");
  std::vector<double> v(a.data().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] - b.data()[i];
  std::vector<double> t(a.times().begin(), a.times().end());
  if (a.kind() == PathKind::Scalar) return Path::scalar(std::move(t), std::move(v));
  return Path::hilbert(std::move(t), a.dim(), std::move(v));
}

}  // namespace fspde
