#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace fspde {

/// Runs fn(i) for i in [0, count) on `threads` workers pulling indices from a
/// shared counter. Results must be written to slot i by the callee, which
/// keeps the outcome independent of the schedule. The first exception thrown
/// by any task is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

/// Pairwise (cascade) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Sample mean and standard error of the mean (n-1 denominator).
MeanSe mean_and_se(std::span<const double> values);

}  // namespace fspde
