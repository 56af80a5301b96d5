#include "fspde/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fspde {

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        abort = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MeanSe mean_and_se(std::span<const double> values) {
  MeanSe out;
  out.count = values.size();
  if (values.empty()) return out;
  out.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(),
                 [m = out.mean](double v) { return (v - m) * (v - m); });
  const double var = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

}  // namespace fspde
