#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fspde {

/// Stream tags keep the noise sources of one replicate apart.
enum class StreamTag : std::uint64_t {
  Fbm = 0x66626d,          // "fbm"
  Wiener = 0x77696e,       // "win"
  Frozen = 0x66727a,       // "frz"
  Validation = 0x76616c,   // "val"
};

std::uint64_t splitmix64(std::uint64_t x);

/// Derive a child seed from a parent seed and a path of indices. The result
/// depends only on the arguments, never on scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

inline std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag,
                                 std::initializer_list<std::uint64_t> path = {}) {
  std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(tag)});
  return path.size() == 0 ? s : derive_seed(s, path);
}

/// A Gaussian stream: one engine plus one distribution object.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fspde
