#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace shortkit {

/// splitmix64 finalizer; used to derive independent seed streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic child seed for a tagged substream. Streams derived with
/// different tags are independent of each other and of consumption order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return mix64(base ^ mix64(tag));
}
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag1, std::uint64_t tag2) {
  return derive_seed(derive_seed(base, tag1), tag2);
}
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag1, std::uint64_t tag2,
                                 std::uint64_t tag3) {
  return derive_seed(derive_seed(base, tag1, tag2), tag3);
}

/// Seeded random source. Wraps mt19937_64 with hand-rolled transforms so
/// every draw is reproducible independent of the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Marsaglia polar method (no cached spare).
  double normal() {
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Fisher-Yates shuffle with our own index draws.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace shortkit
