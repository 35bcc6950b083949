#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace dicg {

// splitmix64: used to derive independent stream seeds from a master seed.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable combination of a master seed with a stream tag (e.g. worker id,
// iteration number). Identical inputs give identical streams on any platform.
inline uint64_t derive_seed(uint64_t master, uint64_t tag) {
  uint64_t s = master ^ (0x51caa932255b42ceULL + tag * 0x9e3779b97f4a7c15ULL);
  splitmix64(s);
  return splitmix64(s);
}

// Seeded random stream. Sampling primitives are written out explicitly
// (instead of std::uniform_*_distribution) so that trajectories are
// reproducible independent of the standard library implementation.
class RngStream {
 public:
  explicit RngStream(uint64_t seed = 0) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    const uint64_t bound = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<int>(x % bound);
  }

  // Uniform double in [lo, hi).
  double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (size_t i = xs.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i)));
      std::swap(xs[i - 1], xs[j]);
    }
  }

  template <typename T>
  const T& choice(const std::vector<T>& xs) {
    if (xs.empty()) throw std::invalid_argument("choice: empty set");
    return xs[uniform_int(static_cast<int>(xs.size()))];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dicg
