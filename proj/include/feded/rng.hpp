#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace feded {

// splitmix64 finalizer. Good enough to decorrelate structured seed tuples.
inline uint64_t hash_mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t combine_seeds(uint64_t a, uint64_t b) {
  return hash_mix(hash_mix(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

inline uint64_t combine_seeds(uint64_t a, uint64_t b, uint64_t c) {
  return combine_seeds(combine_seeds(a, b), c);
}

// mt19937_64 plus hand-rolled samplers. The engine is bit-exact by the
// standard; std::*_distribution is implementation-defined, so we roll the
// few distributions we need to keep runs reproducible across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; draws a fresh pair every call.
  double normal();

  // Marsaglia-Tsang, scale 1. Requires shape > 0.
  double gamma(double shape);

  // Unbiased integer in [0, n). n must be >= 1.
  size_t index(size_t n);

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace feded
