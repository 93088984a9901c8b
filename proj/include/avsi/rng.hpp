// Seeded RNG with pinned distributions. The standard library's
// distribution objects are implementation-defined, so every draw used for
// dataset generation or training goes through these helpers to keep
// outputs reproducible across toolchains.
#ifndef AVSI_RNG_HPP
#define AVSI_RNG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace avsi {

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {
    // splitmix warmup decorrelates small seeds
    next_u64();
    next_u64();
  }

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi] inclusive
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
  }

  // Box-Muller; one value per call, cached pair discarded for simplicity
  double normal(double mean, double std) {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + std * r * std::cos(2.0 * M_PI * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {  // Fisher-Yates
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  uint64_t state_;
};

// FNV-1a over the parts; used to derive per-utterance seeds from a
// dataset seed so concurrent generation stays reproducible.
inline uint64_t seed_combine(uint64_t seed, const std::string& tag) {
  uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  h *= 0x100000001b3ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t seed_combine(uint64_t seed, uint64_t n) {
  uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (int i = 0; i < 8; ++i) {
    h ^= (n >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace avsi

#endif  // AVSI_RNG_HPP
