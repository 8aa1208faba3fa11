#pragma once

#include <cstdint>
#include <vector>

namespace vqalab {

// splitmix64 step; used both as a PRNG seed mixer and to derive
// independent per-sample streams from (seed, key) pairs.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t key) {
  uint64_t s = seed;
  uint64_t a = splitmix64(s);
  s ^= key * 0xD1B54A32D192ED03ULL;
  uint64_t b = splitmix64(s);
  return a ^ (b + 0x9E3779B97F4A7C15ULL);
}

// xoshiro-free, self-contained generator so that streams are identical
// across standard libraries and platforms. std::mt19937_64 itself is
// portable, but the std distributions are not; all draws go through the
// explicit helpers below.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t s = seed;
    state_[0] = splitmix64(s);
    state_[1] = splitmix64(s);
    state_[2] = splitmix64(s);
    state_[3] = splitmix64(s);
  }

  static Rng for_key(uint64_t seed, uint64_t key) { return Rng(mix_seed(seed, key)); }

  uint64_t next_u64() {
    // xoshiro256**
    uint64_t r = rotl(state_[1] * 5, 7) * 9;
    uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return r;
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n). n must be >= 1.
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  // Index drawn from an (unnormalized) weight vector.
  size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double x = next_double() * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (x < acc) return i;
    }
    return weights.size() - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t state_[4];
};

}  // namespace vqalab
