#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fcmpc {

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard, but the standard *distributions* are not, so all draws here are
// implemented by hand to keep outputs identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : mt_(seed) {}

  std::uint64_t next_u64() { return mt_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(mt_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n >= 1. Rejection sampling, unbiased.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Box-Muller. Draws are paired; the spare is cached.
  double gaussian();
  double gaussian(double mean, double std_dev) { return mean + std_dev * gaussian(); }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Random permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 mt_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream derivation for independent substreams (per-sample seeds, pipeline
// stages). SplitMix64 finalizer over seed ^ stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace fcmpc
