#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace gradlens {

// SplitMix64 finalizer; used to derive independent seeds from labels/counters.
std::uint64_t mix64(std::uint64_t x);

// Seed of a labeled sub-stream, e.g. derive_seed(global, "train").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter);

// xoshiro256** generator with portable distributions, so that every
// stochastic component reproduces bit-for-bit on any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gradlens
