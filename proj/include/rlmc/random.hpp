#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace rlmc {

// Portable generator: the std::mt19937_64 engine is fully specified by the
// standard, and the conversions below avoid the implementation-defined
// std:: distributions, so a seed reproduces the same stream everywhere.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/splitmix64-seed_seq/lemire-v1";

  // The seed is expanded by splitmix64 into a std::seed_seq; consecutive
  // seeds (seed + trial) then give unrelated streams.
  explicit Rng(std::uint64_t seed) {
    std::seed_seq seq = seed_sequence(seed);
    engine_.seed(seq);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double uniform_open0() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound), Lemire's multiply-and-reject.
  __extension__ using u128 = unsigned __int128;

  std::uint64_t below(std::uint64_t bound) {
    u128 m = static_cast<u128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (low < threshold) {
        m = static_cast<u128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
    const double a = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::seed_seq seed_sequence(std::uint64_t seed) {
    std::uint32_t words[8];
    std::uint64_t x = seed;
    for (int i = 0; i < 4; ++i) {
      x += 0x9E3779B97F4A7C15ull;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      z ^= z >> 31;
      words[2 * i] = static_cast<std::uint32_t>(z);
      words[2 * i + 1] = static_cast<std::uint32_t>(z >> 32);
    }
    return std::seed_seq(words, words + 8);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Fisher-Yates with Rng::below, so shuffles are reproducible across
// standard libraries.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const std::uint64_t j = rng.below(i);
    std::iter_swap(first + (i - 1), first + j);
  }
}

}  // namespace rlmc
