#pragma once

#include <cstdint>
#include <random>

namespace mtdemand {

// Stream domains keep independent consumers (data generation, query draws,
// weight init, shuffling) from sharing random numbers.
enum class StreamDomain : std::uint64_t {
  Generate = 1,
  Query = 2,
  Split = 3,
  Init = 4,
  Shuffle = 5,
  Evaluate = 6,
  Fixture = 7,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-style derivation: the stream for (seed, domain, index) depends on
/// nothing else, so task i draws the same numbers in any generation order.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamDomain domain,
                                           std::uint64_t index) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(domain));
  return splitmix64(h ^ (index * 0xD1B54A32D192ED03ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, StreamDomain domain, std::uint64_t index = 0) {
    return Rng(derive_seed(seed, domain, index));
  }

  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }
  bool coin() { return (engine_() >> 63) != 0; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace mtdemand
