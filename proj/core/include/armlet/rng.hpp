#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

namespace armlet {

// xoshiro256** seeded through splitmix64. The update equations are written
// out in the README so other ports can reproduce the exact stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_double();
  double uniform(double lo, double hi);
  /// Box-Muller; the second variate of each pair is cached.
  double normal(double mean, double stddev);
  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates driven by below().
  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t& state);

inline Rng rng_new(std::uint64_t seed) { return Rng(seed); }
inline double rng_normal(Rng& rng, double mean, double stddev) { return rng.normal(mean, stddev); }
inline double rng_uniform(Rng& rng, double lo, double hi) { return rng.uniform(lo, hi); }

}  // namespace armlet
