#pragma once

#include <cstdint>
#include <random>

namespace wpath {

/// Seeded source of randomness. Copying it snapshots the stream, which is how
/// the path follower rewinds after a failed audit.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0) : engine_(seed) {}

  /// +1 or -1 with equal probability.
  double rademacher() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  /// Uniform on the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wpath
