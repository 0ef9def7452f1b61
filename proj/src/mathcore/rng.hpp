#pragma once

#include <cstdint>

#include "core/mat.hpp"

namespace deterra::math {

/// Counter-free deterministic RNG: xoshiro256++ seeded through SplitMix64
/// from a (seed, stream) pair. The same pair yields the same sample sequence
/// on every run; distinct streams are statistically independent. Instances
/// must not be shared between concurrent callers.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Derives an independent child stream without disturbing this one.
  SeededRng split(std::uint64_t substream) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal via Box-Muller (pair-cached).
  double normal();
  /// Poisson by CDF inversion; valid for lambda up to a few hundred.
  int poisson(double lambda);

  void fill_normal(Vec& v);

 private:
  std::uint64_t seed_, stream_;
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace deterra::math
