#include "mathcore/rng.hpp"

#include <cmath>

namespace deterra::math {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::uint64_t sm = seed ^ (0x6a09e667f3bcc909ULL + 0x9e3779b97f4a7c15ULL * stream);
  for (auto& w : s_) w = splitmix64(sm);
  // xoshiro must not start from the all-zero state
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

SeededRng SeededRng::split(std::uint64_t substream) const {
  std::uint64_t mix = stream_;
  std::uint64_t h = splitmix64(mix) ^ (substream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  return SeededRng(seed_, h);
}

std::uint64_t SeededRng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double SeededRng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double SeededRng::uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

std::int64_t SeededRng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Lemire-style bounded draw with rejection to avoid modulo bias.
  const std::uint64_t limit = span * (UINT64_MAX / span);
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit && limit != 0);
  return lo + static_cast<std::int64_t>(r % span);
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

int SeededRng::poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  const double u = uniform01();
  double p = std::exp(-lambda);
  double cum = p;
  int k = 0;
  while (u > cum && k < 100000) {
    ++k;
    p *= lambda / k;
    cum += p;
  }
  return k;
}

void SeededRng::fill_normal(Vec& v) {
  for (auto& x : v) x = normal();
}

}  // namespace deterra::math
