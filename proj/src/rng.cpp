#include "singloc/rng.hpp"

#include <cmath>

namespace singloc {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  state += kGolden;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = 0x6a09e667f3bcc908ULL;  // arbitrary nonzero start
  for (std::uint64_t part : parts) {
    state = mix64(state ^ mix64(part));
  }
  return state;
}

Rng::Rng(RngStream stream) {
  std::uint64_t state = mix64(stream.seed) ^ mix64(stream.stream * kGolden + 0x632be59bd9b4e019ULL);
  for (auto& word : s_) word = splitmix64(state);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = kGolden;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  for (;;) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;  // open at both ends; 1.0 is unreachable from [0,1)
  }
}

std::int64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 30.0) {
    const double limit = std::exp(-mean);
    double prod = uniform01();
    std::int64_t k = 0;
    while (prod > limit) {
      prod *= uniform01();
      ++k;
    }
    return k;
  }
  // Rejection with a Lorentzian envelope; exact for all means.
  const double sq = std::sqrt(2.0 * mean);
  const double alxm = std::log(mean);
  const double g = mean * alxm - std::lgamma(mean + 1.0);
  for (;;) {
    double y, em;
    do {
      y = std::tan(M_PI * uniform01());
      em = sq * y + mean;
    } while (em < 0.0);
    em = std::floor(em);
    const double t = 0.9 * (1.0 + y * y) * std::exp(em * alxm - std::lgamma(em + 1.0) - g);
    if (uniform01() <= t) return static_cast<std::int64_t>(em);
  }
}

}  // namespace singloc
