#pragma once

#include <cstdint>
#include <initializer_list>

namespace singloc {

/// Identifies one reproducible random stream. Distinct (seed, stream) pairs
/// yield statistically independent generators, so replicate i of a run can
/// always use stream i regardless of which worker executes it.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Hash-combines parts into a fresh 64-bit seed (for nested experiments:
/// per-(kind, n, replicate) batch seeds and the like).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

/// xoshiro256** seeded from an RngStream via splitmix64 expansion.
class Rng {
 public:
  explicit Rng(RngStream stream);
  Rng(std::uint64_t seed, std::uint64_t stream) : Rng(RngStream{seed, stream}) {}

  std::uint64_t next_u64();

  /// Uniform on the open interval (0,1).
  double uniform01();

  /// Exact Poisson draw (inversion for small means, rejection for large).
  std::int64_t poisson(double mean);

  // UniformRandomBitGenerator interface
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~static_cast<result_type>(0); }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t s_[4];
};

}  // namespace singloc
