#pragma once

#include <cstdint>
#include <random>

namespace gvr {

/// Seedable 64-bit stream with a pinned normal-variate method so generated
/// workloads are reproducible across compilers and languages.
///
///   engine:   std::mt19937_64 seeded with the 64-bit seed
///   uniform:  (engine() >> 11) * 2^-53, in [0, 1)
///   normal:   Marsaglia polar method; u, v = 2*uniform - 1 drawn in that
///             order, rejected while s = u^2 + v^2 is 0 or >= 1; returns
///             u*m first and caches v*m for the next call, m = sqrt(-2 ln s / s)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  /// Uniform integer in [0, bound) by rejection on the top bits.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace gvr
