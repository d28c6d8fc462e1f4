#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ppgd {

/// Seedable generator with a fully specified output sequence.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so the
/// variates are derived here by hand:
///   uniform01  = (draw >> 11) * 2^-53, in [0, 1)
///   normal     = Box-Muller, sqrt(-2 ln(1 - u1)) * cos(2 pi u2), one
///                normal per two uniforms, no caching
///   index(n)   = Lemire-style rejection on the 64-bit draw
/// Any port that reproduces these rules reproduces every sample.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi);
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the independent stream `index` derived from `seed`. Used for
/// restarts, repetitions and grid cells so results do not depend on the
/// order in which parallel tasks are scheduled.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace ppgd
