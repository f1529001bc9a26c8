#pragma once

#include "shiftlab/core.hpp"

#include <cstdint>

namespace shiftlab {

/// Deterministic counter-based generator: draw n is the SplitMix64 output
/// function applied to seed + n (identical streams on every platform, no
/// hidden state beyond the counter). Normal variates use explicit
/// Box-Muller so results do not depend on the standard library.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_double();

  /// Standard normal via Box-Muller (pairs are generated, one is cached).
  double next_normal();

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

  /// Index k with probability priors[k] (inverse-CDF on one uniform draw).
  int next_category(const ProbVector& priors);

  /// Value of draw `counter` for this seed, without advancing the stream.
  static std::uint64_t at(std::uint64_t seed, std::uint64_t counter);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// Derives an independent stream seed from (seed, stream_id).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace shiftlab
