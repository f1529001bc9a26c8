#include "shiftlab/rng.hpp"

#include <cmath>

namespace shiftlab {

namespace {

// SplitMix64 output function (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::uint64_t CounterRng::at(std::uint64_t seed, std::uint64_t counter) {
  return mix64(seed + counter * 0x9E3779B97F4A7C15ULL);
}

std::uint64_t CounterRng::next_u64() { return at(seed_, counter_++); }

double CounterRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // u1 in (0,1] keeps the log finite.
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  cached_normal_ = radius * std::sin(kTwoPi * u2);
  has_cached_normal_ = true;
  return radius * std::cos(kTwoPi * u2);
}

std::uint64_t CounterRng::next_below(std::uint64_t n) {
  detail::require(n > 0, "CounterRng: empty range");
  // Rejection-free scaling is fine here; ranges are tiny relative to 2^64.
  return static_cast<std::uint64_t>(next_double() * static_cast<double>(n)) % n;
}

int CounterRng::next_category(const ProbVector& priors) {
  const double u = next_double();
  double cum = 0.0;
  for (Eigen::Index k = 0; k < priors.size(); ++k) {
    cum += priors[k];
    if (u < cum) return static_cast<int>(k);
  }
  return static_cast<int>(priors.size() - 1);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
  return mix64(mix64(seed) ^ (stream_id * 0xD1B54A32D192ED03ULL));
}

}  // namespace shiftlab
