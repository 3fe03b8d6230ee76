#pragma once

#include "gaugelab/dyadic.hpp"
#include "gaugelab/region.hpp"

#include <cstdint>

namespace gaugelab {

// Counter-based generator ("splitmix64-counter"): draw i of stream s under
// seed k is a pure function of (k, s, i), so any batch or worker can
// reproduce its draws independently.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ (index * 0xd1342543de82ef95ULL));
}

/// Uniform on [0,1) with 53 random bits, exact as a dyadic.
inline Dyadic uniform_dyadic(std::uint64_t bits) {
  return Dyadic::from_index(static_cast<std::int64_t>(bits >> 11), 53);
}

inline double uniform_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class CounterStream {
public:
  CounterStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t bits() { return counter_bits(seed_, stream_, counter_++); }
  Dyadic uniform() { return uniform_dyadic(bits()); }
  double uniform_real() { return uniform_double(bits()); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : bits() % n; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

/// Maps u in [0,1) to the point of `r` at cumulative length u * measure(r).
/// Uniform u gives a uniform point of r. Requires measure(r) > 0.
Dyadic point_in(const Region &r, const Dyadic &u);

} // namespace gaugelab
