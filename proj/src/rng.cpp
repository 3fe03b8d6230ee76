#include "gaugelab/rng.hpp"

#include <stdexcept>

namespace gaugelab {

Dyadic point_in(const Region &r, const Dyadic &u) {
  Dyadic total = r.measure();
  if (!(Dyadic(0) < total)) throw std::invalid_argument("cannot sample from a null region");
  Dyadic target = u * total;
  Dyadic acc;
  const auto &parts = r.parts();
  for (const auto &p : parts) {
    Dyadic next = acc + p.length();
    if (target < next) return p.lo + (target - acc);
    acc = std::move(next);
  }
  return parts.back().hi;
}

} // namespace gaugelab
