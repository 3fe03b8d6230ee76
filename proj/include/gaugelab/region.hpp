#pragma once

#include "gaugelab/dyadic.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace gaugelab {

/// Closed interval [lo, hi] with dyadic endpoints. lo == hi is a point of measure zero.
struct Interval {
  Dyadic lo;
  Dyadic hi;

  Interval() = default;
  Interval(Dyadic lo_, Dyadic hi_);

  Dyadic length() const { return hi - lo; }
  bool degenerate() const { return lo == hi; }
  bool contains(const Dyadic &t) const { return lo <= t && t <= hi; }
  Dyadic mid() const { return Dyadic::midpoint(lo, hi); }

  friend bool operator==(const Interval &, const Interval &) = default;
};

/// Finite union of closed intervals in normal form: sorted by lo, pairwise
/// disjoint, touching or overlapping parts merged. Degenerate parts survive
/// normalization unless covered, so the point set is preserved exactly.
class Region {
public:
  Region() = default;

  static Region normalize(std::vector<Interval> intervals);
  static Region of(const Interval &i) { return normalize({i}); }
  static Region unit() { return of(Interval(Dyadic(0), Dyadic(1))); }

  const std::vector<Interval> &parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  Dyadic measure() const;
  bool contains(const Dyadic &t) const;

  /// {x + d : x in this}
  Region shifted(const Dyadic &d) const;
  /// {x / 2^k : x in this}
  Region scaled_down(unsigned k) const;
  /// Intervals of positive length only.
  Region without_points() const;

  /// Smallest |t - x| over x in the region; nullopt for the empty region.
  std::optional<Dyadic> distance(const Dyadic &t) const;
  /// True iff the open interval (lo, hi) meets the region.
  bool meets_open(const Dyadic &lo, const Dyadic &hi) const;
  /// True iff the closed interval [lo, hi] meets the region.
  bool meets_closed(const Dyadic &lo, const Dyadic &hi) const;

  std::vector<Dyadic> boundary() const;

  friend bool operator==(const Region &, const Region &) = default;

private:
  std::vector<Interval> parts_;
};

enum class SetOp { intersect, subtract, unite, symmetric_difference };

/// Exact set algebra. subtract and symmetric_difference return the closure of
/// the point-set result, so the output is again a finite union of closed intervals.
Region combine(const Region &a, const Region &b, SetOp op);

inline Region operator&(const Region &a, const Region &b) { return combine(a, b, SetOp::intersect); }
inline Region operator|(const Region &a, const Region &b) { return combine(a, b, SetOp::unite); }
inline Region operator-(const Region &a, const Region &b) { return combine(a, b, SetOp::subtract); }
inline Region operator^(const Region &a, const Region &b) {
  return combine(a, b, SetOp::symmetric_difference);
}

inline Dyadic measure(const Region &r) { return r.measure(); }

/// Scalar step function on [0,1]: levels[j] on [breaks[j], breaks[j+1]),
/// the last cell closed at 1.
struct StepFunction {
  std::vector<Dyadic> breaks;
  std::vector<Rational> levels;

  static StepFunction constant(const Rational &v);
  void validate() const;
  std::size_t cell_of(const Dyadic &t) const;
  const Rational &operator()(const Dyadic &t) const { return levels[cell_of(t)]; }
  Rational l1_norm() const;
};

} // namespace gaugelab
