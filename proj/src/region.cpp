#include "gaugelab/region.hpp"

#include <algorithm>

namespace gaugelab {

Interval::Interval(Dyadic lo_, Dyadic hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (hi < lo) throw std::invalid_argument("malformed interval [" + lo.str() + ", " + hi.str() + "]");
}

Region Region::normalize(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(), [](const Interval &a, const Interval &b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.hi < b.hi;
  });
  Region r;
  for (auto &i : intervals) {
    if (!r.parts_.empty() && i.lo <= r.parts_.back().hi) {
      if (r.parts_.back().hi < i.hi) r.parts_.back().hi = i.hi;
    } else {
      r.parts_.push_back(std::move(i));
    }
  }
  return r;
}

Dyadic Region::measure() const {
  Dyadic total;
  for (const auto &p : parts_) total += p.length();
  return total;
}

bool Region::contains(const Dyadic &t) const {
  // first part with hi >= t
  auto it = std::lower_bound(parts_.begin(), parts_.end(), t,
                             [](const Interval &p, const Dyadic &x) { return p.hi < x; });
  return it != parts_.end() && it->lo <= t;
}

Region Region::shifted(const Dyadic &d) const {
  Region r;
  r.parts_.reserve(parts_.size());
  for (const auto &p : parts_) r.parts_.emplace_back(p.lo + d, p.hi + d);
  return r;
}

Region Region::scaled_down(unsigned k) const {
  Region r;
  r.parts_.reserve(parts_.size());
  for (const auto &p : parts_) r.parts_.emplace_back(p.lo.scaled_down(k), p.hi.scaled_down(k));
  return r;
}

Region Region::without_points() const {
  Region r;
  for (const auto &p : parts_)
    if (!p.degenerate()) r.parts_.push_back(p);
  return r;
}

std::optional<Dyadic> Region::distance(const Dyadic &t) const {
  if (parts_.empty()) return std::nullopt;
  auto it = std::lower_bound(parts_.begin(), parts_.end(), t,
                             [](const Interval &p, const Dyadic &x) { return p.hi < x; });
  std::optional<Dyadic> best;
  if (it != parts_.end()) {
    if (it->lo <= t) return Dyadic(0);
    best = it->lo - t;
  }
  if (it != parts_.begin()) {
    Dyadic d = t - std::prev(it)->hi;
    if (!best || d < *best) best = d;
  }
  return best;
}

bool Region::meets_open(const Dyadic &lo, const Dyadic &hi) const {
  if (!(lo < hi)) return false;
  auto it = std::upper_bound(parts_.begin(), parts_.end(), lo,
                             [](const Dyadic &x, const Interval &p) { return x < p.hi; });
  return it != parts_.end() && it->lo < hi;
}

bool Region::meets_closed(const Dyadic &lo, const Dyadic &hi) const {
  auto it = std::lower_bound(parts_.begin(), parts_.end(), lo,
                             [](const Interval &p, const Dyadic &x) { return p.hi < x; });
  return it != parts_.end() && it->lo <= hi;
}

std::vector<Dyadic> Region::boundary() const {
  std::vector<Dyadic> out;
  for (const auto &p : parts_) {
    out.push_back(p.lo);
    if (!p.degenerate()) out.push_back(p.hi);
  }
  return out;
}

namespace {

std::vector<Interval> intersect_parts(const std::vector<Interval> &a, const std::vector<Interval> &b) {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const Dyadic &lo = max(a[i].lo, b[j].lo);
    const Dyadic &hi = min(a[i].hi, b[j].hi);
    if (lo <= hi) out.emplace_back(lo, hi);
    if (a[i].hi < b[j].hi)
      ++i;
    else
      ++j;
  }
  return out;
}

// Closure of a \ b.
std::vector<Interval> subtract_parts(const std::vector<Interval> &a, const std::vector<Interval> &b) {
  std::vector<Interval> out;
  std::size_t j = 0;
  for (const auto &piece : a) {
    while (j < b.size() && b[j].hi < piece.lo) ++j;
    if (j == b.size() || piece.hi < b[j].lo) {
      out.push_back(piece);
      continue;
    }
    if (piece.degenerate()) continue;
    Dyadic cursor = piece.lo;
    for (std::size_t k = j; k < b.size() && b[k].lo <= piece.hi; ++k) {
      if (cursor < b[k].lo) out.emplace_back(cursor, b[k].lo);
      if (cursor < b[k].hi) cursor = b[k].hi;
    }
    if (cursor < piece.hi) out.emplace_back(cursor, piece.hi);
  }
  return out;
}

} // namespace

Region combine(const Region &a, const Region &b, SetOp op) {
  switch (op) {
  case SetOp::intersect:
    return Region::normalize(intersect_parts(a.parts(), b.parts()));
  case SetOp::unite: {
    auto all = a.parts();
    all.insert(all.end(), b.parts().begin(), b.parts().end());
    return Region::normalize(std::move(all));
  }
  case SetOp::subtract:
    return Region::normalize(subtract_parts(a.parts(), b.parts()));
  case SetOp::symmetric_difference: {
    auto left = subtract_parts(a.parts(), b.parts());
    auto right = subtract_parts(b.parts(), a.parts());
    left.insert(left.end(), right.begin(), right.end());
    return Region::normalize(std::move(left));
  }
  }
  return {};
}

StepFunction StepFunction::constant(const Rational &v) {
  return StepFunction{{Dyadic(0), Dyadic(1)}, {v}};
}

void StepFunction::validate() const {
  if (breaks.size() < 2 || levels.size() + 1 != breaks.size())
    throw std::invalid_argument("step function needs n+1 breakpoints for n levels");
  if (breaks.front() != Dyadic(0) || breaks.back() != Dyadic(1))
    throw std::invalid_argument("step function breakpoints must span [0,1]");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i - 1] < breaks[i]))
      throw std::invalid_argument("step function breakpoints must be strictly increasing");
}

std::size_t StepFunction::cell_of(const Dyadic &t) const {
  auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
  if (it == breaks.begin()) return 0;
  auto idx = static_cast<std::size_t>(it - breaks.begin()) - 1;
  return std::min(idx, levels.size() - 1);
}

Rational StepFunction::l1_norm() const {
  Rational total = 0;
  for (std::size_t j = 0; j < levels.size(); ++j)
    total += abs(levels[j]) * (breaks[j + 1] - breaks[j]).to_rational();
  return total;
}

} // namespace gaugelab
