#include "gaugelab/partition.hpp"

#include "gaugelab/rng.hpp"

#include <algorithm>

namespace gaugelab {

MaxDepthExceeded::MaxDepthExceeded(Interval where, int depth)
    : std::runtime_error("MaxDepthExceeded: no subordinate tag for [" + where.lo.str() + ", " +
                         where.hi.str() + "] at depth " + std::to_string(depth)),
      where_(std::move(where)), depth_(depth) {}

namespace {

std::optional<Dyadic> as_dyadic(const Rational &q) {
  if (!is_power_of_two(q.get_den())) return std::nullopt;
  return Dyadic(q.get_num(), static_cast<unsigned>(mpz_scan1(q.get_den_mpz_t(), 0)));
}

} // namespace

Gauge Gauge::constant(const Rational &delta) {
  if (sgn(delta) <= 0) throw GaugeError("gauge value must be positive");
  Gauge g;
  g.steps_ = StepFunction::constant(delta);
  g.dyadic_levels_ = {as_dyadic(delta)};
  g.floor_ = delta;
  g.label_ = "const:" + rational_str(delta);
  return g;
}

Gauge Gauge::piecewise(StepFunction steps) {
  steps.validate();
  Rational lowest = steps.levels.front();
  for (const auto &v : steps.levels) {
    if (sgn(v) <= 0) throw GaugeError("piecewise gauge has a non-positive level");
    if (v < lowest) lowest = v;
  }
  Gauge g;
  g.steps_ = std::move(steps);
  for (const auto &v : g.steps_.levels) g.dyadic_levels_.push_back(as_dyadic(v));
  g.floor_ = lowest;
  g.label_ = "piecewise(" + std::to_string(g.steps_.levels.size()) + ")";
  return g;
}

Gauge Gauge::evaluator(Evaluator fn, std::optional<Rational> floor, std::string label) {
  if (!fn) throw GaugeError("empty gauge evaluator");
  if (floor && sgn(*floor) <= 0) throw GaugeError("gauge floor must be positive");
  Gauge g;
  g.fn_ = std::move(fn);
  g.floor_ = std::move(floor);
  g.label_ = std::move(label);
  return g;
}

Gauge Gauge::dyadic_evaluator(DyadicEvaluator fn, std::optional<Rational> floor, std::string label) {
  if (!fn) throw GaugeError("empty gauge evaluator");
  if (floor && sgn(*floor) <= 0) throw GaugeError("gauge floor must be positive");
  Gauge g;
  g.dfn_ = std::move(fn);
  g.floor_ = std::move(floor);
  g.label_ = std::move(label);
  return g;
}

Rational Gauge::operator()(const Dyadic &t) const {
  if (dfn_) return dyadic_at(t)->to_rational();
  if (!fn_) return steps_(t);
  Rational v = fn_(t);
  if (sgn(v) <= 0)
    throw GaugeError("gauge '" + label_ + "' is not positive at t = " + t.str());
  return v;
}

std::optional<Dyadic> Gauge::dyadic_at(const Dyadic &t) const {
  if (dfn_) {
    Dyadic v = dfn_(t);
    if (v.sign() <= 0) throw GaugeError("gauge '" + label_ + "' is not positive at t = " + t.str());
    return v;
  }
  if (fn_) return std::nullopt;
  return dyadic_levels_[steps_.cell_of(t)];
}

Region union_of(const std::vector<TaggedInterval> &items) {
  std::vector<Interval> ivs;
  ivs.reserve(items.size());
  for (const auto &it : items) ivs.push_back(it.interval);
  return Region::normalize(std::move(ivs));
}

bool is_partition(const TaggedPartition &p) {
  Dyadic total;
  for (const auto &it : p.items) {
    if (it.tag < Dyadic(0) || Dyadic(1) < it.tag) return false;
    if (p.flavor == Flavor::henstock && !it.interval.contains(it.tag)) return false;
    total += it.interval.length();
  }
  if (total != Dyadic(1)) return false;
  return union_of(p.items) == Region::unit();
}

bool is_subordinate(const TaggedInterval &item, const Gauge &g) {
  if (auto d = g.dyadic_at(item.tag))
    return item.tag - item.interval.lo <= *d && item.interval.hi - item.tag <= *d;
  Rational delta = g(item.tag);
  return compare(item.tag - item.interval.lo, delta) <= 0 &&
         compare(item.interval.hi - item.tag, delta) <= 0;
}

bool is_subordinate(const TaggedPartition &p, const Gauge &g) {
  return std::all_of(p.items.begin(), p.items.end(),
                     [&](const TaggedInterval &it) { return is_subordinate(it, g); });
}

namespace {

class Bisector {
public:
  Bisector(const Gauge &g, const CousinOptions &opt)
      : gauge_(g), opt_(opt), rng_(opt.seed, 0x636f7573696eULL) {}

  void fit(const Dyadic &a, const Dyadic &b, int depth, std::vector<TaggedInterval> &out) {
    if (auto tag = find_tag(a, b, depth >= opt_.max_depth)) {
      out.push_back({Interval(a, b), std::move(*tag)});
      return;
    }
    if (depth >= opt_.max_depth) throw MaxDepthExceeded(Interval(a, b), depth);
    Dyadic m = Dyadic::midpoint(a, b);
    fit(a, m, depth + 1, out);
    fit(m, b, depth + 1, out);
  }

private:
  bool fits(const Dyadic &t, const Dyadic &a, const Dyadic &b) {
    static const Dyadic one(1);
    if (t.sign() < 0 || one < t) return false;
    if (opt_.flavor == Flavor::henstock && (t < a || b < t)) return false;
    if (auto d = gauge_.dyadic_at(t)) return t - a <= *d && b - t <= *d;
    Rational delta = gauge_(t);
    return compare(t - a, delta) <= 0 && compare(b - t, delta) <= 0;
  }

  // Mid strategy tries the midpoint then the endpoints. Left and sampled
  // strategies only use their own candidates and prefer bisecting; the
  // midpoint and endpoints are a fallback at the depth limit.
  std::optional<Dyadic> find_tag(const Dyadic &a, const Dyadic &b, bool last_chance) {
    const Dyadic mid = Dyadic::midpoint(a, b);
    switch (opt_.strategy) {
    case TagStrategy::mid:
      break;
    case TagStrategy::left:
      for (const Dyadic *t : {&a, &b})
        if (fits(*t, a, b)) return *t;
      break;
    case TagStrategy::sampled: {
      Dyadic lo = a, hi = b;
      if (opt_.flavor == Flavor::mcshane) {
        Dyadic pad = (b - a).half();
        lo = max(Dyadic(0), a - pad);
        hi = min(Dyadic(1), b + pad);
      }
      for (int k = 0; k < opt_.samples; ++k) {
        Dyadic t = lo + rng_.uniform() * (hi - lo);
        if (fits(t, a, b)) return t;
      }
      break;
    }
    }
    if (opt_.strategy != TagStrategy::mid && !last_chance) return std::nullopt;
    for (const Dyadic *t : {&mid, &a, &b})
      if (fits(*t, a, b)) return *t;
    return std::nullopt;
  }

  const Gauge &gauge_;
  const CousinOptions &opt_;
  CounterStream rng_;
};

} // namespace

std::vector<TaggedInterval> cousin_fill(const Interval &span, const Gauge &g, const CousinOptions &opt) {
  if (opt.max_depth < 0) throw std::invalid_argument("max_depth must be non-negative");
  std::vector<TaggedInterval> out;
  if (span.degenerate()) return out;
  Bisector b(g, opt);
  b.fit(span.lo, span.hi, 0, out);
  return out;
}

TaggedPartition cousin_partition(const Gauge &g, const CousinOptions &opt) {
  if (opt.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  return TaggedPartition{cousin_fill(Interval(Dyadic(0), Dyadic(1)), g, opt), opt.flavor};
}

std::vector<TaggedInterval> restrict_partition(const TaggedPartition &p, const Region &r) {
  std::vector<TaggedInterval> out;
  for (const auto &it : p.items) {
    auto piece = Region::of(it.interval) & r;
    for (const auto &part : piece.parts())
      if (!part.degenerate()) out.push_back({part, it.tag});
  }
  return out;
}

TaggedPartition extend_to_partition(std::vector<TaggedInterval> partial, const Gauge &g,
                                    const CousinOptions &opt) {
  Dyadic total;
  for (const auto &it : partial) {
    if (it.interval.lo < Dyadic(0) || Dyadic(1) < it.interval.hi)
      throw std::invalid_argument("partial item outside [0,1]");
    if (!is_subordinate(it, g)) throw std::invalid_argument("partial item is not subordinate to the gauge");
    total += it.interval.length();
  }
  auto covered = union_of(partial);
  if (covered.measure() != total) throw std::invalid_argument("partial items overlap");

  auto gaps = Region::unit() - covered;
  for (const auto &gap : gaps.parts()) {
    auto fill = cousin_fill(gap, g, opt);
    partial.insert(partial.end(), fill.begin(), fill.end());
  }
  std::stable_sort(partial.begin(), partial.end(), [](const TaggedInterval &x, const TaggedInterval &y) {
    return x.interval.lo < y.interval.lo;
  });
  return TaggedPartition{std::move(partial), opt.flavor};
}

nlohmann::json to_json(const TaggedPartition &p) {
  auto arr = nlohmann::json::array();
  for (const auto &it : p.items)
    arr.push_back({{"lo", it.interval.lo.str()}, {"hi", it.interval.hi.str()}, {"tag", it.tag.str()}});
  return arr;
}

TaggedPartition partition_from_json(const nlohmann::json &j, Flavor flavor) {
  if (!j.is_array()) throw std::invalid_argument("partition JSON must be an array");
  TaggedPartition p;
  p.flavor = flavor;
  for (const auto &e : j) {
    p.items.push_back({Interval(Dyadic::parse(e.at("lo").get<std::string>()),
                                Dyadic::parse(e.at("hi").get<std::string>())),
                       Dyadic::parse(e.at("tag").get<std::string>())});
  }
  return p;
}

} // namespace gaugelab
