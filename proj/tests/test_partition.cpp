#include "generators.hpp"

#include "gaugelab/partition.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace gaugelab;

namespace {

// Independent subordination check: tag within delta of both ends, written
// with rationals only.
bool subordinate_q(const TaggedInterval &it, const Gauge &g) {
  Rational t = it.tag.to_rational(), d = g(it.tag);
  return t - it.interval.lo.to_rational() <= d && it.interval.hi.to_rational() - t <= d;
}

// Sorted, contiguous, starting at 0 and ending at 1.
bool tiles_unit(std::vector<TaggedInterval> items) {
  std::sort(items.begin(), items.end(),
            [](const TaggedInterval &a, const TaggedInterval &b) { return a.interval.lo < b.interval.lo; });
  Dyadic cursor(0);
  for (const auto &it : items) {
    if (it.interval.lo != cursor || !(it.interval.lo < it.interval.hi)) return false;
    cursor = it.interval.hi;
  }
  return cursor == Dyadic(1);
}

Gauge random_gauge(gen::Rng &rng, int kind) {
  switch (kind) {
  case 0:
    return Gauge::constant(Rational(1, static_cast<unsigned long>(rng.range(2, 300))));
  case 1: {
    std::vector<Dyadic> br{Dyadic(0)};
    std::vector<Rational> lv;
    while (br.back() < Dyadic(1)) {
      br.push_back(min(Dyadic(1), br.back() + Dyadic::from_index(rng.range(1, 5), 4)));
      lv.push_back(Rational(1, static_cast<unsigned long>(rng.range(3, 200))));
    }
    return Gauge::piecewise({br, lv});
  }
  default: {
    // Shrinks towards a random point, never zero.
    Rational c = ratio(static_cast<long>(rng.range(1, 9)), 10);
    return Gauge::evaluator(
        [c](const Dyadic &t) -> Rational {
          Rational d = t.to_rational() - c;
          return abs(d) / 2 + Rational(1, 1 << 12);
        },
        std::nullopt, "toward-point");
  }
  }
}

} // namespace

TEST_CASE("gauges reject non-positive values", "[gauge]") {
  REQUIRE_THROWS_AS(Gauge::constant(0), GaugeError);
  REQUIRE_THROWS_AS(Gauge::piecewise({{Dyadic(0), Dyadic::pow2(-1), Dyadic(1)}, {Rational(1), Rational(0)}}), GaugeError);
  auto g = Gauge::evaluator([](const Dyadic &t) -> Rational { return t.to_rational() - Rational(1, 2); });
  REQUIRE_THROWS_AS(g(Dyadic(0)), GaugeError);
  REQUIRE(g(Dyadic(1)) == Rational(1, 2));
  auto d = Gauge::dyadic_evaluator([](const Dyadic &) { return Dyadic(0); });
  REQUIRE_THROWS_AS(d(Dyadic(0)), GaugeError);
}

TEST_CASE("cousin partitions are subordinate", "[partition][property]") {
  gen::Rng rng(41);
  const Flavor flavors[] = {Flavor::mcshane, Flavor::henstock};
  const TagStrategy strategies[] = {TagStrategy::mid, TagStrategy::left, TagStrategy::sampled};
  for (int i = 0; i < 150; ++i) {
    Gauge g = random_gauge(rng, i % 3);
    for (auto flavor : flavors)
      for (auto strategy : strategies) {
        CousinOptions opt;
        opt.flavor = flavor;
        opt.strategy = strategy;
        opt.seed = static_cast<std::uint64_t>(i);
        auto p = cousin_partition(g, opt);
        REQUIRE(is_partition(p));
        REQUIRE(is_subordinate(p, g));
        REQUIRE(tiles_unit(p.items));
        for (const auto &it : p.items) {
          REQUIRE(subordinate_q(it, g));
          if (flavor == Flavor::henstock) REQUIRE(it.interval.contains(it.tag));
        }
      }
  }
}

TEST_CASE("cousin partitions are deterministic per seed", "[partition]") {
  auto g = Gauge::constant(Rational(1, 37));
  CousinOptions opt;
  opt.strategy = TagStrategy::sampled;
  opt.seed = 99;
  auto a = cousin_partition(g, opt), b = cousin_partition(g, opt);
  REQUIRE(a.items == b.items);
  opt.seed = 100;
  auto c = cousin_partition(g, opt);
  REQUIRE(!(a.items == c.items));
}

TEST_CASE("max depth is reported", "[partition]") {
  auto g = Gauge::constant(Rational(1, 1 << 20));
  CousinOptions opt;
  opt.max_depth = 5;
  REQUIRE_THROWS_AS(cousin_partition(g, opt), MaxDepthExceeded);
  try {
    cousin_partition(g, opt);
  } catch (const MaxDepthExceeded &e) {
    REQUIRE(e.depth() == 5);
  }
}

TEST_CASE("constant gauge 1/2^k with mid tags gives the uniform grid", "[partition]") {
  for (int k = 1; k <= 6; ++k) {
    auto p = cousin_partition(Gauge::constant(Dyadic::pow2(-k).to_rational()), {});
    // Cells of length 2^-(k-1) have their midpoint within 2^-k of both ends.
    REQUIRE(p.items.size() == std::size_t(1) << (k - 1));
    for (const auto &it : p.items) REQUIRE(it.tag == it.interval.mid());
  }
}

TEST_CASE("is_partition rejects malformed families", "[partition]") {
  TaggedPartition p{{{Interval(Dyadic(0), Dyadic::pow2(-1)), Dyadic(0)}}, Flavor::mcshane};
  REQUIRE(!is_partition(p));
  p.items.push_back({Interval(Dyadic::pow2(-1), Dyadic(1)), Dyadic(0)});
  REQUIRE(is_partition(p));
  p.flavor = Flavor::henstock;
  REQUIRE(!is_partition(p)); // second tag lies outside its interval
  TaggedPartition overlap{{{Interval(Dyadic(0), Dyadic::from_index(3, 2)), Dyadic(0)},
                           {Interval(Dyadic::pow2(-2), Dyadic(1)), Dyadic(1)}},
                          Flavor::mcshane};
  REQUIRE(!is_partition(overlap));
}

TEST_CASE("restriction keeps tags and clips intervals", "[partition]") {
  gen::Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    auto g = random_gauge(rng, i % 2);
    auto p = cousin_partition(g, {});
    Region r = rng.region(5, 3);
    auto pieces = restrict_partition(p, r);
    Dyadic total;
    for (const auto &it : pieces) {
      REQUIRE(it.interval.lo < it.interval.hi);
      REQUIRE(subordinate_q(it, g));
      total += it.interval.length();
    }
    REQUIRE(total == r.measure());
  }
}

TEST_CASE("partial families extend to subordinate partitions", "[partition][property]") {
  gen::Rng rng(43);
  for (int i = 0; i < 200; ++i) {
    auto g = random_gauge(rng, i % 3);
    auto full = cousin_partition(g, {});
    // Keep a random subset of a subordinate partition, then rebuild.
    std::vector<TaggedInterval> partial;
    for (const auto &it : full.items)
      if (rng.coin()) partial.push_back(it);
    auto p = extend_to_partition(partial, g, {});
    REQUIRE(is_partition(p));
    REQUIRE(is_subordinate(p, g));
    for (const auto &kept : partial) REQUIRE(std::find(p.items.begin(), p.items.end(), kept) != p.items.end());
  }
  auto g = Gauge::constant(Rational(1, 4));
  std::vector<TaggedInterval> bad{{Interval(Dyadic(0), Dyadic(1)), Dyadic(0)}};
  REQUIRE_THROWS(extend_to_partition(bad, g, {}));
  std::vector<TaggedInterval> overlapping{{Interval(Dyadic(0), Dyadic::pow2(-2)), Dyadic(0)},
                                          {Interval(Dyadic::pow2(-3), Dyadic::pow2(-2)), Dyadic::pow2(-2)}};
  REQUIRE_THROWS(extend_to_partition(overlapping, g, {}));
}

TEST_CASE("partition JSON round trips bit-exactly", "[partition][property]") {
  gen::Rng rng(44);
  for (int i = 0; i < 200; ++i) {
    auto g = random_gauge(rng, i % 3);
    CousinOptions opt;
    opt.strategy = TagStrategy::sampled;
    opt.seed = static_cast<std::uint64_t>(i);
    auto p = cousin_partition(g, opt);
    auto text = to_json(p).dump();
    auto back = partition_from_json(nlohmann::json::parse(text));
    REQUIRE(back.items == p.items);
    REQUIRE(to_json(back).dump() == text);
  }
  REQUIRE_THROWS(partition_from_json(nlohmann::json::parse(R"([{"lo":"1/3","hi":"1","tag":"0"}])")));
}
