#include "generators.hpp"

#include "gaugelab/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace gaugelab;

namespace {

Rational as_q(const Dyadic &d) {
  Rational q(d.numerator());
  q /= Rational(Integer(1) << d.exponent());
  return q;
}

} // namespace

TEST_CASE("dyadic arithmetic agrees with rationals", "[dyadic]") {
  gen::Rng rng(11);
  for (int i = 0; i < 4000; ++i) {
    Dyadic a = rng.wild(), b = rng.wild();
    Rational qa = as_q(a), qb = as_q(b);
    REQUIRE(as_q(a + b) == qa + qb);
    REQUIRE(as_q(a - b) == qa - qb);
    REQUIRE(as_q(a * b) == qa * qb);
    REQUIRE(as_q(-a) == -qa);
    REQUIRE((a < b) == (qa < qb));
    REQUIRE((a == b) == (qa == qb));
    REQUIRE(compare(a, qb) == (qa < qb ? -1 : (qa > qb ? 1 : 0)));
    REQUIRE(a.to_rational() == qa);
  }
}

TEST_CASE("dyadic stays canonical across the inline limit", "[dyadic]") {
  Dyadic big = Dyadic::pow2(61);
  Dyadic sum = big + big; // 2^62 leaves the inline range
  REQUIRE(sum == Dyadic::pow2(62));
  REQUIRE(sum - big == big);
  REQUIRE((sum - big - big).is_zero());
  Dyadic tiny = Dyadic::from_index(3, 70);
  REQUIRE(tiny * Dyadic::pow2(70) == Dyadic(3));
  REQUIRE(Dyadic::from_index(6, 3) == Dyadic::from_index(3, 2));
  REQUIRE(Dyadic::from_index(6, 3).exponent() == 2);
  REQUIRE(Dyadic::from_index(0, 9).exponent() == 0);
  REQUIRE(Dyadic::pow2(-3).scaled_down(2) == Dyadic::pow2(-5));
  REQUIRE(Dyadic(-5) < Dyadic::pow2(-200));
  REQUIRE(Dyadic::pow2(100) > Dyadic::from_index(std::int64_t(1) << 61, 0));
}

TEST_CASE("dyadic text round trip", "[dyadic]") {
  gen::Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    Dyadic d = rng.wild();
    REQUIRE(Dyadic::parse(d.str()) == d);
  }
  REQUIRE(Dyadic::parse("3/2^4") == Dyadic::from_index(3, 4));
  REQUIRE(Dyadic::parse("2^-3") == Dyadic::pow2(-3));
  REQUIRE(Dyadic::parse("-7") == Dyadic(-7));
  REQUIRE(Dyadic::parse("6/8") == Dyadic::from_index(3, 2));
  REQUIRE(Dyadic::from_index(5, 3).str() == "5/2^3");
  REQUIRE_THROWS(Dyadic::parse("1/3"));
  REQUIRE_THROWS(Dyadic::parse("0.5"));
  REQUIRE_THROWS(Dyadic::parse("x"));
}

TEST_CASE("rational text", "[dyadic]") {
  REQUIRE(parse_rational("2^-12") == Rational(1, 4096));
  REQUIRE(parse_rational("3/10") == Rational(3, 10));
  REQUIRE(parse_rational("4/6") == Rational(2, 3));
  REQUIRE(parse_rational("5/2^3") == Rational(5, 8));
  REQUIRE(rational_str(Rational(3, 8)) == "3/2^3");
  REQUIRE(rational_str(Rational(1, 3)) == "1/3");
  REQUIRE_THROWS(parse_rational("0.1"));
  REQUIRE_THROWS(parse_rational("1/0"));
  REQUIRE_THROWS(parse_rational("1e-3"));
}

TEST_CASE("floor index and floor_dyadic", "[dyadic]") {
  gen::Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    Dyadic d = Dyadic::from_index(rng.range(-(1 << 30), 1 << 30), static_cast<unsigned>(rng.range(0, 40)));
    unsigned depth = static_cast<unsigned>(rng.range(0, 30));
    Rational scaled = as_q(d) * Rational(Integer(1) << depth);
    Integer fl;
    mpz_fdiv_q(fl.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
    REQUIRE(d.floor_index(depth) == fl.get_si());
  }
  Rational third(1, 3);
  Dyadic f = floor_dyadic(third, 10);
  REQUIRE(compare(f, third) < 0);
  REQUIRE(compare(f + Dyadic::pow2(-10), third) > 0);
}

TEST_CASE("region normal form", "[region]") {
  auto r = Region::normalize({Interval(Dyadic::pow2(-1), Dyadic(1)), Interval(Dyadic(0), Dyadic::pow2(-2)),
                              Interval(Dyadic::pow2(-2), Dyadic::pow2(-1))});
  REQUIRE(r == Region::unit());
  auto p = Region::normalize({Interval(Dyadic::pow2(-1), Dyadic::pow2(-1))});
  REQUIRE(p.parts().size() == 1);
  REQUIRE(p.measure().is_zero());
  REQUIRE(p.contains(Dyadic::pow2(-1)));
  REQUIRE_THROWS(Interval(Dyadic(1), Dyadic(0)));
}

TEST_CASE("region algebra against cell masks", "[region][fuzz]") {
  const int depth = 7;
  gen::Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    Region a = rng.region(depth, 5), b = rng.region(depth, 5);
    auto ma = gen::mask(a, depth), mb = gen::mask(b, depth);
    std::vector<bool> mu(ma.size()), mi(ma.size()), ms(ma.size()), mx(ma.size());
    for (std::size_t k = 0; k < ma.size(); ++k) {
      mu[k] = ma[k] || mb[k];
      mi[k] = ma[k] && mb[k];
      ms[k] = ma[k] && !mb[k];
      mx[k] = ma[k] != mb[k];
    }
    REQUIRE((a | b).measure() == gen::mask_measure(mu, depth));
    REQUIRE((a & b).measure() == gen::mask_measure(mi, depth));
    REQUIRE((a - b).measure() == gen::mask_measure(ms, depth));
    REQUIRE((a ^ b).measure() == gen::mask_measure(mx, depth));
    // Inclusion-exclusion, exactly.
    REQUIRE((a | b).measure() + (a & b).measure() == a.measure() + b.measure());
    REQUIRE((a ^ b).measure() == (a - b).measure() + (b - a).measure());
    REQUIRE(gen::mask(a | b, depth) == mu);
    REQUIRE(gen::mask(a & b, depth) == mi);
    // Grid points: union and intersection keep exact point membership.
    for (int s = 0; s < 8; ++s) {
      Dyadic t = rng.grid_point(depth);
      REQUIRE((a | b).contains(t) == (a.contains(t) || b.contains(t)));
      REQUIRE((a & b).contains(t) == (a.contains(t) && b.contains(t)));
    }
  }
}

TEST_CASE("region distance and meets", "[region]") {
  const int depth = 6;
  gen::Rng rng(22);
  for (int i = 0; i < 300; ++i) {
    Region r = rng.region(depth, 4);
    Dyadic t = rng.grid_point(depth + 2);
    auto d = r.distance(t);
    if (r.empty()) {
      REQUIRE(!d);
      continue;
    }
    std::optional<Dyadic> best;
    for (const auto &p : r.parts()) {
      Dyadic x = t < p.lo ? p.lo - t : (p.hi < t ? t - p.hi : Dyadic(0));
      if (!best || x < *best) best = x;
    }
    REQUIRE(*d == *best);
    Dyadic lo = rng.grid_point(depth), hi = rng.grid_point(depth);
    if (hi < lo) std::swap(lo, hi);
    bool closed = false, open = false;
    for (const auto &p : r.parts()) {
      closed = closed || (p.lo <= hi && lo <= p.hi);
      open = open || (lo < hi && p.lo < hi && lo < p.hi);
    }
    REQUIRE(r.meets_closed(lo, hi) == closed);
    REQUIRE(r.meets_open(lo, hi) == open);
  }
}

TEST_CASE("region shift and scale", "[region]") {
  Region r = Region::of(Interval(Dyadic::pow2(-2), Dyadic::pow2(-1)));
  REQUIRE(r.shifted(Dyadic::pow2(-2)) == Region::of(Interval(Dyadic::pow2(-1), Dyadic::from_index(3, 2))));
  REQUIRE(r.scaled_down(1).measure() == Dyadic::pow2(-3));
  REQUIRE((Region::unit() - r).parts().size() == 2);
  REQUIRE((Region::unit() - Region::unit()).empty());
}

TEST_CASE("step function cells and norm", "[region]") {
  StepFunction s{{Dyadic(0), Dyadic::pow2(-2), Dyadic(1)}, {Rational(-2), Rational(1, 3)}};
  s.validate();
  REQUIRE(s.cell_of(Dyadic(0)) == 0);
  REQUIRE(s.cell_of(Dyadic::pow2(-2)) == 1);
  REQUIRE(s.cell_of(Dyadic(1)) == 1);
  REQUIRE(s(Dyadic::pow2(-3)) == -2);
  REQUIRE(s.l1_norm() == Rational(1, 2) + Rational(1, 4));
  StepFunction bad{{Dyadic(0), Dyadic(1)}, {}};
  REQUIRE_THROWS(bad.validate());
}

TEST_CASE("counter streams are pure functions of their counters", "[rng]") {
  REQUIRE(counter_bits(1, 2, 3) == counter_bits(1, 2, 3));
  REQUIRE(counter_bits(1, 2, 3) != counter_bits(1, 2, 4));
  REQUIRE(counter_bits(1, 2, 3) != counter_bits(1, 3, 3));
  CounterStream a(5, 9), b(5, 9);
  for (int i = 0; i < 10; ++i) REQUIRE(a.bits() == b.bits());
  CounterStream c(5, 9);
  for (int i = 0; i < 1000; ++i) {
    Dyadic u = c.uniform();
    REQUIRE(u.sign() >= 0);
    REQUIRE(u < Dyadic(1));
  }
}

TEST_CASE("point_in maps uniform draws onto the region", "[rng]") {
  Region r = Region::normalize({Interval(Dyadic(0), Dyadic::pow2(-2)), Interval(Dyadic::pow2(-1), Dyadic::from_index(3, 2))});
  REQUIRE(point_in(r, Dyadic(0)) == Dyadic(0));
  // Cumulative length 1/4 of 1/2 lands at the start of the second part.
  REQUIRE(point_in(r, Dyadic::pow2(-1)) == Dyadic::pow2(-1));
  REQUIRE(point_in(r, Dyadic::from_index(3, 2)) == Dyadic::from_index(5, 3));
  CounterStream c(1, 1);
  for (int i = 0; i < 500; ++i) REQUIRE(r.contains(point_in(r, c.uniform())));
}
