#include "generators.hpp"

#include "gaugelab/gallery.hpp"
#include "gaugelab/integrators.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace gaugelab;

namespace {

SpacePtr scalar() { return ValueSpace::finite_dim(1, NormKind::l1); }

Integrand identity() {
  auto s = scalar();
  return Integrand::polynomial({Dyadic(0), Dyadic(1)}, {{VectorValue::zero(s), VectorValue(s, {1})}});
}

// Random scalar polynomial pieces on a coarse grid, with their coefficients
// kept for the oracle.
struct PolyCase {
  std::vector<Dyadic> breaks;
  std::vector<std::vector<Rational>> coeffs;
  Integrand phi;
};

PolyCase random_poly(gen::Rng &rng) {
  auto s = scalar();
  PolyCase c{{Dyadic(0)}, {}, Integrand::constant(VectorValue::zero(s))};
  while (c.breaks.back() < Dyadic(1))
    c.breaks.push_back(min(Dyadic(1), c.breaks.back() + Dyadic::from_index(rng.range(1, 4), 3)));
  std::vector<std::vector<VectorValue>> vc;
  for (std::size_t j = 0; j + 1 < c.breaks.size(); ++j) {
    std::vector<Rational> q(static_cast<std::size_t>(rng.range(1, 3)));
    std::vector<VectorValue> v;
    for (auto &x : q) {
      x = rng.rational();
      v.emplace_back(s, std::vector<Rational>{x});
    }
    c.coeffs.push_back(q);
    vc.push_back(v);
  }
  c.phi = Integrand::polynomial(c.breaks, vc);
  return c;
}

// Antiderivative oracle: sum over pieces of ∑ c_k (b^{k+1} - a^{k+1})/(k+1).
Rational poly_oracle(const PolyCase &c, const Region &r) {
  Rational total = 0;
  for (const auto &part : r.parts())
    for (std::size_t j = 0; j + 1 < c.breaks.size(); ++j) {
      Rational a = max(part.lo, c.breaks[j]).to_rational(), b = min(part.hi, c.breaks[j + 1]).to_rational();
      if (b <= a) continue;
      Rational pa = a, pb = b;
      for (std::size_t k = 0; k < c.coeffs[j].size(); ++k) {
        total += c.coeffs[j][k] * (pb - pa) / Rational(static_cast<long>(k + 1));
        pa *= a;
        pb *= b;
      }
    }
  return total;
}

Rational harmonic_half(std::size_t N) {
  Rational h = 0;
  for (std::size_t n = 1; n <= N; ++n) h += ratio(1, static_cast<long>(n));
  return h / 2;
}

std::vector<Region> dyadic_blocks(std::size_t N) {
  std::vector<Region> out;
  for (std::size_t n = 0; n < N; ++n)
    out.push_back(Region::of(Interval(Dyadic::pow2(-static_cast<int>(n) - 1), Dyadic::pow2(-static_cast<int>(n)))));
  return out;
}

} // namespace

TEST_CASE("exact integral matches the antiderivative oracle", "[integrand][property]") {
  gen::Rng rng(51);
  for (int i = 0; i < 300; ++i) {
    auto c = random_poly(rng);
    Region r = rng.region(4, 3);
    REQUIRE(exact_integral(c.phi, r)[0] == poly_oracle(c, r));
    REQUIRE(scalar_integral(DualFunctional::coordinate(0), c.phi, r) == poly_oracle(c, r));
    // Restriction then integration over everything.
    REQUIRE(exact_integral(restrict_integrand(c.phi, r), Region::unit())[0] == poly_oracle(c, r));
  }
}

TEST_CASE("riemann sums against direct evaluation", "[integrand]") {
  gen::Rng rng(52);
  for (int i = 0; i < 100; ++i) {
    auto c = random_poly(rng);
    auto p = cousin_partition(Gauge::constant(ratio(1, rng.range(3, 40))), {});
    Rational direct = 0;
    for (const auto &it : p.items) {
      Rational t = it.tag.to_rational(), v = 0, pw = 1;
      std::size_t j = 0;
      while (j + 2 < c.breaks.size() && !(it.tag < c.breaks[j + 1])) ++j;
      for (const auto &ck : c.coeffs[j]) {
        v += ck * pw;
        pw *= t;
      }
      direct += v * it.interval.length().to_rational();
    }
    REQUIRE(riemann_sum(c.phi, p)[0] == direct);
  }
}

TEST_CASE("generalized sums use measure times tag value", "[integrand]") {
  auto phi = identity();
  auto r = Region::normalize({Interval(Dyadic(0), Dyadic::pow2(-2)), Interval(Dyadic::pow2(-1), Dyadic::from_index(3, 2))});
  REQUIRE(generalized_sum(phi, {{r, Dyadic(0)}})[0] == 0);
  REQUIRE(generalized_sum(phi, {{r, Dyadic(1)}})[0] == Rational(1, 2));
  REQUIRE_THROWS(generalized_sum(phi, {{r, Dyadic(0)}, {Region::of(Interval(Dyadic(0), Dyadic::pow2(-1))), Dyadic(0)}}));
}

TEST_CASE("restriction zeroes the complement and keeps closed ends", "[integrand]") {
  auto phi = identity();
  auto E = Region::of(Interval(Dyadic::pow2(-2), Dyadic::pow2(-1)));
  auto r = restrict_integrand(phi, E);
  REQUIRE(r(Dyadic::pow2(-2))[0] == Rational(1, 4));
  REQUIRE(r(Dyadic::pow2(-1))[0] == Rational(1, 2));
  REQUIRE(r(Dyadic::from_index(5, 3))[0] == 0);
  REQUIRE(r(Dyadic::pow2(-3))[0] == 0);
}

TEST_CASE("mcshane integral of t", "[mcshane]") {
  McShaneOptions opt;
  opt.tolerance = pow2_rational(-10);
  auto est = mcshane_integrate(identity(), opt);
  REQUIRE(est.status == Status::converged);
  REQUIRE(est.oscillation <= opt.tolerance);
  REQUIRE(abs(est.value[0] - Rational(1, 2)) <= opt.tolerance);
  auto half = indefinite_integral(identity(), Region::of(Interval(Dyadic(0), Dyadic::pow2(-1))), opt);
  REQUIRE(abs(half.value[0] - Rational(1, 8)) <= opt.tolerance);
  REQUIRE(!est.gauge_trace.empty());
}

TEST_CASE("converged status implies oscillation within tolerance", "[mcshane][property]") {
  gen::Rng rng(53);
  for (int i = 0; i < 12; ++i) {
    auto c = random_poly(rng);
    McShaneOptions opt;
    opt.tolerance = pow2_rational(-8);
    opt.seed = static_cast<std::uint64_t>(i);
    auto est = mcshane_integrate(c.phi, opt);
    if (est.status == Status::converged) {
      REQUIRE(est.oscillation <= opt.tolerance);
      // Scalar compatibility with the Lebesgue integral.
      REQUIRE(abs(est.value[0] - poly_oracle(c, Region::unit())) <= est.oscillation + opt.tolerance);
    }
  }
}

TEST_CASE("dyadic indicator oscillates by one under the unit gauge", "[mcshane]") {
  auto s = scalar();
  auto ind = Integrand::evaluator(
      s, [s](const Dyadic &t) { return VectorValue(s, {t.exponent() <= 6 ? Rational(1) : Rational(0)}); },
      Rational(1));
  // All tags on the grid versus all tags off it.
  TaggedPartition on{{{Interval(Dyadic(0), Dyadic(1)), Dyadic::pow2(-1)}}, Flavor::mcshane};
  TaggedPartition off{{{Interval(Dyadic(0), Dyadic(1)), Dyadic::from_index(1, 9)}}, Flavor::mcshane};
  auto g = Gauge::constant(1);
  REQUIRE(is_subordinate(on, g));
  REQUIRE(is_subordinate(off, g));
  REQUIRE(riemann_sum(ind, on)[0] - riemann_sum(ind, off)[0] == 1);
}

TEST_CASE("3G closed form and block values", "[mcshane][gallery]") {
  auto g = phi_3G(4);
  for (std::size_t n = 0; n < 4; ++n) REQUIRE(g.integral[n] == ratio(1, 2 * static_cast<long>(n + 1)));
  // Blocks with interior tags plus [0,1/16].
  std::vector<TaggedInterval> items;
  for (int n = 0; n < 4; ++n) {
    Interval b(Dyadic::pow2(-n - 1), Dyadic::pow2(-n));
    items.push_back({b, b.mid()});
  }
  items.push_back({Interval(Dyadic(0), Dyadic::pow2(-4)), Dyadic::pow2(-5)});
  auto sum = riemann_sum(g.phi, items);
  for (std::size_t n = 0; n < 4; ++n) REQUIRE(sum[n] == ratio(1, 2 * static_cast<long>(n + 1)));

  auto big = phi_3G(16);
  McShaneOptions opt;
  opt.tolerance = pow2_rational(-12);
  auto est = mcshane_integrate(big.phi, opt);
  REQUIRE(est.status == Status::converged);
  for (std::size_t n = 0; n < 16; ++n)
    REQUIRE(abs(est.value[n] - ratio(1, 2 * static_cast<long>(n + 1))) <= pow2_rational(-12));
}

TEST_CASE("indefinite integral is additive", "[mcshane][property]") {
  gen::Rng rng(54);
  auto c = random_poly(rng);
  McShaneOptions opt;
  opt.tolerance = pow2_rational(-10);
  for (int i = 0; i < 6; ++i) {
    Region E = rng.region(3, 2), F = rng.region(3, 2) - E;
    auto a = indefinite_integral(c.phi, E, opt).value[0];
    auto b = indefinite_integral(c.phi, F, opt).value[0];
    auto u = indefinite_integral(c.phi, E | F, opt).value[0];
    REQUIRE(abs(u - a - b) <= 3 * opt.tolerance);
  }
}

TEST_CASE("pettis check on gallery integrands", "[pettis]") {
  auto g = phi_3G(8);
  std::vector<DualFunctional> fs;
  for (std::size_t n = 0; n < 8; ++n) fs.push_back(DualFunctional::coordinate(n));
  auto blocks = dyadic_blocks(6);
  McShaneOptions opt;
  opt.tolerance = pow2_rational(-10);
  auto rep = pettis_check(g.phi, fs, blocks, pow2_rational(-10), opt);
  REQUIRE(rep.pass);
  REQUIRE(rep.max_residual <= pow2_rational(-10));
  for (const auto &row : rep.rows) {
    Rational expect = row.functional == row.region ? ratio(1, 2 * static_cast<long>(row.functional + 1)) : Rational(0);
    REQUIRE(row.exact == expect);
  }
}

TEST_CASE("interval series tails for 3G", "[series]") {
  const std::size_t R = 12, N = 8;
  auto g = phi_3G(R);
  std::vector<Interval> blocks;
  for (std::size_t i = 0; i < N; ++i)
    blocks.emplace_back(Dyadic::pow2(-static_cast<int>(i) - 1), Dyadic::pow2(-static_cast<int>(i)));
  McShaneOptions opt;
  opt.tolerance = pow2_rational(-10);
  auto rep = interval_series_check(g.phi, blocks, N, pow2_rational(-10), opt);
  REQUIRE(rep.partial_sums.size() == N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    double tail = 0;
    for (std::size_t n = j; n < N; ++n) tail += 1.0 / (4.0 * (n + 1) * (n + 1));
    double got = rep.tails[j].approx();
    REQUIRE(std::abs(got - std::sqrt(tail)) <= std::ldexp(1.0, -10));
  }
}

TEST_CASE("absolute continuity table is monotone and bounded", "[abscont]") {
  auto f = phi_3F(6);
  std::vector<Rational> etas;
  for (int k = 1; k <= 8; ++k) etas.push_back(pow2_rational(-k));
  auto rows = absolute_continuity(f.phi, etas);
  auto M = *sup_norm_bound(f.phi);
  std::sort(rows.begin(), rows.end(), [](const ModulusRow &a, const ModulusRow &b) { return a.eta < b.eta; });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].modulus <= M * rows[i].eta);
    if (i > 0) REQUIRE(rows[i - 1].modulus <= rows[i].modulus);
  }
}

TEST_CASE("sup norm bounds and lower norm integrals", "[norms]") {
  REQUIRE(*sup_norm_bound(identity()) == 1);
  REQUIRE(*sup_norm_bound(phi_3G(5).phi) == Rational(16, 5));
  // Lower Darboux of t over cells of depth d: (1 - 2^-d)/2.
  for (int d = 0; d <= 10; ++d) REQUIRE(lower_norm_integral(identity(), d) == (1 - pow2_rational(-d)) / 2);
  Rational prev = 0;
  for (std::size_t N : {5u, 10u, 20u, 40u, 55u}) {
    auto low = lower_norm_integral(phi_3G(N).phi, static_cast<int>(N));
    REQUIRE(low == harmonic_half(N));
    REQUIRE(prev <= low);
    prev = low;
  }
  REQUIRE(prev > 2);
  // Point values do not lower the integral.
  REQUIRE(lower_norm_integral(spike(3), 12) == 1);
}

TEST_CASE("talagrand means are deterministic and unbiased", "[talagrand]") {
  auto a = talagrand_integrate(identity(), 7, 2000, 10);
  auto b = talagrand_integrate(identity(), 7, 2000, 10);
  REQUIRE(a.pooled == b.pooled);
  REQUIRE(a.sigma == b.sigma);
  auto c = talagrand_integrate(identity(), 8, 2000, 10);
  REQUIRE(!(a.pooled == c.pooled));
  REQUIRE(std::abs(a.pooled[0].get_d() - 0.5) < 0.02);
  for (double s : a.sigma) REQUIRE(std::abs(s - std::sqrt(1.0 / 12)) < 0.02);
}

TEST_CASE("bochner certificates and refusals", "[bochner]") {
  auto eps = pow2_rational(-8);
  auto res = bochner_integrate(identity(), eps);
  REQUIRE(std::holds_alternative<BochnerCertificate>(res));
  auto &cert = std::get<BochnerCertificate>(res);
  REQUIRE(cert.dom_bound <= eps);
  REQUIRE(abs(cert.value[0] - Rational(1, 2)) <= eps);
  Dyadic covered;
  for (const auto &[r, v] : cert.parts) covered += r.measure();
  REQUIRE(covered == Dyadic(1));

  auto f = bochner_integrate(phi_3F(8).phi, eps);
  REQUIRE(std::holds_alternative<NotApproximable>(f));
  REQUIRE(std::get<NotApproximable>(f).bound >= Rational(49, 100));
}

TEST_CASE("uniform integrability flags spikes", "[vitali]") {
  std::vector<Integrand> fam;
  for (int j = 0; j <= 6; ++j) fam.push_back(spike(j));
  std::vector<Rational> etas;
  for (int j = 0; j <= 6; ++j) etas.push_back(pow2_rational(-j));
  auto rows = uniform_integrability(fam, {DualFunctional::coordinate(0)}, etas);
  for (const auto &row : rows) REQUIRE(row.modulus >= 1);
}

TEST_CASE("vitali harness", "[vitali]") {
  const std::size_t R = 8;
  auto g = phi_3G(R);
  std::vector<Region> cover;
  for (std::size_t i = 0; i < 2 * R; ++i) cover.push_back(Region::of(Interval(Dyadic::pow2(-static_cast<int>(i) - 1), Dyadic(1))));
  std::vector<DualFunctional> fs;
  for (std::size_t n = 0; n < R; ++n) fs.push_back(DualFunctional::coordinate(n));
  VitaliOptions opt;
  cover.push_back(Region::unit());
  opt.n_max = static_cast<int>(2 * R);
  opt.mcshane.tolerance = opt.tau;
  auto seq = truncation_sequence(g.phi, cover);
  // A single-set cover reproduces φ.
  auto whole = truncation_sequence(g.phi, {Region::unit()});
  REQUIRE(whole(0)(Dyadic::from_index(3, 3)) == g.phi(Dyadic::from_index(3, 3)));
  auto regions = dyadic_blocks(6);
  regions.push_back(Region::unit());
  auto rep = vitali_limit(seq, g.phi, fs, regions, opt);
  REQUIRE(rep.h1);
  REQUIRE(rep.h2);
  REQUIRE(rep.c);

  auto s = scalar();
  auto zero = Integrand::constant(VectorValue::zero(s));
  VitaliOptions so;
  so.n_max = 10;
  so.mcshane.tolerance = so.tau;
  std::vector<Region> prefixes;
  for (int j = 0; j <= 10; ++j) prefixes.push_back(Region::of(Interval(Dyadic(0), Dyadic::pow2(-j))));
  auto bad = vitali_limit([](int j) { return spike(j); }, zero, {DualFunctional::coordinate(0)}, prefixes, so);
  REQUIRE((!bad.h2 || !bad.c));
  REQUIRE(!bad.violations.empty());
}

TEST_CASE("norm bound holds whenever mcshane converges", "[mcshane][property]") {
  McShaneOptions opt;
  opt.tolerance = pow2_rational(-10);
  std::vector<Integrand> cases{identity(), phi_3G(8).phi, phi_3F(6).phi, spike(3)};
  gen::Rng rng(55);
  for (int i = 0; i < 3; ++i) cases.push_back(random_poly(rng).phi);
  for (const auto &phi : cases) {
    auto est = mcshane_integrate(phi, opt);
    if (est.status != Status::converged) continue;
    for (int depth : {12, 16})
      REQUIRE(norm(est.value).lo <= lower_norm_integral(phi, depth) + est.oscillation + opt.tolerance);
  }
}
