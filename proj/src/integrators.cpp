#include "gaugelab/integrators.hpp"

#include "gaugelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace gaugelab {

std::string to_string(Status s) {
  switch (s) {
  case Status::converged:
    return "converged";
  case Status::oscillation_floor:
    return "oscillation-floor";
  case Status::max_level:
    return "max-level";
  }
  return "?";
}

Gauge auto_gauge(const Integrand &phi, int level) {
  if (!phi.piecewise() || phi.pieces() == 1) return Gauge::constant(pow2_rational(-level));
  auto breaks = std::make_shared<const std::vector<Dyadic>>(phi.breaks());
  auto fn = [breaks, level](const Dyadic &t) -> Dyadic {
    const auto &b = *breaks;
    auto up = std::upper_bound(b.begin(), b.end(), t);
    auto j = std::min<std::size_t>(up == b.begin() ? 0 : up - b.begin() - 1, b.size() - 2);
    Dyadic delta = (b[j + 1] - b[j]).scaled_down(level);
    if (t == b[j] || t == b[j + 1]) return delta;
    // Interior breakpoints only; the ends of [0,1] do not cap the gauge.
    if (j > 0) delta = min(delta, t - b[j]);
    if (j + 2 < b.size()) delta = min(delta, b[j + 1] - t);
    return delta;
  };
  return Gauge::dyadic_evaluator(fn, std::nullopt, "auto:2^-" + std::to_string(level));
}

namespace {

TagStrategy trial_strategy(int trial) {
  switch (trial) {
  case 0:
    return TagStrategy::mid;
  case 2:
    return TagStrategy::left;
  default:
    return TagStrategy::sampled;
  }
}

Rational max_pairwise_distance(const std::vector<VectorValue> &values) {
  Rational worst = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      auto d = distance(values[i], values[j]).hi;
      if (d > worst) worst = d;
    }
  return worst;
}

} // namespace

IntegralEstimate mcshane_integrate(const Integrand &phi, const McShaneOptions &opt) {
  if (sgn(opt.tolerance) <= 0) throw std::invalid_argument("tolerance must be positive");
  if (opt.trials < 1) throw std::invalid_argument("trials must be >= 1");
  const bool automatic = opt.schedule.empty();
  const int levels = automatic ? opt.max_level + 1 : static_cast<int>(opt.schedule.size());

  IntegralEstimate est;
  est.value = VectorValue::zero(phi.space());
  std::optional<Rational> best;
  int best_level = 0;
  for (int level = 0; level < levels; ++level) {
    Gauge g = automatic ? auto_gauge(phi, level) : opt.schedule[level];
    std::vector<VectorValue> sums;
    std::size_t cells = 0;
    for (int trial = 0; trial < opt.trials; ++trial) {
      CousinOptions co;
      co.flavor = Flavor::mcshane;
      co.strategy = trial_strategy(trial);
      co.max_depth = opt.max_depth;
      co.seed = splitmix64(opt.seed ^ (std::uint64_t(level) << 32) ^ std::uint64_t(trial));
      auto p = cousin_partition(g, co);
      if (trial == 0) cells = p.items.size();
      sums.push_back(riemann_sum(phi, p));
    }
    Rational osc = max_pairwise_distance(sums);
    est.gauge_trace.push_back({level, g.label(), cells, osc});
    est.value = sums.front();
    est.oscillation = osc;
    if (osc <= opt.tolerance) {
      est.status = Status::converged;
      return est;
    }
    if (!best || osc < *best) {
      best = osc;
      best_level = level;
    } else if (level - best_level >= opt.floor_window) {
      est.status = Status::oscillation_floor;
      return est;
    }
    if (automatic && cells * 2 > opt.max_cells) break;
  }
  est.status = Status::max_level;
  return est;
}

IntegralEstimate indefinite_integral(const Integrand &phi, const Region &r, const McShaneOptions &opt) {
  if (r.measure().is_zero()) {
    IntegralEstimate est;
    est.value = VectorValue::zero(phi.space());
    est.oscillation = 0;
    est.status = Status::converged;
    return est;
  }
  return mcshane_integrate(restrict_integrand(phi, r), opt);
}

PettisReport pettis_check(const Integrand &phi, const std::vector<DualFunctional> &functionals,
                          const std::vector<Region> &regions, const Rational &tau, const McShaneOptions &opt) {
  std::vector<ScalarTrace> traces;
  traces.reserve(functionals.size());
  for (const auto &f : functionals) traces.push_back(scalar_trace(f, phi));
  PettisReport rep;
  rep.max_residual = 0;
  for (std::size_t e = 0; e < regions.size(); ++e) {
    auto nu = indefinite_integral(phi, regions[e], opt).value;
    for (std::size_t i = 0; i < functionals.size(); ++i) {
      PettisRow row{i, e, functionals[i].apply(nu), traces[i].integral(regions[e]), 0};
      row.residual = abs(row.from_integral - row.exact);
      if (row.residual > rep.max_residual) rep.max_residual = row.residual;
      if (row.residual > tau) ++rep.failures;
      rep.rows.push_back(std::move(row));
    }
  }
  rep.pass = rep.failures == 0;
  return rep;
}

SeriesReport interval_series_check(const Integrand &phi, const std::vector<Interval> &blocks, std::size_t N,
                                   const Rational &tau, const McShaneOptions &opt) {
  if (blocks.size() < N) throw std::invalid_argument("fewer blocks than N");
  Dyadic total;
  std::vector<Interval> used(blocks.begin(), blocks.begin() + static_cast<std::ptrdiff_t>(N));
  for (const auto &b : used) total += b.length();
  if (Region::normalize(used).measure() != total) throw std::invalid_argument("blocks overlap");

  SeriesReport rep;
  rep.partial_sums.push_back(VectorValue::zero(phi.space()));
  for (std::size_t i = 0; i < N; ++i)
    rep.partial_sums.push_back(rep.partial_sums.back() + indefinite_integral(phi, Region::of(used[i]), opt).value);
  for (std::size_t j = 0; j <= N; ++j) rep.tails.push_back(distance(rep.partial_sums[N], rep.partial_sums[j]));
  rep.cauchy = 0;
  for (std::size_t j = N / 2; j <= N; ++j)
    for (std::size_t k = j + 1; k <= N; ++k) {
      auto d = distance(rep.partial_sums[k], rep.partial_sums[j]).hi;
      if (d > rep.cauchy) rep.cauchy = d;
    }
  rep.pass = rep.cauchy <= tau;
  return rep;
}

namespace {

unsigned resolution_for(const Rational &eta) {
  unsigned depth = 4;
  while (depth < 48 && Dyadic::pow2(-static_cast<int>(depth)).to_rational() * 8 > eta) ++depth;
  return depth;
}

Dyadic draw_below(CounterStream &rng, const Dyadic &limit, unsigned depth) {
  // uniform multiple of 2^-depth in [0, limit]
  auto top = limit.floor_index(depth);
  if (top <= 0) return Dyadic(0);
  auto k = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(top) + 1));
  return Dyadic::from_index(k, depth);
}

} // namespace

std::vector<Region> sample_small_regions(const Rational &eta, std::size_t count, std::uint64_t seed,
                                         std::uint64_t stream) {
  std::vector<Region> out;
  if (sgn(eta) <= 0) return out;
  unsigned depth = resolution_for(eta);
  Dyadic budget = min(floor_dyadic(eta, depth), Dyadic(1));
  out.push_back(Region::of(Interval(Dyadic(0), budget)));
  out.push_back(Region::of(Interval(Dyadic(1) - budget, Dyadic(1))));
  CounterStream rng(seed, stream);
  for (std::size_t s = 0; s < count; ++s) {
    int pieces = 1 + static_cast<int>(rng.below(3));
    Dyadic left = budget;
    std::vector<Interval> ivs;
    for (int p = 0; p < pieces; ++p) {
      Dyadic len = draw_below(rng, left, depth);
      left -= len;
      Dyadic start = draw_below(rng, Dyadic(1) - len, depth);
      ivs.emplace_back(start, start + len);
    }
    out.push_back(Region::normalize(std::move(ivs)));
  }
  return out;
}

namespace {

template <class Eval>
std::vector<ModulusRow> pooled_modulus(const std::vector<Rational> &eta_grid, std::size_t samples,
                                       std::uint64_t seed, Eval eval) {
  std::vector<std::pair<Rational, Rational>> seen; // (measure, value)
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < eta_grid.size(); ++i)
    for (const auto &r : sample_small_regions(eta_grid[i], samples, seed, i))
      seen.emplace_back(r.measure().to_rational(), eval(r));
  std::vector<ModulusRow> rows;
  for (const auto &eta : eta_grid) {
    ModulusRow row{eta, 0, 0};
    for (const auto &[m, v] : seen)
      if (m <= eta) {
        ++row.regions;
        if (v > row.modulus) row.modulus = v;
      }
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace

std::vector<ModulusRow> absolute_continuity(const Integrand &phi, const std::vector<Rational> &eta_grid,
                                            const AbsContOptions &opt) {
  return pooled_modulus(eta_grid, opt.samples_per_eta, opt.seed, [&](const Region &r) {
    if (opt.exact_nu && phi.piecewise()) return norm(exact_integral(phi, r)).hi;
    return norm(indefinite_integral(phi, r, opt.mcshane).value).hi;
  });
}

std::vector<ModulusRow> uniform_integrability(const std::vector<Integrand> &family,
                                              const std::vector<DualFunctional> &functionals,
                                              const std::vector<Rational> &eta_grid, std::size_t samples_per_eta,
                                              std::uint64_t seed) {
  std::vector<ScalarTrace> traces;
  for (const auto &phi : family)
    for (const auto &f : functionals) traces.push_back(scalar_trace(f, phi));
  return pooled_modulus(eta_grid, samples_per_eta, seed, [&](const Region &r) {
    Rational best = 0;
    for (const auto &tr : traces) {
      auto v = abs(tr.integral(r));
      if (v > best) best = v;
    }
    return best;
  });
}

namespace {

// Lower bound on ||p(t)|| for t in [a,b] from the Taylor expansion about the midpoint.
Rational taylor_lower(const Integrand &phi, std::size_t j, const Dyadic &a, const Dyadic &b) {
  const auto &c = phi.coeffs(j);
  if (c.size() == 1) return norm(c.front()).lo;
  auto T = phi.taylor_at(j, Dyadic::midpoint(a, b));
  Rational h = (b - a).half().to_rational(), hk = h;
  Rational bound = norm(T[0]).lo;
  for (std::size_t k = 1; k < T.size(); ++k, hk *= h) bound -= norm(T[k]).hi * hk;
  return sgn(bound) > 0 ? bound : Rational(0);
}

Rational taylor_upper_deviation(const Integrand &phi, std::size_t j, const Dyadic &a, const Dyadic &b) {
  auto T = phi.taylor_at(j, Dyadic::midpoint(a, b));
  Rational h = (b - a).half().to_rational(), hk = h, dev = 0;
  for (std::size_t k = 1; k < T.size(); ++k, hk *= h) dev += norm(T[k]).hi * hk;
  return dev;
}

class LowerDarboux {
public:
  LowerDarboux(const Integrand &phi, int depth) : phi_(phi), depth_(depth) {}

  Rational run() { return cell(Dyadic(0), Dyadic(1), 0, Rational(0)); }

private:
  // Lower bound for the essential infimum of ||φ|| over [a,b]. Point
  // overrides form a null set and are ignored.
  Rational infimum(const Dyadic &a, const Dyadic &b, std::size_t j0, std::size_t j1) {
    std::optional<Rational> inf;
    for (std::size_t j = j0; j <= j1; ++j) {
      Rational v = taylor_lower(phi_, j, max(a, phi_.breaks()[j]), min(b, phi_.breaks()[j + 1]));
      if (!inf || v < *inf) inf = std::move(v);
    }
    return *inf;
  }

  Rational cell(const Dyadic &a, const Dyadic &b, int level, const Rational &parent) {
    std::size_t j0 = phi_.piece_of(a);
    const auto &br = phi_.breaks();
    std::size_t j1 = j0;
    while (j1 + 1 < phi_.pieces() && br[j1 + 1] < b) ++j1;
    Rational len = (b - a).to_rational();
    if (j0 == j1 && phi_.coeffs(j0).size() == 1) return len * norm(phi_.coeffs(j0).front()).lo;
    Rational bound = infimum(a, b, j0, j1);
    if (bound < parent) bound = parent;
    if (level >= depth_) return len * bound;
    Dyadic m = Dyadic::midpoint(a, b);
    return cell(a, m, level + 1, bound) + cell(m, b, level + 1, bound);
  }

  const Integrand &phi_;
  int depth_;
};

} // namespace

std::optional<Rational> sup_norm_bound(const Integrand &phi) {
  if (!phi.piecewise()) return phi.sup_bound();
  Rational best = 0;
  const auto &br = phi.breaks();
  for (std::size_t j = 0; j < phi.pieces(); ++j) {
    Dyadic mid = Dyadic::midpoint(br[j], br[j + 1]);
    Rational b = norm(phi.piece_value(j, mid)).hi;
    if (phi.coeffs(j).size() > 1) b += taylor_upper_deviation(phi, j, br[j], br[j + 1]);
    if (b > best) best = b;
  }
  for (const auto &[t, v] : phi.point_values()) best = std::max(best, norm(v).hi);
  return best;
}

Rational lower_norm_integral(const Integrand &phi, int depth) {
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  if (phi.piecewise()) return LowerDarboux(phi, depth).run();
  if (depth > 20) throw std::invalid_argument("sampled lower integral limited to depth 20");
  // Sampled minimum at both ends and the midpoint of each cell.
  Rational total = 0;
  const std::int64_t cells = std::int64_t(1) << depth;
  Rational len = pow2_rational(-depth);
  for (std::int64_t i = 0; i < cells; ++i) {
    Dyadic a = Dyadic::from_index(i, depth), b = Dyadic::from_index(i + 1, depth);
    Rational m = norm(phi(a)).lo;
    for (const auto &t : {Dyadic::midpoint(a, b), b}) m = std::min(m, norm(phi(t)).lo);
    total += len * m;
  }
  return total;
}

TalagrandResult talagrand_integrate(const Integrand &phi, std::uint64_t seed, std::size_t n, std::size_t batches) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (batches < 1) throw std::invalid_argument("batches must be >= 1");
  constexpr unsigned bits = 53;
  const auto &space = phi.space();
  TalagrandResult res;

  // Piece boundaries as thresholds on the 53-bit sample index: piece j holds
  // samples k with ceil(p_j 2^53) <= k.
  std::vector<std::uint64_t> thresholds;
  std::map<std::uint64_t, VectorValue> exact_points;
  std::size_t deg = 0;
  std::vector<std::vector<std::vector<double>>> coeffs_d;
  if (phi.piecewise()) {
    deg = phi.degree();
    for (const auto &p : phi.breaks()) {
      Integer scaled = p.numerator();
      if (p.exponent() <= bits) {
        scaled <<= (bits - p.exponent());
      } else {
        mpz_cdiv_q_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), p.exponent() - bits);
      }
      thresholds.push_back(scaled.get_ui());
    }
    for (const auto &[t, v] : phi.point_values())
      if (t.exponent() <= bits) exact_points.emplace(Integer(t.numerator() << (bits - t.exponent())).get_ui(), v);
    for (std::size_t j = 0; j < phi.pieces(); ++j) {
      std::vector<std::vector<double>> cd;
      for (const auto &c : phi.coeffs(j)) cd.push_back(c.to_doubles());
      coeffs_d.push_back(std::move(cd));
    }
  }

  for (std::size_t b = 0; b < batches; ++b) {
    VectorValue sum = VectorValue::zero(space);
    double sumsq = 0;
    if (phi.piecewise()) {
      std::vector<std::vector<Integer>> psum(phi.pieces());
      std::vector<std::vector<double>> psum_d(phi.pieces());
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t k = counter_bits(seed, b, i) >> 11;
        if (!exact_points.empty()) {
          if (auto it = exact_points.find(k); it != exact_points.end()) {
            sum += it->second;
            for (double x : it->second.to_doubles()) sumsq += x * x;
            continue;
          }
        }
        auto up = std::upper_bound(thresholds.begin(), thresholds.end(), k);
        std::size_t j = std::min<std::size_t>(up - thresholds.begin() - 1, phi.pieces() - 1);
        auto &ps = psum[j];
        auto &pd = psum_d[j];
        if (ps.empty()) {
          ps.assign(deg + 1, Integer(0));
          pd.assign(2 * deg + 1, 0.0);
        }
        Integer kk(static_cast<unsigned long>(k)), term(1);
        for (std::size_t p = 0; p <= deg; ++p) {
          ps[p] += term;
          if (p < deg) term *= kk;
        }
        double s = std::ldexp(static_cast<double>(k), -static_cast<int>(bits)), sp = 1;
        for (std::size_t p = 0; p <= 2 * deg; ++p, sp *= s) pd[p] += sp;
      }
      for (std::size_t j = 0; j < phi.pieces(); ++j) {
        if (psum[j].empty()) continue;
        const auto &c = phi.coeffs(j);
        for (std::size_t p = 0; p < c.size(); ++p)
          sum.add_scaled(Dyadic(psum[j][p], static_cast<unsigned>(bits * p)).to_rational(), c[p]);
        const auto &cd = coeffs_d[j];
        for (std::size_t p = 0; p < cd.size(); ++p)
          for (std::size_t q = 0; q < cd.size(); ++q) {
            double dot = 0;
            for (std::size_t x = 0; x < cd[p].size(); ++x) dot += cd[p][x] * cd[q][x];
            sumsq += dot * psum_d[j][p + q];
          }
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        auto v = phi(uniform_dyadic(counter_bits(seed, b, i)));
        for (double x : v.to_doubles()) sumsq += x * x;
        sum += v;
      }
    }
    sum *= Rational(1, n);
    double mean_sq = 0;
    for (double x : sum.to_doubles()) mean_sq += x * x;
    double var = n > 1 ? std::max(0.0, (sumsq - n * mean_sq) / static_cast<double>(n - 1)) : 0.0;
    res.sigma.push_back(std::sqrt(var));
    res.means.push_back(std::move(sum));
  }
  res.pooled = VectorValue::zero(space);
  for (const auto &m : res.means) res.pooled += m;
  res.pooled *= Rational(1, batches);
  res.spread = max_pairwise_distance(res.means);
  return res;
}

BochnerResult bochner_integrate(const Integrand &phi, const Rational &epsilon, int max_depth) {
  if (sgn(epsilon) <= 0) throw std::invalid_argument("epsilon must be positive");
  if (phi.separation()) {
    // If distinct values are pairwise d apart, any vector lies within d/2 of
    // at most one value of φ, taken on a null set; so ||φ - ψ|| >= d/2 a.e.
    return NotApproximable{*phi.separation() / 2,
                           "values pairwise separated by " + rational_str(*phi.separation()) +
                               ": every simple function is at distance >= half of it almost everywhere"};
  }
  if (!phi.piecewise())
    throw UnsupportedExactIntegration("bochner_integrate needs a piecewise integrand");
  const auto &br = phi.breaks();
  for (int depth = 0; depth <= max_depth; ++depth) {
    BochnerCertificate cert;
    cert.value = VectorValue::zero(phi.space());
    cert.dom_bound = 0;
    for (std::size_t j = 0; j < phi.pieces(); ++j) {
      const bool flat = phi.coeffs(j).size() == 1;
      const int d = flat ? 0 : depth;
      Dyadic len = (br[j + 1] - br[j]).scaled_down(static_cast<unsigned>(d));
      for (std::int64_t i = 0; i < (std::int64_t(1) << d); ++i) {
        Dyadic a = br[j] + Dyadic(i) * len, b = a + len;
        VectorValue x = phi.piece_value(j, Dyadic::midpoint(a, b));
        if (!flat) cert.dom_bound += len.to_rational() * taylor_upper_deviation(phi, j, a, b);
        cert.value.add_scaled(len.to_rational(), x);
        cert.parts.emplace_back(Region::of(Interval(a, b)), std::move(x));
      }
    }
    if (phi.cls() == Integrand::Class::piecewise_step) {
      cert.epsilon = 0;
      return cert;
    }
    if (cert.dom_bound <= epsilon) {
      cert.epsilon = epsilon;
      return cert;
    }
  }
  throw std::runtime_error("bochner_integrate: refinement budget exhausted");
}

VitaliReport vitali_limit(const IntegrandSequence &seq, const Integrand &limit,
                          const std::vector<DualFunctional> &functionals, const std::vector<Region> &regions,
                          const VitaliOptions &opt) {
  VitaliReport rep;
  const Integrand last = seq(opt.n_max);

  rep.h1_residual = 0;
  CounterStream rng(opt.seed, 0x7669);
  std::vector<Dyadic> points{Dyadic(0), Dyadic(1)};
  for (std::size_t i = 0; i < opt.pointwise_samples; ++i) points.push_back(rng.uniform());
  for (const auto &t : points) {
    VectorValue diff = last(t) - limit(t);
    Rational r = 0;
    if (opt.weak_h1) {
      for (const auto &f : functionals) r = std::max(r, Rational(abs(f.apply(diff))));
    } else {
      r = norm(diff).hi;
    }
    if (r > rep.h1_residual) rep.h1_residual = r;
  }
  rep.h1 = rep.h1_residual <= opt.tau;
  if (!rep.h1) rep.violations.push_back("H1: pointwise residual " + rational_str(rep.h1_residual) + " at n_max");

  std::vector<std::vector<ScalarTrace>> tail;
  for (int n = opt.n_max / 2; n <= opt.n_max; ++n) {
    auto phi_n = seq(n);
    std::vector<ScalarTrace> tr;
    for (const auto &f : functionals) tr.push_back(scalar_trace(f, phi_n));
    tail.push_back(std::move(tr));
  }
  rep.h2_residual = 0;
  for (std::size_t e = 0; e < regions.size(); ++e)
    for (std::size_t i = 0; i < functionals.size(); ++i) {
      std::optional<Rational> lo, hi;
      for (const auto &tr : tail) {
        Rational v = tr[i].integral(regions[e]);
        if (!lo || v < *lo) lo = v;
        if (!hi || v > *hi) hi = v;
      }
      Rational spread = *hi - *lo;
      if (spread > rep.h2_residual) rep.h2_residual = spread;
    }
  rep.h2 = rep.h2_residual <= opt.tau;
  if (!rep.h2) rep.violations.push_back("H2: tail of scalar integrals spreads by " + rational_str(rep.h2_residual));

  auto est = mcshane_integrate(limit, opt.mcshane);
  rep.c_residual = distance(est.value, exact_integral(last, Region::unit())).hi;
  rep.c = rep.c_residual <= 3 * opt.tau;
  rep.c_claimed = rep.h1 && rep.h2;
  if (!rep.c)
    rep.violations.push_back("C: integral of the limit differs from the limit of integrals by " +
                             rational_str(rep.c_residual));
  return rep;
}

} // namespace gaugelab
