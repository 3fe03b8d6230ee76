#include "gaugelab/stability.hpp"

#include "gaugelab/rng.hpp"

#include <cmath>

namespace gaugelab {

FunctionFamily trace_family(const Integrand &phi, const std::vector<DualFunctional> &functionals) {
  FunctionFamily A;
  A.cls = phi.cls() == Integrand::Class::piecewise_step ? FunctionFamily::Class::piecewise_step
                                                        : FunctionFamily::Class::evaluator;
  for (std::size_t i = 0; i < functionals.size(); ++i) {
    auto tr = std::make_shared<ScalarTrace>(scalar_trace(functionals[i], phi));
    A.members.push_back({functionals[i].describe(), [tr](const Dyadic &t) { return (*tr)(t); }});
  }
  return A;
}

bool z_member(const FunctionFamily &A, const std::vector<Dyadic> &t, const std::vector<Dyadic> &u,
              const Rational &alpha, const Rational &beta) {
  for (const auto &f : A.members) {
    bool ok = true;
    for (const auto &x : t)
      if (!(f.eval(x) <= alpha)) {
        ok = false;
        break;
      }
    if (!ok) continue;
    for (const auto &x : u)
      if (!(f.eval(x) >= beta)) {
        ok = false;
        break;
      }
    if (ok) return true;
  }
  return false;
}

ZEstimate z_measure_mc(const FunctionFamily &A, const ZQuery &q, std::size_t samples, std::uint64_t seed) {
  if (q.m < 1 || q.n < 1) throw std::invalid_argument("m and n must be positive");
  if (!(q.alpha < q.beta)) throw std::invalid_argument("need alpha < beta");
  if (samples < 1) throw std::invalid_argument("samples must be positive");
  const double mu = q.E.measure().to_double();
  if (mu <= 0) throw std::invalid_argument("E must have positive measure");
  ZEstimate z;
  z.samples = samples;
  z.threshold = std::pow(mu, q.m + q.n);
  if (!A.members.empty()) {
    std::vector<Dyadic> t(q.m), u(q.n);
    for (std::size_t s = 0; s < samples; ++s) {
      std::uint64_t idx = 0;
      for (auto &x : t) x = point_in(q.E, uniform_dyadic(counter_bits(seed, s, idx++)));
      for (auto &x : u) x = point_in(q.E, uniform_dyadic(counter_bits(seed, s, idx++)));
      if (z_member(A, t, u, q.alpha, q.beta)) ++z.hits;
    }
  }
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(z.hits) / n;
  z.estimate = p * z.threshold;
  z.half_width = (1.96 * std::sqrt(p * (1 - p) / n) + 0.5 / n) * z.threshold;
  return z;
}

std::string to_string(ScanOutcome o) {
  switch (o) {
  case ScanOutcome::witness:
    return "witness";
  case ScanOutcome::inconclusive:
    return "inconclusive";
  case ScanOutcome::exhausted:
    return "exhausted";
  }
  return "?";
}

std::vector<ScanCell> stability_scan(const FunctionFamily &A, const ScanParams &params) {
  if (!(params.margin > 0)) throw std::invalid_argument("margin must be positive");
  std::vector<ScanCell> out;
  for (std::size_t e = 0; e < params.regions.size(); ++e)
    for (const auto &[alpha, beta] : params.levels) {
      ScanCell cell;
      cell.region = e;
      cell.alpha = alpha;
      cell.beta = beta;
      bool below = false;
      for (int total = 2; total <= 2 * params.mn_max && cell.outcome != ScanOutcome::witness; ++total)
        for (int m = 1; m <= params.mn_max; ++m) {
          int n = total - m;
          if (n < 1 || n > params.mn_max) continue;
          ZQuery q{params.regions[e], m, n, alpha, beta};
          auto z = z_measure_mc(A, q, params.samples, params.seed);
          cell.tried.push_back({m, n, z});
          if (z.estimate + z.half_width + params.margin < z.threshold) {
            cell.outcome = ScanOutcome::witness;
            cell.m = m;
            cell.n = n;
            break;
          }
          if (z.hits < z.samples) below = true;
        }
      if (cell.outcome != ScanOutcome::witness)
        cell.outcome = below ? ScanOutcome::inconclusive : ScanOutcome::exhausted;
      out.push_back(std::move(cell));
    }
  return out;
}

namespace {

// Area of {(x,y) in [a1,b1]×[a2,b2] : x + y <= s}.
Dyadic area_below(const Interval &x, const Interval &y, const Dyadic &s) {
  auto G = [](const Dyadic &z) { return z.sign() > 0 ? (z * z).half() : Dyadic(0); };
  return G(s - x.lo - y.lo) - G(s - x.hi - y.lo) - G(s - x.lo - y.hi) + G(s - x.hi - y.hi);
}

} // namespace

Rational pairsum_z_bound(const Region &H, const Region &E) {
  Dyadic total;
  for (const auto &x : E.parts())
    for (const auto &y : E.parts()) {
      Dyadic lo = x.lo + y.lo, hi = x.hi + y.hi;
      for (const auto &h : H.parts()) {
        if (h.hi < lo || hi < h.lo) continue;
        total += area_below(x, y, h.hi) - area_below(x, y, h.lo);
      }
    }
  return total.to_rational();
}

ProbeReport properly_measurable_probe(const Integrand &phi, const std::vector<DualFunctional> &functionals,
                                      const ScanParams &params) {
  ProbeReport rep;
  rep.cells = stability_scan(trace_family(phi, functionals), params);
  rep.note = "finite-sample probe over " + std::to_string(functionals.size()) +
             " functionals; witnesses suggest stability of the sampled traces, they do not prove it";
  return rep;
}

} // namespace gaugelab
