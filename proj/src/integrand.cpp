#include "gaugelab/integrand.hpp"

#include <algorithm>

namespace gaugelab {

namespace {

void check_breaks(const std::vector<Dyadic> &breaks, std::size_t pieces) {
  if (breaks.size() < 2 || breaks.size() != pieces + 1)
    throw std::invalid_argument("integrand needs n+1 breakpoints for n pieces");
  if (breaks.front() != Dyadic(0) || breaks.back() != Dyadic(1))
    throw std::invalid_argument("integrand breakpoints must span [0,1]");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i - 1] < breaks[i]))
      throw std::invalid_argument("integrand breakpoints must be strictly increasing");
}

std::vector<Dyadic> powers(const Dyadic &t, std::size_t n) {
  std::vector<Dyadic> out;
  out.reserve(n + 1);
  out.emplace_back(1);
  for (std::size_t k = 1; k <= n; ++k) out.push_back(out.back() * t);
  return out;
}

Rational binomial(std::size_t n, std::size_t k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return Rational(r);
}

// Integral of t^k over [a,b] for k = 0..n.
std::vector<Rational> monomial_integrals(const Dyadic &a, const Dyadic &b, std::size_t n) {
  auto pa = powers(a, n + 1), pb = powers(b, n + 1);
  std::vector<Rational> out;
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out.push_back((pb[k + 1] - pa[k + 1]).to_rational() / Rational(k + 1));
  return out;
}

} // namespace

Integrand Integrand::constant(VectorValue c) {
  return step({Dyadic(0), Dyadic(1)}, {std::move(c)}).labelled("const");
}

Integrand Integrand::step(std::vector<Dyadic> breaks, std::vector<VectorValue> levels) {
  std::vector<std::vector<VectorValue>> coeffs;
  coeffs.reserve(levels.size());
  for (auto &v : levels) coeffs.push_back({std::move(v)});
  auto phi = polynomial(std::move(breaks), std::move(coeffs));
  phi.label_ = "step";
  return phi;
}

Integrand Integrand::polynomial(std::vector<Dyadic> breaks, std::vector<std::vector<VectorValue>> coeffs) {
  check_breaks(breaks, coeffs.size());
  if (coeffs.empty() || coeffs.front().empty()) throw std::invalid_argument("empty piece");
  Integrand phi;
  phi.space_ = coeffs.front().front().space();
  bool constant_pieces = true;
  for (const auto &piece : coeffs) {
    if (piece.empty()) throw std::invalid_argument("empty piece");
    for (const auto &c : piece)
      if (!same_space(c.space(), phi.space_)) throw SpaceMismatch("piece coefficients live in different spaces");
    if (piece.size() > 1) constant_pieces = false;
  }
  phi.cls_ = constant_pieces ? Class::piecewise_step : Class::piecewise_polynomial;
  phi.breaks_ = std::move(breaks);
  phi.coeffs_ = std::move(coeffs);
  phi.label_ = constant_pieces ? "step" : "polynomial";
  return phi;
}

Integrand Integrand::evaluator(SpacePtr space, Evaluator fn, std::optional<Rational> sup_bound, std::string label) {
  if (!fn) throw std::invalid_argument("empty integrand evaluator");
  Integrand phi;
  phi.space_ = std::move(space);
  phi.cls_ = Class::evaluator;
  phi.fn_ = std::move(fn);
  phi.sup_bound_ = std::move(sup_bound);
  phi.label_ = std::move(label);
  return phi;
}

Integrand Integrand::with_point_values(PointValues points) const {
  Integrand phi = *this;
  for (auto &[t, v] : points) {
    if (t < Dyadic(0) || Dyadic(1) < t) throw std::invalid_argument("point value outside [0,1]");
    if (!same_space(v.space(), space_)) throw SpaceMismatch("point value in a different space");
    phi.points_.insert_or_assign(t, std::move(v));
  }
  return phi;
}

Integrand Integrand::with_separation(Rational d) const {
  Integrand phi = *this;
  phi.separation_ = std::move(d);
  return phi;
}

Integrand Integrand::labelled(std::string label) const {
  Integrand phi = *this;
  phi.label_ = std::move(label);
  return phi;
}

std::size_t Integrand::piece_of(const Dyadic &t) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  if (it == breaks_.begin()) return 0;
  auto idx = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  return std::min(idx, coeffs_.size() - 1);
}

std::size_t Integrand::degree() const {
  std::size_t d = 0;
  for (const auto &piece : coeffs_) d = std::max(d, piece.size() - 1);
  return d;
}

VectorValue Integrand::piece_value(std::size_t j, const Dyadic &t) const {
  const auto &c = coeffs_[j];
  if (c.size() == 1) return c.front();
  VectorValue acc = c.back();
  Rational tq = t.to_rational();
  for (std::size_t k = c.size() - 1; k-- > 0;) {
    acc *= tq;
    acc += c[k];
  }
  return acc;
}

VectorValue Integrand::operator()(const Dyadic &t) const {
  if (cls_ == Class::evaluator) {
    auto v = fn_(t);
    if (!same_space(v.space(), space_)) throw SpaceMismatch("evaluator returned a value in another space");
    return v;
  }
  if (!points_.empty()) {
    auto it = points_.find(t);
    if (it != points_.end()) return it->second;
  }
  return piece_value(piece_of(t), t);
}

std::vector<VectorValue> Integrand::taylor_at(std::size_t j, const Dyadic &t) const {
  const auto &c = coeffs_[j];
  auto pw = powers(t, c.size());
  std::vector<VectorValue> out;
  for (std::size_t m = 0; m < c.size(); ++m) {
    VectorValue d = VectorValue::zero(space_);
    for (std::size_t k = m; k < c.size(); ++k) d.add_scaled(binomial(k, m) * pw[k - m].to_rational(), c[k]);
    out.push_back(std::move(d));
  }
  return out;
}

Rational ScalarTrace::operator()(const Dyadic &t) const {
  if (auto it = points.find(t); it != points.end()) return it->second;
  auto up = std::upper_bound(breaks.begin(), breaks.end(), t);
  std::size_t j = up == breaks.begin() ? 0 : static_cast<std::size_t>(up - breaks.begin()) - 1;
  j = std::min(j, coeffs.size() - 1);
  Rational acc = 0, tq = t.to_rational();
  for (std::size_t k = coeffs[j].size(); k-- > 0;) acc = acc * tq + coeffs[j][k];
  return acc;
}

Rational ScalarTrace::integral(const Region &r) const {
  Rational total = 0;
  for (const auto &part : r.parts()) {
    Dyadic lo = max(part.lo, Dyadic(0)), hi = min(part.hi, Dyadic(1));
    if (!(lo < hi)) continue;
    auto j = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), lo) - breaks.begin()) - 1;
    for (; j + 1 < breaks.size() && breaks[j] < hi; ++j) {
      Dyadic a = max(lo, breaks[j]), b = min(hi, breaks[j + 1]);
      if (!(a < b)) continue;
      auto mono = monomial_integrals(a, b, coeffs[j].size() - 1);
      for (std::size_t k = 0; k < coeffs[j].size(); ++k)
        if (sgn(coeffs[j][k]) != 0) total += coeffs[j][k] * mono[k];
    }
  }
  return total;
}

ScalarTrace scalar_trace(const DualFunctional &f, const Integrand &phi) {
  if (!phi.piecewise())
    throw UnsupportedExactIntegration("no closed-form trace for evaluator integrand '" + phi.label() + "'");
  ScalarTrace tr;
  tr.breaks = phi.breaks();
  tr.coeffs.reserve(phi.pieces());
  for (std::size_t j = 0; j < phi.pieces(); ++j) {
    std::vector<Rational> c;
    for (const auto &v : phi.coeffs(j)) c.push_back(f.apply(v));
    tr.coeffs.push_back(std::move(c));
  }
  for (const auto &[t, v] : phi.point_values()) tr.points.emplace(t, f.apply(v));
  return tr;
}

Integrand restrict_integrand(const Integrand &phi, const Region &E) {
  if (!phi.piecewise()) {
    auto space = phi.space();
    return Integrand::evaluator(
        space,
        [phi, E, space](const Dyadic &t) { return E.contains(t) ? phi(t) : VectorValue::zero(space); },
        phi.sup_bound(), phi.label() + "|E");
  }
  std::vector<Dyadic> breaks = phi.breaks();
  for (const auto &b : E.boundary())
    if (Dyadic(0) < b && b < Dyadic(1)) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const auto zero = VectorValue::zero(phi.space());
  std::vector<std::vector<VectorValue>> coeffs;
  coeffs.reserve(breaks.size() - 1);
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    Dyadic mid = Dyadic::midpoint(breaks[j], breaks[j + 1]);
    if (E.contains(mid))
      coeffs.push_back(phi.coeffs(phi.piece_of(mid)));
    else
      coeffs.push_back({zero});
  }
  auto out = Integrand::polynomial(breaks, std::move(coeffs));

  std::vector<Dyadic> probes = breaks;
  for (const auto &[t, v] : phi.point_values()) probes.push_back(t);
  Integrand::PointValues points;
  for (const auto &t : probes) {
    VectorValue want = E.contains(t) ? phi(t) : zero;
    if (!(want == out.piece_value(out.piece_of(t), t))) points.insert_or_assign(t, std::move(want));
  }
  out = out.with_point_values(std::move(points));
  if (phi.separation()) out = out.with_separation(*phi.separation());
  return out.labelled(phi.label() + "|E");
}

VectorValue exact_integral(const Integrand &phi, const Region &r) {
  if (!phi.piecewise())
    throw UnsupportedExactIntegration("no closed-form integral for evaluator integrand '" + phi.label() + "'");
  VectorValue total = VectorValue::zero(phi.space());
  const auto &breaks = phi.breaks();
  for (const auto &part : r.parts()) {
    Dyadic lo = max(part.lo, Dyadic(0)), hi = min(part.hi, Dyadic(1));
    if (!(lo < hi)) continue;
    auto j = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), lo) - breaks.begin()) - 1;
    for (; j + 1 < breaks.size() && breaks[j] < hi; ++j) {
      Dyadic a = max(lo, breaks[j]), b = min(hi, breaks[j + 1]);
      if (!(a < b)) continue;
      const auto &c = phi.coeffs(j);
      auto mono = monomial_integrals(a, b, c.size() - 1);
      for (std::size_t k = 0; k < c.size(); ++k) total.add_scaled(mono[k], c[k]);
    }
  }
  return total;
}

Rational scalar_integral(const DualFunctional &f, const Integrand &phi, const Region &r) {
  return scalar_trace(f, phi).integral(r);
}

VectorValue riemann_sum(const Integrand &phi, const std::vector<TaggedInterval> &items) {
  VectorValue total = VectorValue::zero(phi.space());
  if (!phi.piecewise()) {
    for (const auto &it : items) total.add_scaled(it.interval.length().to_rational(), phi(it.tag));
    return total;
  }
  // Collect sum (b - a) t^k per piece, then combine with the coefficients once.
  const std::size_t deg = phi.degree();
  std::vector<std::vector<Dyadic>> weights(phi.pieces());
  const auto &points = phi.point_values();
  for (const auto &it : items) {
    Dyadic len = it.interval.length();
    if (len.is_zero()) continue;
    if (!points.empty()) {
      if (auto pv = points.find(it.tag); pv != points.end()) {
        total.add_scaled(len.to_rational(), pv->second);
        continue;
      }
    }
    auto &w = weights[phi.piece_of(it.tag)];
    if (w.empty()) w.assign(deg + 1, Dyadic(0));
    Dyadic term = len;
    for (std::size_t k = 0; k <= deg; ++k) {
      w[k] += term;
      if (k < deg) term *= it.tag;
    }
  }
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j].empty()) continue;
    const auto &c = phi.coeffs(j);
    for (std::size_t k = 0; k < c.size(); ++k) total.add_scaled(weights[j][k].to_rational(), c[k]);
  }
  return total;
}

VectorValue generalized_sum(const Integrand &phi, const std::vector<std::pair<Region, Dyadic>> &items) {
  Dyadic separate;
  std::vector<Interval> all;
  for (const auto &[r, t] : items) {
    separate += r.measure();
    all.insert(all.end(), r.parts().begin(), r.parts().end());
  }
  if (Region::normalize(std::move(all)).measure() != separate)
    throw std::invalid_argument("generalized_sum: regions overlap");
  VectorValue total = VectorValue::zero(phi.space());
  for (const auto &[r, t] : items) {
    auto m = r.measure();
    if (!m.is_zero()) total.add_scaled(m.to_rational(), phi(t));
  }
  return total;
}

} // namespace gaugelab
