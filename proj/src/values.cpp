#include "gaugelab/values.hpp"

#include <algorithm>

namespace gaugelab {

SpacePtr ValueSpace::finite_dim(std::size_t d, NormKind norm) {
  if (d == 0) throw std::invalid_argument("finite-dimensional space needs d >= 1");
  return SpacePtr(new ValueSpace(Kind::finite_dim, d, norm));
}

SpacePtr ValueSpace::seq_l2(std::size_t R) {
  if (R == 0) throw std::invalid_argument("truncation R must be >= 1");
  return SpacePtr(new ValueSpace(Kind::seq_l2, R, NormKind::l2));
}

SpacePtr ValueSpace::seq_sup(std::size_t R) {
  if (R == 0) throw std::invalid_argument("truncation R must be >= 1");
  return SpacePtr(new ValueSpace(Kind::seq_sup, R, NormKind::linf));
}

SpacePtr ValueSpace::step_linf(std::vector<Dyadic> grid) {
  if (grid.size() < 2 || grid.front() != Dyadic(0) || grid.back() != Dyadic(1))
    throw std::invalid_argument("StepLInf grid must run from 0 to 1");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i - 1] < grid[i])) throw std::invalid_argument("StepLInf grid must be increasing");
  auto n = grid.size() - 1;
  return SpacePtr(new ValueSpace(Kind::step_linf, n, NormKind::linf, std::move(grid)));
}

std::string ValueSpace::describe() const {
  switch (kind_) {
  case Kind::finite_dim: {
    const char *n = norm_ == NormKind::l1 ? "l1" : (norm_ == NormKind::l2 ? "l2" : "linf");
    return "FiniteDim(" + std::to_string(size_) + "," + n + ")";
  }
  case Kind::seq_l2:
    return "SeqL2(" + std::to_string(size_) + ")";
  case Kind::seq_sup:
    return "SeqSup(" + std::to_string(size_) + ")";
  case Kind::step_linf:
    return "StepLInf(" + std::to_string(size_) + " cells)";
  }
  return "?";
}

bool same_space(const SpacePtr &a, const SpacePtr &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

VectorValue::VectorValue(SpacePtr space) : space_(std::move(space)) {
  if (!space_) throw std::invalid_argument("vector needs a space");
  data_.assign(space_->size(), Rational(0));
}

VectorValue::VectorValue(SpacePtr space, std::vector<Rational> data)
    : space_(std::move(space)), data_(std::move(data)) {
  if (!space_) throw std::invalid_argument("vector needs a space");
  if (data_.size() != space_->size())
    throw SpaceMismatch("vector has " + std::to_string(data_.size()) + " coordinates, space " +
                        space_->describe() + " needs " + std::to_string(space_->size()));
}

VectorValue VectorValue::unit(SpacePtr space, std::size_t n) {
  VectorValue v(std::move(space));
  if (n >= v.size()) throw std::out_of_range("unit vector index out of range");
  v.data_[n] = 1;
  return v;
}

bool VectorValue::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const Rational &q) { return sgn(q) == 0; });
}

namespace {
void check_same(const VectorValue &a, const VectorValue &b) {
  if (!same_space(a.space(), b.space()))
    throw SpaceMismatch("space mismatch: " + a.space()->describe() + " vs " + b.space()->describe());
}
} // namespace

VectorValue &VectorValue::operator+=(const VectorValue &o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

VectorValue &VectorValue::operator-=(const VectorValue &o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

VectorValue &VectorValue::operator*=(const Rational &s) {
  for (auto &x : data_) x *= s;
  return *this;
}

VectorValue &VectorValue::add_scaled(const Rational &s, const VectorValue &o) {
  check_same(*this, o);
  if (sgn(s) == 0) return *this;
  for (std::size_t i = 0; i < data_.size(); ++i)
    if (sgn(o.data_[i]) != 0) data_[i] += s * o.data_[i];
  return *this;
}

std::vector<double> VectorValue::to_doubles() const {
  std::vector<double> out;
  out.reserve(data_.size());
  for (const auto &q : data_) out.push_back(q.get_d());
  return out;
}

namespace {

bool perfect_square(const Integer &n, Integer &root) {
  if (sgn(n) < 0) return false;
  mpz_sqrt(root.get_mpz_t(), n.get_mpz_t());
  return root * root == n;
}

} // namespace

NormEnclosure sqrt_enclosure(const Rational &q, unsigned bits) {
  if (sgn(q) < 0) throw std::domain_error("sqrt of a negative rational");
  Integer rn, rd;
  if (perfect_square(q.get_num(), rn) && perfect_square(q.get_den(), rd)) {
    Rational r(rn, rd);
    r.canonicalize();
    return {r, r};
  }
  // floor(sqrt(q * 4^bits)) / 2^bits <= sqrt(q) < (that + 1) / 2^bits
  Integer scaled;
  mpz_mul_2exp(scaled.get_mpz_t(), q.get_num_mpz_t(), 2 * bits);
  mpz_fdiv_q(scaled.get_mpz_t(), scaled.get_mpz_t(), q.get_den_mpz_t());
  Integer root;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  Rational lo = Dyadic(root, bits).to_rational();
  Rational hi = Dyadic(root + 1, bits).to_rational();
  return {lo, hi};
}

NormEnclosure norm(const VectorValue &v) {
  switch (v.space()->norm_kind()) {
  case NormKind::l1: {
    Rational s = 0;
    for (const auto &x : v.data()) s += abs(x);
    return {s, s};
  }
  case NormKind::linf: {
    Rational m = 0;
    for (const auto &x : v.data())
      if (abs(x) > m) m = abs(x);
    return {m, m};
  }
  case NormKind::l2: {
    Rational s = 0;
    for (const auto &x : v.data())
      if (sgn(x) != 0) s += x * x;
    return sqrt_enclosure(s);
  }
  }
  return {};
}

NormEnclosure distance(const VectorValue &a, const VectorValue &b) { return norm(a - b); }

DualFunctional DualFunctional::coordinate(std::size_t n) {
  DualFunctional f(Kind::coordinate);
  f.index_ = n;
  f.norm_bound_ = 1;
  return f;
}

DualFunctional DualFunctional::combination(std::vector<Rational> coeffs, const SpacePtr &space) {
  if (coeffs.size() != space->size())
    throw SpaceMismatch("combination has " + std::to_string(coeffs.size()) +
                        " coefficients for space " + space->describe());
  DualFunctional f(Kind::combination);
  Rational bound = 0;
  switch (space->norm_kind()) {
  case NormKind::l1: // dual is linf
    for (const auto &c : coeffs)
      if (abs(c) > bound) bound = abs(c);
    break;
  case NormKind::linf: // dual contains l1
    for (const auto &c : coeffs) bound += abs(c);
    break;
  case NormKind::l2: {
    Rational sq = 0;
    for (const auto &c : coeffs) sq += c * c;
    if (sq > 1) throw std::invalid_argument("functional has l2 norm above 1");
    bound = sqrt_enclosure(sq).hi;
    if (bound > 1) bound = 1;
    break;
  }
  }
  if (bound > 1) throw std::invalid_argument("functional norm exceeds 1: " + rational_str(bound));
  f.coeffs_ = std::move(coeffs);
  f.norm_bound_ = bound;
  return f;
}

DualFunctional DualFunctional::step_pairing(StepFunction density) {
  density.validate();
  auto l1 = density.l1_norm();
  if (l1 > 1) throw std::invalid_argument("pairing density has L1 norm above 1");
  DualFunctional f(Kind::step_pairing);
  f.density_ = std::move(density);
  f.norm_bound_ = l1;
  return f;
}

bool DualFunctional::compatible(const ValueSpace &space) const {
  switch (kind_) {
  case Kind::coordinate:
    return index_ < space.size();
  case Kind::combination:
    return coeffs_.empty() || coeffs_.size() == space.size();
  case Kind::step_pairing:
    return space.kind() == ValueSpace::Kind::step_linf;
  }
  return false;
}

Rational DualFunctional::apply(const VectorValue &v) const {
  const auto &space = *v.space();
  if (!compatible(space))
    throw SpaceMismatch("functional " + describe() + " is incompatible with " + space.describe());
  switch (kind_) {
  case Kind::coordinate:
    return v[index_];
  case Kind::combination: {
    Rational s = 0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (sgn(coeffs_[i]) != 0) s += coeffs_[i] * v[i];
    return s;
  }
  case Kind::step_pairing: {
    // Merge density breakpoints with the space grid.
    const auto &grid = space.grid();
    const auto &db = density_.breaks;
    Rational s = 0;
    std::size_t i = 0, j = 0;
    while (i + 1 < grid.size() && j + 1 < db.size()) {
      const Dyadic &lo = max(grid[i], db[j]);
      const Dyadic &hi = min(grid[i + 1], db[j + 1]);
      if (lo < hi && sgn(v[i]) != 0 && sgn(density_.levels[j]) != 0)
        s += (hi - lo).to_rational() * density_.levels[j] * v[i];
      if (grid[i + 1] < db[j + 1])
        ++i;
      else if (db[j + 1] < grid[i + 1])
        ++j;
      else {
        ++i;
        ++j;
      }
    }
    return s;
  }
  }
  return 0;
}

std::string DualFunctional::describe() const {
  switch (kind_) {
  case Kind::coordinate:
    return "coordinate(" + std::to_string(index_) + ")";
  case Kind::combination:
    return coeffs_.empty() ? "zero" : "combination(" + std::to_string(coeffs_.size()) + ")";
  case Kind::step_pairing:
    return "step-pairing(" + std::to_string(density_.levels.size()) + " cells)";
  }
  return "?";
}

std::vector<DualFunctional> coordinate_family(const ValueSpace &space) {
  std::vector<DualFunctional> out;
  out.reserve(space.size());
  for (std::size_t n = 0; n < space.size(); ++n) out.push_back(DualFunctional::coordinate(n));
  return out;
}

} // namespace gaugelab
