#include "gaugelab/dyadic.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gaugelab {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

Integer parse_integer(const std::string &s) {
  if (s.empty()) throw std::invalid_argument("empty integer");
  std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (start == s.size()) throw std::invalid_argument("malformed integer: " + s);
  for (std::size_t i = start; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("malformed integer: " + s);
  return Integer(s[0] == '+' ? s.substr(1) : s, 10);
}

long parse_small(const std::string &s) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::invalid_argument("malformed exponent: " + s);
  return v;
}

} // namespace

namespace {

constexpr std::int64_t kLimit = std::int64_t(1) << 62;

bool fits_small(std::int64_t v) { return v > -kLimit && v < kLimit; }

// v * 2^k when the result stays inline.
bool shift_fits(std::int64_t v, unsigned k, std::int64_t &out) {
  if (v == 0) {
    out = 0;
    return true;
  }
  if (k >= 62) return false;
  std::int64_t bound = kLimit >> k;
  if (v <= -bound || v >= bound) return false;
  out = v * (std::int64_t(1) << k);
  return true;
}

Integer to_integer(std::int64_t v) {
  Integer n;
  mpz_set_si(n.get_mpz_t(), static_cast<long>(v));
  return n;
}

} // namespace

Dyadic::Dyadic(long value) {
  if (fits_small(value)) {
    small_ = value;
  } else {
    big_ = true;
    wide_ = value;
  }
}

Dyadic::Dyadic(Integer numerator, unsigned exponent) : exp_(exponent) {
  set_wide(std::move(numerator));
  canonicalize();
}

Dyadic Dyadic::from_index(std::int64_t index, unsigned exponent) {
  Dyadic d;
  d.exp_ = exponent;
  if (fits_small(index))
    d.small_ = index;
  else
    d.set_wide(to_integer(index));
  d.canonicalize();
  return d;
}

Integer Dyadic::wide() const { return big_ ? wide_ : to_integer(small_); }

Integer Dyadic::numerator() const { return wide(); }

void Dyadic::set_wide(Integer n) {
  if (mpz_fits_slong_p(n.get_mpz_t()) && fits_small(n.get_si())) {
    small_ = n.get_si();
    big_ = false;
  } else {
    wide_ = std::move(n);
    big_ = true;
    small_ = 0;
  }
}

int Dyadic::sign() const { return big_ ? sgn(wide_) : (small_ > 0) - (small_ < 0); }

void Dyadic::canonicalize() {
  if (!big_) {
    if (small_ == 0) {
      exp_ = 0;
      return;
    }
    if (exp_ == 0) return;
    auto tz = static_cast<unsigned>(__builtin_ctzll(static_cast<unsigned long long>(small_)));
    auto shift = tz < exp_ ? tz : exp_;
    small_ >>= shift; // exact: the low bits are zero
    exp_ -= shift;
    return;
  }
  if (exp_ > 0) {
    auto tz = static_cast<unsigned>(mpz_scan1(wide_.get_mpz_t(), 0));
    auto shift = tz < exp_ ? tz : exp_;
    if (shift > 0) {
      mpz_fdiv_q_2exp(wide_.get_mpz_t(), wide_.get_mpz_t(), shift);
      exp_ -= shift;
    }
  }
  set_wide(std::move(wide_));
}

Dyadic Dyadic::pow2(int k) {
  if (k >= 0) {
    Integer n = 1;
    mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<unsigned>(k));
    return Dyadic(n, 0);
  }
  return from_index(1, static_cast<unsigned>(-k));
}

Rational Dyadic::to_rational() const {
  Rational q(wide());
  if (exp_ > 0) mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), exp_);
  return q;
}

double Dyadic::to_double() const {
  if (!big_) return std::ldexp(static_cast<double>(small_), -static_cast<int>(exp_));
  return std::ldexp(wide_.get_d(), -static_cast<int>(exp_));
}

std::string Dyadic::str() const {
  return (big_ ? wide_.get_str() : std::to_string(small_)) + "/2^" + std::to_string(exp_);
}

Dyadic Dyadic::parse(std::string_view text) {
  auto s = trim(text);
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (s.rfind("2^-", 0) == 0) {
      long k = parse_small(s.substr(3));
      if (k < 0) throw std::invalid_argument("malformed dyadic: " + s);
      return pow2(static_cast<int>(-k));
    }
    return Dyadic(parse_integer(s), 0);
  }
  auto num = parse_integer(s.substr(0, slash));
  auto den = s.substr(slash + 1);
  if (den.rfind("2^", 0) == 0) {
    long k = parse_small(den.substr(2));
    if (k < 0) throw std::invalid_argument("malformed dyadic: " + s);
    return Dyadic(num, static_cast<unsigned>(k));
  }
  Integer d = parse_integer(den);
  if (sgn(d) <= 0 || !is_power_of_two(d)) throw std::invalid_argument("not a dyadic rational: " + s);
  return Dyadic(num, static_cast<unsigned>(mpz_scan1(d.get_mpz_t(), 0)));
}

Dyadic Dyadic::operator-() const {
  Dyadic d = *this;
  if (big_)
    d.set_wide(-wide_);
  else
    d.small_ = -small_;
  return d;
}

Dyadic Dyadic::scaled_down(unsigned k) const {
  Dyadic d = *this;
  if (d.sign() == 0) return d;
  d.exp_ += k;
  return d;
}

Dyadic &Dyadic::add(const Dyadic &o, bool negate) {
  if (!big_ && !o.big_) {
    std::int64_t a = small_, b = negate ? -o.small_ : o.small_;
    unsigned e = exp_;
    bool ok = true;
    if (exp_ > o.exp_)
      ok = shift_fits(b, exp_ - o.exp_, b);
    else if (o.exp_ > exp_) {
      ok = shift_fits(a, o.exp_ - exp_, a);
      e = o.exp_;
    }
    if (ok) {
      // |a|, |b| < 2^62 so the sum cannot overflow int64.
      std::int64_t sum = a + b;
      exp_ = e;
      if (fits_small(sum)) {
        small_ = sum;
        canonicalize();
      } else {
        set_wide(to_integer(sum));
        big_ = true;
        canonicalize();
      }
      return *this;
    }
  }
  Integer x = wide(), y = o.wide();
  if (negate) y = -y;
  unsigned e = exp_;
  if (exp_ > o.exp_)
    mpz_mul_2exp(y.get_mpz_t(), y.get_mpz_t(), exp_ - o.exp_);
  else if (o.exp_ > exp_) {
    mpz_mul_2exp(x.get_mpz_t(), x.get_mpz_t(), o.exp_ - exp_);
    e = o.exp_;
  }
  exp_ = e;
  big_ = true;
  wide_ = x + y;
  canonicalize();
  return *this;
}

Dyadic &Dyadic::operator*=(const Dyadic &o) {
  exp_ += o.exp_;
  std::int64_t prod;
  if (!big_ && !o.big_ && !__builtin_mul_overflow(small_, o.small_, &prod) && fits_small(prod)) {
    small_ = prod;
  } else {
    wide_ = wide() * o.wide();
    big_ = true;
  }
  canonicalize();
  return *this;
}

std::int64_t Dyadic::floor_index(unsigned depth) const {
  if (!big_) {
    if (depth >= exp_) {
      std::int64_t out;
      if (shift_fits(small_, depth - exp_, out)) return out;
    } else {
      unsigned k = exp_ - depth;
      if (k >= 63) return small_ < 0 ? -1 : 0;
      return small_ >> k; // arithmetic shift floors
    }
  }
  Integer t;
  Integer n = wide();
  if (depth >= exp_) {
    mpz_mul_2exp(t.get_mpz_t(), n.get_mpz_t(), depth - exp_);
  } else {
    mpz_fdiv_q_2exp(t.get_mpz_t(), n.get_mpz_t(), exp_ - depth);
  }
  if (!t.fits_slong_p()) throw std::overflow_error("dyadic index does not fit in 64 bits");
  return t.get_si();
}

std::strong_ordering operator<=>(const Dyadic &a, const Dyadic &b) {
  int sa = a.sign(), sb = b.sign();
  int c;
  if (sa != sb) {
    c = sa < sb ? -1 : 1;
  } else if (!a.big_ && !b.big_) {
    std::int64_t x = a.small_, y = b.small_;
    bool ok = true;
    if (a.exp_ > b.exp_)
      ok = shift_fits(y, a.exp_ - b.exp_, y);
    else if (b.exp_ > a.exp_)
      ok = shift_fits(x, b.exp_ - a.exp_, x);
    if (ok) {
      c = (x > y) - (x < y);
    } else {
      // One side overflowed when aligned, so it dominates in magnitude.
      bool a_shifted = b.exp_ > a.exp_;
      int mag = a_shifted ? 1 : -1; // |a| > |b| when a was the one shifted
      c = sa > 0 ? mag : -mag;
    }
  } else {
    Integer x = a.wide(), y = b.wide();
    if (a.exp_ > b.exp_)
      mpz_mul_2exp(y.get_mpz_t(), y.get_mpz_t(), a.exp_ - b.exp_);
    else if (b.exp_ > a.exp_)
      mpz_mul_2exp(x.get_mpz_t(), x.get_mpz_t(), b.exp_ - a.exp_);
    c = cmp(x, y);
  }
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

Dyadic min(const Dyadic &a, const Dyadic &b) { return b < a ? b : a; }
Dyadic max(const Dyadic &a, const Dyadic &b) { return a < b ? b : a; }

int compare(const Dyadic &a, const Rational &b) {
  // a.num * den(b) vs num(b) * 2^exp
  if (a.sign() != sgn(b)) return a.sign() < sgn(b) ? -1 : 1;
  Integer lhs = a.numerator() * b.get_den();
  Integer rhs;
  mpz_mul_2exp(rhs.get_mpz_t(), b.get_num_mpz_t(), a.exponent());
  int c = cmp(lhs, rhs);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

Dyadic floor_dyadic(const Rational &q, unsigned precision) {
  Integer scaled;
  mpz_mul_2exp(scaled.get_mpz_t(), q.get_num_mpz_t(), precision);
  mpz_fdiv_q(scaled.get_mpz_t(), scaled.get_mpz_t(), q.get_den_mpz_t());
  return Dyadic(scaled, precision);
}

bool is_power_of_two(const Integer &n) {
  return sgn(n) > 0 && mpz_popcount(n.get_mpz_t()) == 1;
}

std::string rational_str(const Rational &q) {
  if (is_power_of_two(q.get_den())) {
    auto k = static_cast<unsigned>(mpz_scan1(q.get_den_mpz_t(), 0));
    return q.get_num().get_str() + "/2^" + std::to_string(k);
  }
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
  auto s = trim(text);
  if (s.find('.') != std::string::npos || s.find('e') != std::string::npos ||
      s.find('E') != std::string::npos)
    throw std::invalid_argument("decimal values are not accepted: " + s);
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (s.rfind("2^", 0) == 0) {
      long k = parse_small(s.substr(2));
      if (k < -100000 || k > 100000) throw std::invalid_argument("exponent out of range: " + s);
      return Dyadic::pow2(static_cast<int>(k)).to_rational();
    }
    return Rational(parse_integer(s));
  }
  auto den = s.substr(slash + 1);
  if (den.rfind("2^", 0) == 0) return Dyadic::parse(s).to_rational();
  Integer d = parse_integer(den);
  if (sgn(d) == 0) throw std::invalid_argument("zero denominator: " + s);
  Rational q(parse_integer(s.substr(0, slash)), d);
  q.canonicalize();
  return q;
}

} // namespace gaugelab
