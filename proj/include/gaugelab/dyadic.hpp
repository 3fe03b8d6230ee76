#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace gaugelab {

using Integer = mpz_class;
using Rational = mpq_class;

/// Exact value numerator / 2^exponent.
///
/// Always kept canonical: the numerator is odd or the exponent is zero, so
/// structural equality coincides with numeric equality. Numerators below
/// 2^62 in magnitude are held inline; larger ones spill to GMP.
class Dyadic {
public:
  Dyadic() = default;
  Dyadic(long value);
  Dyadic(const Dyadic &o) : small_(o.small_), exp_(o.exp_), big_(o.big_) {
    if (big_) wide_ = o.wide_;
  }
  Dyadic(Dyadic &&o) noexcept = default;
  Dyadic &operator=(const Dyadic &o) {
    small_ = o.small_;
    exp_ = o.exp_;
    big_ = o.big_;
    if (big_) wide_ = o.wide_;
    return *this;
  }
  Dyadic &operator=(Dyadic &&o) noexcept = default;
  Dyadic(Integer numerator, unsigned exponent);

  /// k / 2^exponent
  static Dyadic pow2(int k);
  static Dyadic from_index(std::int64_t index, unsigned exponent);

  Integer numerator() const;
  unsigned exponent() const { return exp_; }

  Rational to_rational() const;
  double to_double() const;

  /// Renders as "p/2^k"; parse() accepts the same form plus plain integers.
  std::string str() const;
  static Dyadic parse(std::string_view text);

  Dyadic operator-() const;
  Dyadic &operator+=(const Dyadic &o) { return add(o, false); }
  Dyadic &operator-=(const Dyadic &o) { return add(o, true); }
  Dyadic &operator*=(const Dyadic &o);

  friend Dyadic operator+(Dyadic a, const Dyadic &b) { return a += b; }
  friend Dyadic operator-(Dyadic a, const Dyadic &b) { return a -= b; }
  friend Dyadic operator*(Dyadic a, const Dyadic &b) { return a *= b; }

  /// this * 2^-k for k >= 0.
  Dyadic scaled_down(unsigned k) const;
  Dyadic half() const { return scaled_down(1); }
  static Dyadic midpoint(const Dyadic &a, const Dyadic &b) { return (a + b).half(); }

  int sign() const;
  bool is_zero() const { return sign() == 0; }

  /// floor(this * 2^depth) as a signed 64-bit index. Throws if it does not fit.
  std::int64_t floor_index(unsigned depth) const;

  friend bool operator==(const Dyadic &a, const Dyadic &b) {
    if (a.exp_ != b.exp_ || a.big_ != b.big_) return false;
    return a.big_ ? a.wide_ == b.wide_ : a.small_ == b.small_;
  }
  friend std::strong_ordering operator<=>(const Dyadic &a, const Dyadic &b);

private:
  Dyadic &add(const Dyadic &o, bool negate);
  Integer wide() const;
  void set_wide(Integer n);
  void canonicalize();

  std::int64_t small_ = 0;
  unsigned exp_ = 0;
  bool big_ = false;
  Integer wide_;
};

Dyadic min(const Dyadic &a, const Dyadic &b);
Dyadic max(const Dyadic &a, const Dyadic &b);

int compare(const Dyadic &a, const Rational &b);
inline bool operator<=(const Dyadic &a, const Rational &b) { return compare(a, b) <= 0; }
inline bool operator>=(const Dyadic &a, const Rational &b) { return compare(a, b) >= 0; }

/// Largest dyadic with exponent `precision` that is <= q.
Dyadic floor_dyadic(const Rational &q, unsigned precision);

/// "p/2^k" when the denominator is a power of two, otherwise "p/q".
std::string rational_str(const Rational &q);
/// Accepts "p/q", "p/2^k", "2^-k", "2^k" and integers. No decimals.
Rational parse_rational(std::string_view text);

bool is_power_of_two(const Integer &n);

/// num/den in lowest terms. The two-argument Rational constructor does not
/// reduce, and unreduced values break equality.
inline Rational ratio(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

} // namespace gaugelab
