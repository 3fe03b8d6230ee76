#pragma once

#include "gaugelab/dyadic.hpp"
#include "gaugelab/region.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaugelab {

enum class NormKind { l1, l2, linf };

class SpaceMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class ValueSpace;
using SpacePtr = std::shared_ptr<const ValueSpace>;

/// Target space X. Sequence spaces are truncated to R coordinates; StepLInf
/// holds step functions on a fixed grid of [0,1] with the sup norm.
class ValueSpace {
public:
  enum class Kind { finite_dim, seq_l2, seq_sup, step_linf };

  static SpacePtr finite_dim(std::size_t d, NormKind norm);
  static SpacePtr seq_l2(std::size_t R);
  static SpacePtr seq_sup(std::size_t R);
  static SpacePtr step_linf(std::vector<Dyadic> grid);

  Kind kind() const { return kind_; }
  std::size_t size() const { return size_; }
  NormKind norm_kind() const { return norm_; }
  /// Breakpoints 0 = g_0 < ... < g_N = 1 (StepLInf only).
  const std::vector<Dyadic> &grid() const { return grid_; }
  std::string describe() const;

  friend bool operator==(const ValueSpace &a, const ValueSpace &b) {
    return a.kind_ == b.kind_ && a.size_ == b.size_ && a.norm_ == b.norm_ && a.grid_ == b.grid_;
  }

private:
  ValueSpace(Kind k, std::size_t n, NormKind norm, std::vector<Dyadic> grid = {})
      : kind_(k), size_(n), norm_(norm), grid_(std::move(grid)) {}

  Kind kind_;
  std::size_t size_;
  NormKind norm_;
  std::vector<Dyadic> grid_;
};

bool same_space(const SpacePtr &a, const SpacePtr &b);

class VectorValue {
public:
  VectorValue() = default;
  explicit VectorValue(SpacePtr space);
  VectorValue(SpacePtr space, std::vector<Rational> data);

  static VectorValue zero(SpacePtr space) { return VectorValue(std::move(space)); }
  static VectorValue unit(SpacePtr space, std::size_t n);

  const SpacePtr &space() const { return space_; }
  const std::vector<Rational> &data() const { return data_; }
  std::vector<Rational> &data() { return data_; }
  const Rational &operator[](std::size_t i) const { return data_[i]; }
  Rational &operator[](std::size_t i) { return data_[i]; }
  std::size_t size() const { return data_.size(); }
  bool is_zero() const;

  VectorValue &operator+=(const VectorValue &o);
  VectorValue &operator-=(const VectorValue &o);
  VectorValue &operator*=(const Rational &s);
  /// this += s * o
  VectorValue &add_scaled(const Rational &s, const VectorValue &o);

  friend VectorValue operator+(VectorValue a, const VectorValue &b) { return a += b; }
  friend VectorValue operator-(VectorValue a, const VectorValue &b) { return a -= b; }
  friend VectorValue operator*(const Rational &s, VectorValue v) { return v *= s; }

  friend bool operator==(const VectorValue &a, const VectorValue &b) {
    return same_space(a.space_, b.space_) && a.data_ == b.data_;
  }

  std::vector<double> to_doubles() const;

private:
  SpacePtr space_;
  std::vector<Rational> data_;
};

/// Certified enclosure lo <= value <= hi; lo == hi when the value is exact.
struct NormEnclosure {
  Rational lo;
  Rational hi;
  bool exact() const { return lo == hi; }
  double approx() const { return (lo.get_d() + hi.get_d()) / 2; }
};

/// Outward-rounded sqrt(q), q >= 0, with dyadic endpoints of `bits` fractional bits.
/// Returns an exact enclosure when q is the square of a rational.
NormEnclosure sqrt_enclosure(const Rational &q, unsigned bits = 64);

NormEnclosure norm(const VectorValue &v);
NormEnclosure distance(const VectorValue &a, const VectorValue &b);

/// Element of the dual unit ball. coordinate(n) on StepLInf is the average
/// over grid cell n.
class DualFunctional {
public:
  enum class Kind { coordinate, combination, step_pairing };

  static DualFunctional coordinate(std::size_t n);
  /// Checked against the dual norm of `space`; throws if it exceeds 1.
  static DualFunctional combination(std::vector<Rational> coeffs, const SpacePtr &space);
  static DualFunctional step_pairing(StepFunction density);
  static DualFunctional zero() { return DualFunctional(Kind::combination); }

  Kind kind() const { return kind_; }
  const Rational &norm_bound() const { return norm_bound_; }
  std::size_t index() const { return index_; }
  const std::vector<Rational> &coeffs() const { return coeffs_; }
  const StepFunction &density() const { return density_; }

  bool compatible(const ValueSpace &space) const;
  Rational apply(const VectorValue &v) const;
  std::string describe() const;

private:
  explicit DualFunctional(Kind k) : kind_(k) {}

  Kind kind_;
  std::size_t index_ = 0;
  std::vector<Rational> coeffs_;
  StepFunction density_;
  Rational norm_bound_ = 0;
};

/// Coordinate functionals e_0^*, ..., e_{size-1}^*: a norming family for
/// sup-norm spaces.
std::vector<DualFunctional> coordinate_family(const ValueSpace &space);

} // namespace gaugelab
