#pragma once

#include "gaugelab/dyadic.hpp"
#include "gaugelab/partition.hpp"
#include "gaugelab/region.hpp"
#include "gaugelab/values.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaugelab {

class UnsupportedExactIntegration : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Vector-valued function on [0,1].
///
/// Piecewise classes hold breakpoints 0 = p_0 < ... < p_N = 1 and, on each
/// piece [p_j, p_{j+1}) (the last one closed), a polynomial sum_k c_{jk} t^k
/// with vector coefficients. A finite table of point values overrides the
/// pieces at individual points, which is how closed supports and
/// restrictions to closed sets are represented exactly.
class Integrand {
public:
  enum class Class { piecewise_step, piecewise_polynomial, evaluator };
  using Evaluator = std::function<VectorValue(const Dyadic &)>;
  using PointValues = std::map<Dyadic, VectorValue>;

  static Integrand constant(VectorValue c);
  static Integrand step(std::vector<Dyadic> breaks, std::vector<VectorValue> levels);
  /// coeffs[j][k] multiplies t^k on piece j.
  static Integrand polynomial(std::vector<Dyadic> breaks, std::vector<std::vector<VectorValue>> coeffs);
  static Integrand evaluator(SpacePtr space, Evaluator fn, std::optional<Rational> sup_bound = std::nullopt,
                             std::string label = "evaluator");

  Integrand with_point_values(PointValues points) const;
  /// Declares that distinct values of the modelled function are pairwise at
  /// distance >= d (used by bochner_integrate).
  Integrand with_separation(Rational d) const;
  Integrand labelled(std::string label) const;

  const SpacePtr &space() const { return space_; }
  Class cls() const { return cls_; }
  bool piecewise() const { return cls_ != Class::evaluator; }
  const std::string &label() const { return label_; }

  const std::vector<Dyadic> &breaks() const { return breaks_; }
  std::size_t pieces() const { return coeffs_.size(); }
  std::size_t piece_of(const Dyadic &t) const;
  const std::vector<VectorValue> &coeffs(std::size_t j) const { return coeffs_[j]; }
  std::size_t degree() const;
  const PointValues &point_values() const { return points_; }
  const std::optional<Rational> &separation() const { return separation_; }
  const std::optional<Rational> &sup_bound() const { return sup_bound_; }

  VectorValue operator()(const Dyadic &t) const;
  /// Polynomial of piece j at t, ignoring point overrides.
  VectorValue piece_value(std::size_t j, const Dyadic &t) const;
  /// Coefficient vectors of the k-th derivative of piece j divided by k!,
  /// evaluated at t (Taylor coefficients about t).
  std::vector<VectorValue> taylor_at(std::size_t j, const Dyadic &t) const;

private:
  Integrand() = default;

  SpacePtr space_;
  Class cls_ = Class::piecewise_step;
  std::vector<Dyadic> breaks_;
  std::vector<std::vector<VectorValue>> coeffs_;
  PointValues points_;
  Evaluator fn_;
  std::optional<Rational> separation_;
  std::optional<Rational> sup_bound_;
  std::string label_;
};

/// Scalar function f∘φ of a piecewise integrand, same piece structure.
struct ScalarTrace {
  std::vector<Dyadic> breaks;
  std::vector<std::vector<Rational>> coeffs;
  std::map<Dyadic, Rational> points;

  Rational operator()(const Dyadic &t) const;
  /// Exact integral over a region.
  Rational integral(const Region &r) const;
};

ScalarTrace scalar_trace(const DualFunctional &f, const Integrand &phi);

/// t ↦ φ(t) on E, 0 elsewhere. Piecewise classes gain E's boundary as breakpoints.
Integrand restrict_integrand(const Integrand &phi, const Region &E);

/// Closed-form integral over a region (piecewise classes only).
VectorValue exact_integral(const Integrand &phi, const Region &r);
/// Exact integral of f∘φ over r.
Rational scalar_integral(const DualFunctional &f, const Integrand &phi, const Region &r);

VectorValue riemann_sum(const Integrand &phi, const std::vector<TaggedInterval> &items);
inline VectorValue riemann_sum(const Integrand &phi, const TaggedPartition &p) {
  return riemann_sum(phi, p.items);
}

/// Sum of μ(E_i) φ(t_i) over regions with pairwise disjoint interiors.
VectorValue generalized_sum(const Integrand &phi, const std::vector<std::pair<Region, Dyadic>> &items);

} // namespace gaugelab
