#pragma once

#include "gaugelab/integrand.hpp"
#include "gaugelab/region.hpp"
#include "gaugelab/values.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gaugelab {

struct ScalarFn {
  std::string id;
  std::function<Rational(const Dyadic &)> eval;
};

struct FunctionFamily {
  enum class Class { piecewise_step, evaluator };
  std::vector<ScalarFn> members;
  Class cls = Class::evaluator;
};

/// {f∘φ : f in F}
FunctionFamily trace_family(const Integrand &phi, const std::vector<DualFunctional> &functionals);

struct ZQuery {
  Region E;
  int m = 1;
  int n = 1;
  Rational alpha;
  Rational beta;
};

/// True iff some member has f(t_i) <= α for all i and f(u_j) >= β for all j.
bool z_member(const FunctionFamily &A, const std::vector<Dyadic> &t, const std::vector<Dyadic> &u,
              const Rational &alpha, const Rational &beta);

struct ZEstimate {
  double estimate = 0;   ///< hit fraction times (μE)^(m+n)
  double half_width = 0; ///< 95% normal interval with continuity correction, same scale
  double threshold = 0;  ///< (μE)^(m+n)
  std::size_t hits = 0;
  std::size_t samples = 0;
};

/// Sample s draws its m + n points from counter stream (seed, s).
ZEstimate z_measure_mc(const FunctionFamily &A, const ZQuery &q, std::size_t samples, std::uint64_t seed);

enum class ScanOutcome { witness, inconclusive, exhausted };
std::string to_string(ScanOutcome o);

struct ScanEntry {
  int m;
  int n;
  ZEstimate z;
};

struct ScanCell {
  std::size_t region;
  Rational alpha;
  Rational beta;
  ScanOutcome outcome = ScanOutcome::exhausted;
  int m = 0; ///< first witness, when found
  int n = 0;
  std::vector<ScanEntry> tried;
};

struct ScanParams {
  std::vector<Region> regions;
  std::vector<std::pair<Rational, Rational>> levels; ///< (α, β) pairs
  int mn_max = 3;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  double margin = 1e-3;
};

/// For each (E, α, β), the first (m, n) in order of m + n with
/// estimate + half_width + margin < (μE)^(m+n). Cells with no witness where
/// some estimate fell below the threshold are reported inconclusive.
std::vector<ScanCell> stability_scan(const FunctionFamily &A, const ScanParams &params);

/// Exact μ2{(u0,u1) in E×E : u0 + u1 in H}.
Rational pairsum_z_bound(const Region &H, const Region &E);

struct ProbeReport {
  std::vector<ScanCell> cells;
  std::string note;
};

/// Finite-sample probe of proper measurability: stability_scan on the
/// scalar traces of φ. Not a proof.
ProbeReport properly_measurable_probe(const Integrand &phi, const std::vector<DualFunctional> &functionals,
                                      const ScanParams &params);

} // namespace gaugelab
