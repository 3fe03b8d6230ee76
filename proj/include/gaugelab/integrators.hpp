#pragma once

#include "gaugelab/integrand.hpp"
#include "gaugelab/partition.hpp"
#include "gaugelab/values.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gaugelab {

inline Rational pow2_rational(int k) { return Dyadic::pow2(k).to_rational(); }

enum class Status { converged, oscillation_floor, max_level };
std::string to_string(Status s);

struct LevelTrace {
  int level;
  std::string gauge;
  std::size_t cells;
  Rational oscillation;
};

/// Result of mcshane_integrate.
///
/// A converged status certifies only that Riemann sums over the partitions
/// tried under the gauge schedule agree within the tolerance. It is not a
/// proof of McShane integrability, which quantifies over all gauges.
struct IntegralEstimate {
  VectorValue value;
  Rational oscillation;
  Status status = Status::max_level;
  std::vector<LevelTrace> gauge_trace;
};

struct McShaneOptions {
  /// Explicit gauges tried in order; empty selects the automatic schedule.
  std::vector<Gauge> schedule;
  Rational tolerance = pow2_rational(-20);
  int trials = 3;
  int max_level = 16;
  /// Stop with oscillation-floor after this many levels without a new minimum.
  int floor_window = 8;
  std::size_t max_cells = std::size_t(1) << 18;
  int max_depth = 60;
  std::uint64_t seed = 0;
};

/// Level k of the automatic schedule: 2^-k times the length of the piece
/// containing t, capped by the distance from t to the nearest interior
/// breakpoint. Constant 2^-k for evaluator integrands.
Gauge auto_gauge(const Integrand &phi, int level);

IntegralEstimate mcshane_integrate(const Integrand &phi, const McShaneOptions &opt = {});

/// ν(r), by mcshane_integrate of the restriction of φ to r.
IntegralEstimate indefinite_integral(const Integrand &phi, const Region &r, const McShaneOptions &opt = {});

struct PettisRow {
  std::size_t functional;
  std::size_t region;
  Rational from_integral;
  Rational exact;
  Rational residual;
};

struct PettisReport {
  std::vector<PettisRow> rows;
  Rational max_residual;
  std::size_t failures = 0;
  bool pass = true;
};

PettisReport pettis_check(const Integrand &phi, const std::vector<DualFunctional> &functionals,
                          const std::vector<Region> &regions, const Rational &tau,
                          const McShaneOptions &opt = {});

struct SeriesReport {
  std::vector<VectorValue> partial_sums; ///< S_0 .. S_N
  std::vector<NormEnclosure> tails;      ///< ||S_N - S_j||, j = 0..N
  Rational cauchy;                       ///< max over N/2 <= j < k <= N of ||S_k - S_j|| (upper)
  bool pass = false;
};

SeriesReport interval_series_check(const Integrand &phi, const std::vector<Interval> &blocks, std::size_t N,
                                   const Rational &tau, const McShaneOptions &opt = {});

struct ModulusRow {
  Rational eta;
  Rational modulus; ///< upper enclosure
  std::size_t regions;
};

struct AbsContOptions {
  std::size_t samples_per_eta = 16;
  std::uint64_t seed = 0;
  /// Use closed-form ν for piecewise integrands instead of mcshane_integrate.
  bool exact_nu = true;
  McShaneOptions mcshane;
};

/// Sampled regions of measure at most η: prefix, suffix, and random unions
/// of up to three dyadic intervals. Regions are pooled across η so the table
/// is nondecreasing.
std::vector<ModulusRow> absolute_continuity(const Integrand &phi, const std::vector<Rational> &eta_grid,
                                            const AbsContOptions &opt = {});

/// Random regions of measure <= eta (deterministic in seed, stream).
std::vector<Region> sample_small_regions(const Rational &eta, std::size_t count, std::uint64_t seed,
                                         std::uint64_t stream);

/// Certified upper bound on sup ||φ(t)|| for piecewise classes; the declared
/// bound for evaluators.
std::optional<Rational> sup_norm_bound(const Integrand &phi);

/// Lower Darboux sum of ||φ(t)|| over dyadic cells of the given depth, using
/// the essential infimum on each cell (point overrides are ignored).
/// Certified for piecewise classes; evaluator integrands use a sampled minimum.
Rational lower_norm_integral(const Integrand &phi, int depth);

struct TalagrandResult {
  std::vector<VectorValue> means;
  std::vector<double> sigma; ///< per-batch sample standard deviation of ||φ(s) - mean||_2
  VectorValue pooled;
  Rational spread;
};

/// Empirical means of φ at i.i.d. uniform points; draw i of batch b comes
/// from counter stream (seed, b, i).
TalagrandResult talagrand_integrate(const Integrand &phi, std::uint64_t seed, std::size_t n, std::size_t batches);

struct BochnerCertificate {
  std::vector<std::pair<Region, VectorValue>> parts;
  Rational dom_bound; ///< upper bound on the integral of ||φ - ψ||
  VectorValue value;
  Rational epsilon;
};

struct NotApproximable {
  /// Lower bound on the integral of ||φ - ψ|| for every simple ψ.
  Rational bound;
  std::string reason;
};

using BochnerResult = std::variant<BochnerCertificate, NotApproximable>;

BochnerResult bochner_integrate(const Integrand &phi, const Rational &epsilon, int max_depth = 24);

/// Closed-form sup over f, φ and sampled E with μE <= η of |∫_E f φ|.
std::vector<ModulusRow> uniform_integrability(const std::vector<Integrand> &family,
                                              const std::vector<DualFunctional> &functionals,
                                              const std::vector<Rational> &eta_grid,
                                              std::size_t samples_per_eta = 16, std::uint64_t seed = 0);

using IntegrandSequence = std::function<Integrand(int)>;

struct VitaliOptions {
  Rational tau = pow2_rational(-10);
  int n_max = 16;
  std::size_t pointwise_samples = 64;
  std::uint64_t seed = 0;
  /// Replace the norm in H1 by |f(φ_n(t) - φ(t))| over the functional family.
  bool weak_h1 = false;
  McShaneOptions mcshane;
};

struct VitaliReport {
  bool h1 = false;
  bool h2 = false;
  bool c = false;
  bool c_claimed = false;
  Rational h1_residual;
  Rational h2_residual;
  Rational c_residual;
  std::vector<std::string> violations;
};

VitaliReport vitali_limit(const IntegrandSequence &seq, const Integrand &limit,
                          const std::vector<DualFunctional> &functionals, const std::vector<Region> &regions,
                          const VitaliOptions &opt = {});

} // namespace gaugelab
