#pragma once

#include "gaugelab/integrand.hpp"
#include "gaugelab/integrators.hpp"
#include "gaugelab/partition.hpp"
#include "gaugelab/stability.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaugelab {

class SearchExhausted : public std::runtime_error {
public:
  SearchExhausted(std::size_t index, std::vector<std::string> trace);
  std::size_t index() const { return index_; }
  const std::vector<std::string> &trace() const { return trace_; }

private:
  std::size_t index_;
  std::vector<std::string> trace_;
};

class ResolutionExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Increasing closed sets H_0 ⊆ ... ⊆ H_L inside [0,2], each meeting every
/// dyadic cell of length >= 2^-r and its complement in positive measure.
struct FatSet {
  std::vector<Region> stages; ///< stages[0] = H_0 = empty
  int resolution = 0;
  std::uint64_t seed = 0;

  int levels() const { return static_cast<int>(stages.size()) - 1; }
  /// H_l, with H_l = H_L for l > L.
  const Region &stage(int l) const;
  const Region &top() const { return stages.back(); }
};

/// Stage s adds, in every dyadic cell of [0,2] of length 2^-(r+s-1), the
/// centred closed interval of length 2^-(r+s+2).
FatSet build_fat_H(int L, int r, std::uint64_t seed = 0);

/// Checks 0 < μ(H ∩ I) < |I| for every dyadic cell I ⊆ [0,2] of length 2^-r.
bool fat_invariant(const Region &H, int r, std::string *diagnostic = nullptr);

enum class SumMode { sums_in, sums_out };

struct Lemma3COptions {
  SumMode mode = SumMode::sums_in;
  std::uint64_t seed = 0;
  int max_attempts = 64;
  /// sums-out only: also keep 2 t_i outside H.
  bool self_sums = false;
};

/// Greedy randomized tag search: t_i is drawn from window i, shrunk by
/// every earlier tag to (H - t_j), or to the closure of ([0,2] \ H) - t_j
/// for sums-out. Results are verified exactly before being returned.
std::vector<Dyadic> lemma3c_sequences(const Region &H, const std::vector<Region> &windows,
                                      const Lemma3COptions &opt);

bool check_sums(const Region &H, const std::vector<Dyadic> &tags, SumMode mode, bool self_sums);

/// {0,1}-valued step function: the indicator of a closed region in [0,1].
struct JumpFunction {
  Region support;
  std::string id;

  int operator()(const Dyadic &t) const { return support.contains(t) ? 1 : 0; }
  /// Jumps inside (0,1).
  int variation() const;
  /// min(f(s), f(t)) = 0 whenever s < t and s + t in H, checked exactly.
  bool satisfies(const Region &H) const;
};

/// Indicator of ε-neighbourhoods of T, ε a power of two at most a quarter of
/// the distance from the pairwise sums (including 2t) to H and of the
/// spacing of T. Empty when some sum lies in H or the variation exceeds l.
std::optional<JumpFunction> targeted_member(const Region &H, const std::vector<Dyadic> &T, int l,
                                            std::string *diagnostic = nullptr);

struct AFamily {
  std::vector<JumpFunction> members;
  std::vector<std::string> diagnostics;
};

/// Members of A_l with jumps on the grid of depth jump_grid_depth, in
/// canonical order (constant 0 first, then single intervals by left end and
/// width), up to cap; followed by targeted members for the given tag sets.
AFamily build_A_family(const FatSet &fat, int l, int jump_grid_depth, std::size_t cap,
                       const std::vector<std::vector<Dyadic>> &targets = {});

/// t ↦ (f_0(t), ..., f_{R-1}(t)) in SeqSup(R).
Integrand phi_3E(const std::vector<JumpFunction> &family, std::size_t R);

struct Witness3EOptions {
  std::size_t R = 64;
  int jump_grid_depth = 10;
  /// Stage index l; 0 selects 2m.
  int stage = 0;
  std::uint64_t seed = 0;
  int max_attempts = 64;
  int max_k_exponent = 12;
  int max_depth = 40;
};

struct Witness3E {
  int k = 0;
  int m = 0;
  int stage = 0;
  Rational d_measure;
  std::vector<Dyadic> T; ///< pairwise sums (and doubles) outside H_l
  std::vector<Dyadic> U; ///< pairwise sums inside H_l
  TaggedPartition p1;
  TaggedPartition p2;
  std::vector<JumpFunction> family; ///< coordinates of φ; the last one is the targeted member
  VectorValue sum1;
  VectorValue sum2;
  Rational gap;
  Rational bound; ///< (m - 1)/k
};

/// Two partitions subordinate to δ that agree off m cells of width 1/k and
/// whose Riemann sums for φ_3E differ by at least (m - 1)/k.
Witness3E oscillation_witness_3E(const FatSet &fat, const Gauge &delta, const Witness3EOptions &opt = {});

struct Phi3F {
  Integrand phi;
  VectorValue integral;
};

/// t ↦ χ[0,t] on the grid of depth grid_depth, as an L∞ step vector.
Phi3F phi_3F(int grid_depth = 8);

struct Phi3G {
  Integrand phi;
  VectorValue integral;
};

/// 2^n/(n+1) e_n on [2^-(n+1), 2^-n) for n < R, zero on [0, 2^-R) and at 1.
Phi3G phi_3G(std::size_t R);

/// n ↦ φ restricted to the union of cover_0..cover_n.
IntegrandSequence truncation_sequence(const Integrand &phi, std::vector<Region> cover);

/// 2^j times the indicator of (0, 2^-j], scalar valued.
Integrand spike(int j);

/// Indicators of ε-neighbourhoods of random point sets whose pairwise sums
/// and doubles avoid H: members of the family B built from H.
FunctionFamily pair_avoiding_family(const Region &H, std::size_t members, std::size_t points, std::uint64_t seed);

} // namespace gaugelab
