#pragma once

#include "gaugelab/dyadic.hpp"
#include "gaugelab/region.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaugelab {

class GaugeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when bisection cannot fit a subordinate tag within the depth budget.
class MaxDepthExceeded : public std::runtime_error {
public:
  MaxDepthExceeded(Interval where, int depth);
  const Interval &where() const { return where_; }
  int depth() const { return depth_; }

private:
  Interval where_;
  int depth_;
};

/// Strictly positive delta on [0,1].
///
/// Piecewise-constant gauges are checked for positivity on construction.
/// Evaluator gauges are trusted, but every value actually computed is checked
/// and a non-positive one raises GaugeError.
class Gauge {
public:
  using Evaluator = std::function<Rational(const Dyadic &)>;
  using DyadicEvaluator = std::function<Dyadic(const Dyadic &)>;

  static Gauge constant(const Rational &delta);
  static Gauge piecewise(StepFunction steps);
  static Gauge evaluator(Evaluator fn, std::optional<Rational> floor = std::nullopt,
                         std::string label = "evaluator");
  /// Evaluator whose values are dyadic; partition builders compare exactly
  /// without going through rationals.
  static Gauge dyadic_evaluator(DyadicEvaluator fn, std::optional<Rational> floor = std::nullopt,
                                std::string label = "evaluator");

  Rational operator()(const Dyadic &t) const;
  /// delta(t) when it is dyadic and cheaply known to be so.
  std::optional<Dyadic> dyadic_at(const Dyadic &t) const;

  bool is_piecewise() const { return !fn_ && !dfn_; }
  const StepFunction &steps() const { return steps_; }
  const std::optional<Rational> &floor() const { return floor_; }
  const std::string &label() const { return label_; }

private:
  Gauge() = default;

  StepFunction steps_;
  Evaluator fn_;
  DyadicEvaluator dfn_;
  std::vector<std::optional<Dyadic>> dyadic_levels_;
  std::optional<Rational> floor_;
  std::string label_;
};

enum class Flavor { mcshane, henstock };
enum class TagStrategy { left, mid, sampled };

struct TaggedInterval {
  Interval interval;
  Dyadic tag;

  friend bool operator==(const TaggedInterval &, const TaggedInterval &) = default;
};

struct TaggedPartition {
  std::vector<TaggedInterval> items;
  Flavor flavor = Flavor::mcshane;
};

/// Intervals non-overlapping and covering [0,1] exactly, tags in [0,1];
/// for the Henstock flavor every tag must also lie in its interval.
bool is_partition(const TaggedPartition &p);
/// t - delta(t) <= a <= b <= t + delta(t) for every item.
bool is_subordinate(const TaggedInterval &item, const Gauge &g);
bool is_subordinate(const TaggedPartition &p, const Gauge &g);

struct CousinOptions {
  Flavor flavor = Flavor::mcshane;
  TagStrategy strategy = TagStrategy::mid;
  int max_depth = 40;
  std::uint64_t seed = 0;
  int samples = 4; ///< candidate tags per interval for the sampled strategy
};

/// Subordinate partition of [0,1] by dyadic bisection. Deterministic in
/// (gauge, options).
TaggedPartition cousin_partition(const Gauge &g, const CousinOptions &opt);
/// Same procedure on a sub-interval; depth is counted from `span`.
std::vector<TaggedInterval> cousin_fill(const Interval &span, const Gauge &g, const CousinOptions &opt);

/// Intersects each item with r, keeping the original tag. Zero-length
/// pieces are dropped.
std::vector<TaggedInterval> restrict_partition(const TaggedPartition &p, const Region &r);

/// Completes a non-overlapping subordinate family to a full subordinate
/// partition by filling each gap component with cousin_fill.
TaggedPartition extend_to_partition(std::vector<TaggedInterval> partial, const Gauge &g,
                                    const CousinOptions &opt);

Region union_of(const std::vector<TaggedInterval> &items);

nlohmann::json to_json(const TaggedPartition &p);
TaggedPartition partition_from_json(const nlohmann::json &j, Flavor flavor = Flavor::mcshane);

} // namespace gaugelab
