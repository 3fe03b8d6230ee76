#include "gaugelab/gallery.hpp"

#include "gaugelab/rng.hpp"

#include <algorithm>
#include <set>

namespace gaugelab {

SearchExhausted::SearchExhausted(std::size_t index, std::vector<std::string> trace)
    : std::runtime_error("SearchExhausted: no admissible tag at index " + std::to_string(index)),
      index_(index), trace_(std::move(trace)) {}

const Region &FatSet::stage(int l) const {
  if (l < 0) throw std::out_of_range("negative stage index");
  return stages[static_cast<std::size_t>(std::min(l, levels()))];
}

bool fat_invariant(const Region &H, int r, std::string *diagnostic) {
  const auto &parts = H.parts();
  std::size_t p = 0;
  const std::int64_t cells = std::int64_t(2) << r;
  for (std::int64_t i = 0; i < cells; ++i) {
    Dyadic lo = Dyadic::from_index(i, r), hi = Dyadic::from_index(i + 1, r);
    while (p < parts.size() && parts[p].hi <= lo) ++p;
    Dyadic covered;
    for (std::size_t q = p; q < parts.size() && parts[q].lo < hi; ++q) {
      Dyadic a = max(lo, parts[q].lo), b = min(hi, parts[q].hi);
      if (a < b) covered += b - a;
    }
    if (covered.is_zero() || covered == hi - lo) {
      if (diagnostic)
        *diagnostic = "cell [" + lo.str() + ", " + hi.str() + "] has covered measure " + covered.str();
      return false;
    }
  }
  return true;
}

FatSet build_fat_H(int L, int r, std::uint64_t seed) {
  if (L < 1) throw std::invalid_argument("FatSet needs L >= 1");
  if (r < 2) throw std::invalid_argument("FatSet needs r >= 2");
  if (r + L > 22) throw std::invalid_argument("FatSet resolution r + L above 22 is not supported");
  FatSet fat;
  fat.resolution = r;
  fat.seed = seed;
  fat.stages.emplace_back();
  for (int s = 1; s <= L; ++s) {
    const int scale = r + s - 1;
    const std::int64_t cells = std::int64_t(2) << scale;
    Dyadic half = Dyadic::pow2(-(r + s + 3));
    std::vector<Interval> ivs = fat.stages.back().parts();
    for (std::int64_t i = 0; i < cells; ++i) {
      Dyadic c = Dyadic::from_index(2 * i + 1, scale + 1);
      ivs.emplace_back(c - half, c + half);
    }
    fat.stages.push_back(Region::normalize(std::move(ivs)));
  }
  std::string diag;
  if (!fat_invariant(fat.top(), r, &diag))
    throw std::invalid_argument("FatSet(L=" + std::to_string(L) + ", r=" + std::to_string(r) + ") violates density: " + diag);
  return fat;
}

bool check_sums(const Region &H, const std::vector<Dyadic> &tags, SumMode mode, bool self_sums) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (self_sums && mode == SumMode::sums_out && H.contains(tags[i] + tags[i])) return false;
    for (std::size_t j = i + 1; j < tags.size(); ++j) {
      bool in = H.contains(tags[i] + tags[j]);
      if (in != (mode == SumMode::sums_in)) return false;
    }
  }
  return true;
}

std::vector<Dyadic> lemma3c_sequences(const Region &H, const std::vector<Region> &windows, const Lemma3COptions &opt) {
  const Region span = Region::of(Interval(Dyadic(0), Dyadic(2)));
  const Region allowed = opt.mode == SumMode::sums_in ? H : span - H;
  std::vector<std::string> trace;
  std::size_t failed_at = 0;
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    CounterStream rng(opt.seed, static_cast<std::uint64_t>(attempt));
    std::vector<Region> cur = windows;
    if (opt.self_sums && opt.mode == SumMode::sums_out) {
      Region halves = allowed.scaled_down(1);
      for (auto &w : cur) w = w & halves;
    }
    std::vector<Dyadic> tags;
    bool collapsed = false;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      Region w = cur[i].without_points();
      if (w.measure().is_zero()) {
        trace.push_back("attempt " + std::to_string(attempt) + ": window " + std::to_string(i) + " collapsed");
        failed_at = i;
        collapsed = true;
        break;
      }
      Dyadic t = point_in(w, rng.uniform());
      tags.push_back(t);
      Region shifted = allowed.shifted(-t);
      for (std::size_t j = i + 1; j < cur.size(); ++j) cur[j] = cur[j] & shifted;
    }
    if (collapsed) continue;
    if (check_sums(H, tags, opt.mode, opt.self_sums)) return tags;
    trace.push_back("attempt " + std::to_string(attempt) + ": exact sum check failed");
    failed_at = tags.size() ? tags.size() - 1 : 0;
  }
  throw SearchExhausted(failed_at, std::move(trace));
}

int JumpFunction::variation() const {
  int v = 0;
  for (const auto &p : support.parts()) {
    if (Dyadic(0) < p.lo) ++v;
    if (p.hi < Dyadic(1)) ++v;
  }
  return v;
}

bool JumpFunction::satisfies(const Region &H) const {
  const auto &parts = support.parts();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!parts[i].degenerate() && H.meets_open(parts[i].lo + parts[i].lo, parts[i].hi + parts[i].hi)) return false;
    for (std::size_t j = i + 1; j < parts.size(); ++j)
      if (H.meets_closed(parts[i].lo + parts[j].lo, parts[i].hi + parts[j].hi)) return false;
  }
  return true;
}

std::optional<JumpFunction> targeted_member(const Region &H, const std::vector<Dyadic> &T, int l,
                                            std::string *diagnostic) {
  auto fail = [&](std::string why) -> std::optional<JumpFunction> {
    if (diagnostic) *diagnostic = std::move(why);
    return std::nullopt;
  };
  if (T.empty()) return JumpFunction{Region(), "0"};
  std::vector<Dyadic> pts = T;
  std::sort(pts.begin(), pts.end());
  std::optional<Dyadic> room;
  auto shrink = [&](const Dyadic &d) {
    if (!room || d < *room) room = d;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i] < Dyadic(0) || Dyadic(1) < pts[i]) return fail("tag " + pts[i].str() + " outside [0,1]");
    if (i + 1 < pts.size()) {
      if (pts[i] == pts[i + 1]) return fail("repeated tag " + pts[i].str());
      shrink(pts[i + 1] - pts[i]);
    }
    for (std::size_t j = i; j < pts.size(); ++j) {
      auto d = H.distance(pts[i] + pts[j]);
      if (!d) continue;
      if (d->is_zero()) return fail("sum " + (pts[i] + pts[j]).str() + " lies in H");
      shrink(*d);
    }
  }
  int e = 0;
  if (room) {
    Dyadic quarter = room->scaled_down(2);
    while (quarter < Dyadic::pow2(-e)) ++e;
  }
  Dyadic eps = Dyadic::pow2(-e);
  std::vector<Interval> ivs;
  for (const auto &t : pts) ivs.emplace_back(max(Dyadic(0), t - eps), min(Dyadic(1), t + eps));
  JumpFunction f{Region::normalize(std::move(ivs)), "target(" + std::to_string(pts.size()) + " pts, eps=2^-" + std::to_string(e) + ")"};
  if (f.variation() > l)
    return fail("targeted member has variation " + std::to_string(f.variation()) + " > " + std::to_string(l));
  if (!f.satisfies(H)) return fail("targeted member violates the pair constraint");
  return f;
}

AFamily build_A_family(const FatSet &fat, int l, int jump_grid_depth, std::size_t cap,
                       const std::vector<std::vector<Dyadic>> &targets) {
  if (l < 2) throw std::invalid_argument("A family needs l >= 2");
  if (cap < 1) throw std::invalid_argument("A family needs cap >= 1");
  if (jump_grid_depth < 1 || jump_grid_depth > 24) throw std::invalid_argument("jump grid depth out of range");
  const Region &H = fat.stage(l);
  AFamily fam;
  fam.members.push_back({Region(), "0"});
  const std::int64_t cells = std::int64_t(1) << jump_grid_depth;
  constexpr std::int64_t max_width = 4;
  for (std::int64_t i = 0; i < cells && fam.members.size() < cap; ++i)
    for (std::int64_t w = 1; w <= max_width && i + w <= cells && fam.members.size() < cap; ++w) {
      Interval iv(Dyadic::from_index(i, jump_grid_depth), Dyadic::from_index(i + w, jump_grid_depth));
      JumpFunction f{Region::of(iv), "[" + iv.lo.str() + ", " + iv.hi.str() + "]"};
      if (f.variation() <= l && f.satisfies(H)) fam.members.push_back(std::move(f));
    }
  for (const auto &T : targets) {
    std::string diag;
    if (auto f = targeted_member(H, T, l, &diag))
      fam.members.push_back(std::move(*f));
    else
      fam.diagnostics.push_back(diag);
  }
  return fam;
}

Integrand phi_3E(const std::vector<JumpFunction> &family, std::size_t R) {
  if (R < 1 || R > family.size()) throw std::invalid_argument("phi_3E needs 1 <= R <= family size");
  auto space = ValueSpace::seq_sup(R);
  std::set<Dyadic> cuts{Dyadic(0), Dyadic(1)};
  for (std::size_t n = 0; n < R; ++n)
    for (const auto &b : family[n].support.boundary())
      if (Dyadic(0) < b && b < Dyadic(1)) cuts.insert(b);
  std::vector<Dyadic> breaks(cuts.begin(), cuts.end());
  auto value_at = [&](const Dyadic &t) {
    VectorValue v(space);
    for (std::size_t n = 0; n < R; ++n) v[n] = family[n](t);
    return v;
  };
  std::vector<VectorValue> levels;
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) levels.push_back(value_at(Dyadic::midpoint(breaks[j], breaks[j + 1])));
  auto phi = Integrand::step(breaks, levels);
  Integrand::PointValues points;
  for (const auto &t : breaks) {
    auto v = value_at(t);
    if (!(v == phi.piece_value(phi.piece_of(t), t))) points.emplace(t, std::move(v));
  }
  return phi.with_point_values(std::move(points)).labelled("3e");
}

Witness3E oscillation_witness_3E(const FatSet &fat, const Gauge &delta, const Witness3EOptions &opt) {
  Witness3E w;
  Region D;
  int kappa = 3; // smallest k = 2^kappa with k >= 5
  for (;; ++kappa) {
    if (kappa > opt.max_k_exponent)
      throw ResolutionExceeded("no k = 2^j <= 2^" + std::to_string(opt.max_k_exponent) +
                               " with {delta >= 1/k} of measure >= 4/5");
    Rational inv_k = pow2_rational(-kappa);
    std::vector<Interval> ivs;
    if (delta.is_piecewise()) {
      const auto &st = delta.steps();
      for (std::size_t j = 0; j < st.levels.size(); ++j)
        if (st.levels[j] >= inv_k) ivs.emplace_back(st.breaks[j], st.breaks[j + 1]);
    } else {
      const int depth = kappa + 6;
      for (std::int64_t i = 0; i < (std::int64_t(1) << depth); ++i) {
        Dyadic a = Dyadic::from_index(i, depth), b = Dyadic::from_index(i + 1, depth);
        if (delta(Dyadic::midpoint(a, b)) >= inv_k) ivs.emplace_back(a, b);
      }
    }
    D = Region::normalize(std::move(ivs));
    if (D.measure().to_rational() >= Rational(4, 5)) break;
  }
  w.k = 1 << kappa;
  w.d_measure = D.measure().to_rational();

  std::vector<Interval> cells;
  std::vector<Region> windows;
  for (int j = 0; j < w.k; ++j) {
    Interval cell(Dyadic::from_index(j, kappa), Dyadic::from_index(j + 1, kappa));
    Region win = (D & Region::of(cell)).without_points();
    if (win.measure().is_zero()) continue;
    cells.push_back(cell);
    windows.push_back(std::move(win));
  }
  w.m = static_cast<int>(cells.size());
  w.stage = opt.stage > 0 ? opt.stage : 2 * w.m;
  const Region &H = fat.stage(w.stage);

  w.T = lemma3c_sequences(H, windows, {SumMode::sums_out, opt.seed, opt.max_attempts, true});
  w.U = lemma3c_sequences(H, windows, {SumMode::sums_in, splitmix64(opt.seed), opt.max_attempts, false});

  std::string diag;
  auto target = targeted_member(H, w.T, w.stage, &diag);
  if (!target) throw std::runtime_error("targeted member infeasible: " + diag);
  if (opt.R < 2) throw std::invalid_argument("R must be >= 2");
  auto fam = build_A_family(fat, w.stage, opt.jump_grid_depth, opt.R - 1);
  if (fam.members.size() < opt.R - 1)
    throw std::invalid_argument("A family has only " + std::to_string(fam.members.size()) + " members, R - 1 = " +
                                std::to_string(opt.R - 1) + " needed");
  w.family = std::move(fam.members);
  w.family.push_back(std::move(*target));
  auto phi = phi_3E(w.family, opt.R);

  CousinOptions co;
  co.max_depth = opt.max_depth;
  std::vector<TaggedInterval> filler;
  for (const auto &gap : (Region::unit() - Region::normalize(cells)).parts()) {
    auto part = cousin_fill(gap, delta, co);
    filler.insert(filler.end(), part.begin(), part.end());
  }
  auto assemble = [&](const std::vector<Dyadic> &tags) {
    TaggedPartition p;
    for (std::size_t i = 0; i < cells.size(); ++i) p.items.push_back({cells[i], tags[i]});
    p.items.insert(p.items.end(), filler.begin(), filler.end());
    std::sort(p.items.begin(), p.items.end(),
              [](const TaggedInterval &a, const TaggedInterval &b) { return a.interval.lo < b.interval.lo; });
    if (!is_partition(p)) throw std::logic_error("assembled family is not a partition");
    if (!is_subordinate(p, delta)) throw std::runtime_error("a tag fell outside {delta >= 1/k}; refine the gauge proxy");
    return p;
  };
  w.p1 = assemble(w.T);
  w.p2 = assemble(w.U);
  w.sum1 = riemann_sum(phi, w.p1);
  w.sum2 = riemann_sum(phi, w.p2);
  w.gap = distance(w.sum1, w.sum2).hi;
  w.bound = ratio(w.m - 1, w.k);
  return w;
}

Phi3F phi_3F(int grid_depth) {
  if (grid_depth < 1 || grid_depth > 14) throw std::invalid_argument("3F grid depth must be in 1..14");
  const std::int64_t N = std::int64_t(1) << grid_depth;
  std::vector<Dyadic> grid;
  for (std::int64_t i = 0; i <= N; ++i) grid.push_back(Dyadic::from_index(i, grid_depth));
  auto space = ValueSpace::step_linf(grid);
  // On [g_i, g_{i+1}) the indicator of [0,t] covers cells j < i.
  std::vector<VectorValue> levels;
  for (std::int64_t i = 0; i < N; ++i) {
    VectorValue v(space);
    for (std::int64_t j = 0; j < i; ++j) v[j] = 1;
    levels.push_back(std::move(v));
  }
  VectorValue ones(space, std::vector<Rational>(N, Rational(1)));
  auto phi = Integrand::step(grid, std::move(levels))
                 .with_point_values({{Dyadic(1), ones}})
                 .with_separation(1)
                 .labelled("3f");
  VectorValue integral(space);
  for (std::int64_t j = 0; j < N; ++j) integral[j] = (Dyadic(1) - grid[j + 1]).to_rational();
  return {std::move(phi), std::move(integral)};
}

Phi3G phi_3G(std::size_t R) {
  if (R < 1 || R > 4096) throw std::invalid_argument("3G needs 1 <= R <= 4096");
  auto space = ValueSpace::seq_l2(R);
  const int r = static_cast<int>(R);
  std::vector<Dyadic> breaks{Dyadic(0)};
  std::vector<VectorValue> levels{VectorValue::zero(space)};
  for (int n = r - 1; n >= 0; --n) {
    breaks.push_back(Dyadic::pow2(-(n + 1)));
    VectorValue v(space);
    v[n] = Rational(Dyadic::pow2(n).to_rational() / (n + 1));
    levels.push_back(std::move(v));
  }
  breaks.emplace_back(1);
  auto phi = Integrand::step(breaks, std::move(levels))
                 .with_point_values({{Dyadic(1), VectorValue::zero(space)}})
                 .labelled("3g");
  VectorValue integral(space);
  for (int n = 0; n < r; ++n) integral[n] = Rational(1, 2 * (n + 1));
  return {std::move(phi), std::move(integral)};
}

IntegrandSequence truncation_sequence(const Integrand &phi, std::vector<Region> cover) {
  if (cover.empty()) throw std::invalid_argument("empty cover");
  std::vector<Region> unions;
  Region acc;
  for (const auto &c : cover) unions.push_back(acc = acc | c);
  if (!((unions.back() & Region::unit()) == Region::unit()))
    throw std::invalid_argument("cover does not cover [0,1]");
  return [phi, unions](int n) {
    auto idx = static_cast<std::size_t>(std::clamp<int>(n, 0, static_cast<int>(unions.size()) - 1));
    return restrict_integrand(phi, unions[idx]);
  };
}

Integrand spike(int j) {
  if (j < 0 || j > 60) throw std::invalid_argument("spike index out of range");
  auto space = ValueSpace::finite_dim(1, NormKind::l1);
  Rational height = Dyadic::pow2(j).to_rational();
  VectorValue h(space, {height}), zero = VectorValue::zero(space);
  if (j == 0)
    return Integrand::step({Dyadic(0), Dyadic(1)}, {h}).with_point_values({{Dyadic(0), zero}}).labelled("spike");
  Dyadic w = Dyadic::pow2(-j);
  return Integrand::step({Dyadic(0), w, Dyadic(1)}, {h, zero})
      .with_point_values({{Dyadic(0), zero}, {w, h}})
      .labelled("spike");
}

FunctionFamily pair_avoiding_family(const Region &H, std::size_t members, std::size_t points, std::uint64_t seed) {
  if (points < 1) throw std::invalid_argument("need at least one point per member");
  int kappa = 0;
  while ((std::size_t(1) << kappa) < 2 * points) ++kappa;
  FunctionFamily B;
  B.cls = FunctionFamily::Class::piecewise_step;
  CounterStream rng(seed, 0x3d);
  for (std::size_t i = 0; i < members; ++i) {
    std::set<std::int64_t> picks;
    while (picks.size() < points) picks.insert(static_cast<std::int64_t>(rng.below(std::uint64_t(1) << kappa)));
    std::vector<Region> windows;
    for (auto c : picks)
      windows.push_back(Region::of(Interval(Dyadic::from_index(c, kappa), Dyadic::from_index(c + 1, kappa))));
    auto T = lemma3c_sequences(H, windows, {SumMode::sums_out, splitmix64(seed + i), 64, true});
    std::string diag;
    auto f = targeted_member(H, T, static_cast<int>(2 * points + 2), &diag);
    if (!f) throw std::runtime_error("pair-avoiding member infeasible: " + diag);
    auto shared = std::make_shared<JumpFunction>(std::move(*f));
    B.members.push_back({"B" + std::to_string(i), [shared](const Dyadic &t) { return Rational((*shared)(t)); }});
  }
  return B;
}

} // namespace gaugelab
