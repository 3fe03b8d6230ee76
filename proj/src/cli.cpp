#include "gaugelab/cli.hpp"

#include "gaugelab/gallery.hpp"
#include "gaugelab/integrators.hpp"
#include "gaugelab/report.hpp"
#include "gaugelab/rng.hpp"
#include "gaugelab/stability.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace gaugelab {

namespace {

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string command;
  std::string which; // gallery target
  std::string fn = "3g";
  int R = 16;
  int L = 4;
  int r = 3;
  std::string tol;
  std::string gauge = "auto";
  std::optional<std::uint64_t> seed;
  std::string seed_source = "default";
  std::size_t draws = 10000;
  std::size_t batches = 100;
  std::size_t samples = 100000;
  int depth = 12;
  int N = 0;
  int max_level = 16;
  int trials = 3;
  int grid = 8;
  std::string eps = "2^-8";
  int n_max = 0;
  std::string alpha = "3/10";
  std::string beta = "7/10";
  int m = 1;
  int n = 1;
  int mn_max = 2;
  int threads = 1;
  std::string out;
  std::string csv;
  std::string config;
  bool deterministic = false;
};

using Table = std::vector<std::vector<std::string>>;

struct Outcome {
  bool pass = true;
  json result = json::object();
  json residuals = json::object();
  Table csv;
};

Rational parse_param(const std::string &name, const std::string &text) {
  try {
    return parse_rational(text);
  } catch (const std::exception &e) {
    throw UsageError("--" + name + ": " + e.what());
  }
}

Rational tol_or(const Config &c, const char *fallback) { return parse_param("tol", c.tol.empty() ? fallback : c.tol); }

std::uint64_t need_seed(const Config &c) {
  if (!c.seed) throw UsageError("command '" + c.command + "' is stochastic: pass --seed, a config seed, or set GIL_SEED");
  return *c.seed;
}

std::uint64_t seed_or_zero(const Config &c) { return c.seed.value_or(0); }

void check_range(const char *name, long v, long lo, long hi) {
  if (v < lo || v > hi)
    throw UsageError(std::string("--") + name + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

void validate(const Config &c) {
  check_range("R", c.R, 1, 4096);
  check_range("L", c.L, 1, 12);
  check_range("r", c.r, 1, 12);
  if (c.r + c.L > 22) throw UsageError("--r plus --L must not exceed 22");
  check_range("depth", c.depth, 1, 40);
  check_range("N", c.N, 0, 4096);
  check_range("max-level", c.max_level, 1, 40);
  check_range("trials", c.trials, 2, 16);
  check_range("grid", c.grid, 1, 14);
  check_range("n-max", c.n_max, 0, 4096);
  check_range("m", c.m, 1, 6);
  check_range("n", c.n, 1, 6);
  check_range("mn-max", c.mn_max, 1, 6);
  check_range("threads", c.threads, 1, 1024);
  if (c.draws < 2 || c.draws > 100000000) throw UsageError("--draws must be in [2, 1e8]");
  if (c.batches < 1 || c.batches > 100000) throw UsageError("--batches must be in [1, 1e5]");
  if (c.samples < 1 || c.samples > 100000000) throw UsageError("--samples must be in [1, 1e8]");
  for (const auto &[name, text] : {std::pair{"alpha", c.alpha}, {"beta", c.beta}, {"eps", c.eps}}) {
    auto q = parse_param(name, text);
    if (sgn(q) < 0 || q > 1) throw UsageError(std::string("--") + name + " must lie in [0,1]");
  }
  if (!c.tol.empty() && sgn(parse_param("tol", c.tol)) <= 0) throw UsageError("--tol must be positive");
}

json params_json(const Config &c) {
  json p = {{"fn", c.fn},       {"R", c.R},         {"L", c.L},
            {"r", c.r},         {"tol", c.tol},     {"gauge", c.gauge},
            {"draws", c.draws}, {"batches", c.batches}, {"samples", c.samples},
            {"depth", c.depth}, {"N", c.N},         {"max_level", c.max_level},
            {"trials", c.trials}, {"grid", c.grid}, {"eps", c.eps},
            {"n_max", c.n_max}, {"alpha", c.alpha}, {"beta", c.beta},
            {"m", c.m},         {"n", c.n},         {"mn_max", c.mn_max},
            {"threads", c.threads}, {"deterministic", c.deterministic}};
  if (!c.which.empty()) p["target"] = c.which;
  if (!c.out.empty()) p["out"] = c.out;
  if (!c.csv.empty()) p["csv"] = c.csv;
  if (!c.config.empty()) p["config"] = c.config;
  p["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  p["seed_source"] = c.seed_source;
  return p;
}

// Integrands by name.

struct Named {
  Integrand phi;
  std::optional<VectorValue> integral;
};

SpacePtr scalar_space() { return ValueSpace::finite_dim(1, NormKind::l1); }

Integrand scalar_poly(const std::vector<Rational> &coeffs, const std::string &label) {
  auto space = scalar_space();
  std::vector<VectorValue> cs;
  for (const auto &q : coeffs) cs.emplace_back(space, std::vector<Rational>{q});
  return Integrand::polynomial({Dyadic(0), Dyadic(1)}, {cs}).labelled(label);
}

std::vector<Rational> parse_list(const std::string &name, const std::string &text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_param(name, item));
  if (out.empty()) throw UsageError("--fn " + name + " needs at least one value");
  return out;
}

int parse_int(const std::string &name, const std::string &text, int lo, int hi) {
  try {
    std::size_t used = 0;
    int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    if (v < lo || v > hi) throw std::out_of_range("range");
    return v;
  } catch (const std::exception &) {
    throw UsageError(name + " expects an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

Named make_fn(const Config &c) {
  const std::string &fn = c.fn;
  auto colon = fn.find(':');
  std::string head = fn.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : fn.substr(colon + 1);
  if (fn == "3g") {
    auto g = phi_3G(static_cast<std::size_t>(c.R));
    return {g.phi, g.integral};
  }
  if (fn == "3f") {
    auto f = phi_3F(c.grid);
    return {f.phi, f.integral};
  }
  if (fn == "3e") {
    auto fat = build_fat_H(c.L, c.r, seed_or_zero(c));
    auto fam = build_A_family(fat, 2, 10, static_cast<std::size_t>(c.R));
    auto phi = phi_3E(fam.members, static_cast<std::size_t>(c.R));
    return {phi, exact_integral(phi, Region::unit())};
  }
  if (fn == "t") {
    auto phi = scalar_poly({0, 1}, "t");
    return {phi, exact_integral(phi, Region::unit())};
  }
  if (head == "const" && !arg.empty()) {
    auto phi = scalar_poly({parse_param("fn", arg)}, fn);
    return {phi, exact_integral(phi, Region::unit())};
  }
  if (head == "poly" && !arg.empty()) {
    auto phi = scalar_poly(parse_list("poly", arg), fn);
    return {phi, exact_integral(phi, Region::unit())};
  }
  if (head == "dyadic-indicator" && !arg.empty()) {
    int d = parse_int("dyadic-indicator", arg, 1, 60);
    auto space = scalar_space();
    VectorValue one(space, {Rational(1)}), zero(space);
    Dyadic w = Dyadic::pow2(-d);
    auto phi = Integrand::step({Dyadic(0), w, Dyadic(1)}, {one, zero}).with_point_values({{w, one}}).labelled(fn);
    return {phi, exact_integral(phi, Region::unit())};
  }
  if (head == "spike" && !arg.empty()) {
    auto phi = spike(parse_int("spike", arg, 0, 60));
    return {phi, exact_integral(phi, Region::unit())};
  }
  throw UsageError("unknown --fn '" + fn + "' (expected 3g, 3f, 3e, t, const:c, poly:c0,c1,.., dyadic-indicator:d, spike:j)");
}

std::vector<Gauge> parse_schedule(const std::string &text) {
  if (text == "auto") return {};
  std::vector<Gauge> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.rfind("const:", 0) != 0) throw UsageError("--gauge expects 'auto' or a list of const:<rational>");
    auto d = parse_param("gauge", item.substr(6));
    if (sgn(d) <= 0) throw UsageError("--gauge values must be positive");
    out.push_back(Gauge::constant(d));
  }
  if (out.empty()) throw UsageError("--gauge is empty");
  return out;
}

McShaneOptions mcshane_options(const Config &c, const Rational &tol) {
  McShaneOptions o;
  o.schedule = parse_schedule(c.gauge);
  o.tolerance = tol;
  o.trials = c.trials;
  o.max_level = c.max_level;
  o.seed = seed_or_zero(c);
  return o;
}

// Regions and functionals used by the checks.

std::vector<Region> check_regions(std::size_t count, std::uint64_t seed) {
  auto rs = sample_small_regions(Rational(1), count >= 2 ? count - 2 : 0, seed, 0x7265);
  rs.resize(std::min(rs.size(), std::max<std::size_t>(count, 2)));
  return rs;
}

std::vector<DualFunctional> check_functionals(const Integrand &phi, std::size_t count, std::uint64_t seed) {
  const auto &space = phi.space();
  std::vector<DualFunctional> out;
  std::size_t dim = space->size();
  std::size_t coords = std::min(dim, count);
  for (std::size_t i = 0; i < coords; ++i) out.push_back(DualFunctional::coordinate(i * dim / coords));
  CounterStream rng(seed, 0x66756e63);
  // Random combinations scaled into the dual unit ball.
  while (out.size() < count) {
    std::vector<Rational> cs(dim);
    for (auto &q : cs) q = ratio(static_cast<long>(rng.below(17)) - 8, 8);
    Rational scale = 0;
    for (const auto &q : cs) {
      if (space->norm_kind() != NormKind::l1)
        scale += abs(q);
      else if (abs(q) > scale)
        scale = abs(q);
    }
    if (sgn(scale) == 0) continue;
    if (scale > 1)
      for (auto &q : cs) q /= scale;
    out.push_back(DualFunctional::combination(std::move(cs), space));
  }
  return out;
}

std::vector<Rational> eta_grid(int levels) {
  std::vector<Rational> out;
  for (int j = 1; j <= levels; ++j) out.push_back(pow2_rational(-j));
  return out;
}

std::string str(const Rational &q) { return rational_str(q); }

// Commands.

Outcome cmd_integrate(const Config &c) {
  auto named = make_fn(c);
  auto tol = tol_or(c, "2^-12");
  auto est = mcshane_integrate(named.phi, mcshane_options(c, tol));
  Outcome o;
  o.result = estimate_json(est);
  o.pass = est.status == Status::converged;
  if (named.integral) {
    auto err = distance(est.value, *named.integral).hi;
    o.residuals["closed_form"] = exact_json(err);
    o.result["closed_form"] = vector_json(*named.integral);
    o.pass = o.pass && err <= tol;
  }
  o.csv.push_back({"level", "gauge", "cells", "oscillation"});
  for (const auto &t : est.gauge_trace)
    o.csv.push_back({std::to_string(t.level), t.gauge, std::to_string(t.cells), str(t.oscillation)});
  return o;
}

Outcome cmd_pettis(const Config &c) {
  auto named = make_fn(c);
  auto tol = tol_or(c, "2^-10");
  auto seed = seed_or_zero(c);
  auto fs = check_functionals(named.phi, 20, seed);
  auto rs = check_regions(20, seed);
  auto rep = pettis_check(named.phi, fs, rs, tol, mcshane_options(c, tol));
  Outcome o;
  o.result = pettis_json(rep);
  o.result["functionals"] = fs.size();
  o.result["regions"] = rs.size();
  o.residuals["max"] = exact_json(rep.max_residual);
  o.pass = rep.pass && rep.max_residual <= tol;
  return o;
}

Outcome cmd_series(const Config &c) {
  auto named = make_fn(c);
  auto tol = tol_or(c, "2^-10");
  int N = c.N > 0 ? c.N : c.R;
  std::vector<Interval> blocks;
  for (int i = 0; i < N; ++i) blocks.emplace_back(Dyadic::pow2(-(i + 1)), Dyadic::pow2(-i));
  auto rep = interval_series_check(named.phi, blocks, static_cast<std::size_t>(N), tol, mcshane_options(c, tol));
  Outcome o;
  o.result = series_json(rep);
  o.result["cauchy_within_tol"] = rep.pass;
  o.pass = rep.pass;
  o.csv.push_back({"j", "tail_lo", "tail_hi", "formula_lo", "formula_hi"});
  Rational worst = 0;
  bool formula = c.fn == "3g" && N <= c.R;
  for (std::size_t j = 0; j < rep.tails.size(); ++j) {
    std::vector<std::string> row{std::to_string(j), str(rep.tails[j].lo), str(rep.tails[j].hi)};
    if (formula) {
      Rational sq = 0;
      for (int k = static_cast<int>(j); k < N; ++k) sq += Rational(1, 4 * (k + 1) * (k + 1));
      auto f = sqrt_enclosure(sq);
      Rational d1 = rep.tails[j].hi - f.lo, d2 = f.hi - rep.tails[j].lo;
      Rational d = d1 > d2 ? d1 : d2;
      if (d > worst) worst = d;
      row.push_back(str(f.lo));
      row.push_back(str(f.hi));
    }
    o.csv.push_back(std::move(row));
  }
  if (formula) {
    // The verdict for 3G is the tail formula; its slow l2 tail keeps the
    // Cauchy spread above tol at desk-scale N.
    o.residuals["tail_formula"] = exact_json(worst);
    o.pass = worst <= tol;
  }
  return o;
}

Outcome cmd_abscont(const Config &c) {
  auto named = make_fn(c);
  auto tol = tol_or(c, "2^-10");
  auto M = sup_norm_bound(named.phi);
  AbsContOptions opt;
  opt.seed = seed_or_zero(c);
  opt.mcshane = mcshane_options(c, tol);
  auto rows = absolute_continuity(named.phi, eta_grid(10), opt);
  Outcome o;
  o.result["modulus"] = modulus_json(rows);
  o.csv.push_back({"eta", "modulus", "regions", "bound"});
  bool monotone = true, bounded = true;
  Rational excess = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].modulus > rows[i - 1].modulus) monotone = false;
    std::string bound = "";
    if (M) {
      Rational b = *M * rows[i].eta + 2 * tol;
      bound = str(b);
      if (rows[i].modulus > b) {
        bounded = false;
        if (rows[i].modulus - b > excess) excess = rows[i].modulus - b;
      }
    }
    o.csv.push_back({str(rows[i].eta), str(rows[i].modulus), std::to_string(rows[i].regions), bound});
  }
  // Rows are listed with decreasing eta.
  o.result["nondecreasing"] = monotone;
  o.result["sup_bound"] = M ? json(exact_json(*M)) : json(nullptr);
  o.result["within_bound"] = bounded;
  o.residuals["excess"] = exact_json(excess);
  o.pass = monotone && (!M || bounded);
  return o;
}

Outcome cmd_lln(const Config &c) {
  auto seed = need_seed(c);
  auto named = make_fn(c);
  if (!named.integral) throw UsageError("lln needs an integrand with a closed-form integral");
  auto res = talagrand_integrate(named.phi, seed, c.draws, c.batches);
  auto target = named.integral->to_doubles();
  std::size_t within = 0;
  Outcome o;
  o.csv.push_back({"batch", "error", "sigma", "radius"});
  double rootn = std::sqrt(static_cast<double>(c.draws));
  for (std::size_t b = 0; b < res.means.size(); ++b) {
    auto mean = res.means[b].to_doubles();
    double err = 0;
    for (std::size_t i = 0; i < mean.size(); ++i) err += (mean[i] - target[i]) * (mean[i] - target[i]);
    err = std::sqrt(err);
    double radius = 3 * res.sigma[b] / rootn;
    if (err <= radius) ++within;
    std::ostringstream e, s, r;
    e << std::setprecision(17) << err;
    s << std::setprecision(17) << res.sigma[b];
    r << std::setprecision(17) << radius;
    o.csv.push_back({std::to_string(b), e.str(), s.str(), r.str()});
  }
  double pooled_err = distance(res.pooled, *named.integral).approx();
  o.result = talagrand_json(res);
  o.result["within_3sigma"] = within;
  o.result["closed_form"] = vector_json(*named.integral);
  o.residuals["pooled"] = pooled_err;
  o.pass = within * 10 >= 9 * c.batches && pooled_err <= 1e-2;
  return o;
}

Outcome cmd_bochner(const Config &c) {
  auto named = make_fn(c);
  auto eps = parse_param("eps", c.eps);
  auto res = bochner_integrate(named.phi, eps);
  Outcome o;
  o.result = bochner_json(res);
  if (const auto *na = std::get_if<NotApproximable>(&res)) {
    o.pass = c.fn == "3f" && na->bound >= Rational(49, 100);
    o.residuals["bound"] = exact_json(na->bound);
  } else {
    const auto &cert = std::get<BochnerCertificate>(res);
    o.pass = c.fn != "3f" && cert.dom_bound <= eps;
    if (named.integral) {
      auto err = distance(cert.value, *named.integral).hi;
      o.residuals["closed_form"] = exact_json(err);
      o.pass = o.pass && err <= eps;
    }
  }
  return o;
}

Outcome cmd_stability(const Config &c) {
  auto seed = need_seed(c);
  Config cc = c;
  if (cc.fn == "3g") cc.fn = "t"; // the default integrand of the other commands is not scalar
  auto named = make_fn(cc);
  auto A = trace_family(named.phi, coordinate_family(*named.phi.space()));
  ZQuery q{Region::unit(), c.m, c.n, parse_param("alpha", c.alpha), parse_param("beta", c.beta)};
  auto z = z_measure_mc(A, q, c.samples, seed);
  Outcome o;
  o.result["query"] = zestimate_json(z);
  o.pass = z.estimate <= z.threshold + z.half_width;
  if (cc.fn == "t") {
    double analytic = std::pow(q.alpha.get_d(), c.m) * std::pow(1 - q.beta.get_d(), c.n);
    o.result["analytic"] = analytic;
    o.residuals["analytic"] = std::abs(z.estimate - analytic);
    o.pass = o.pass && std::abs(z.estimate - analytic) <= 0.01;
  }
  ScanParams sp;
  sp.regions = {Region::unit(), Region::of(Interval(Dyadic(0), Dyadic::pow2(-1))),
                Region::of(Interval(Dyadic::pow2(-2), Dyadic(3).scaled_down(2)))};
  sp.levels = {{q.alpha, q.beta}, {Rational(1, 4), Rational(3, 4)}};
  sp.mn_max = c.mn_max;
  sp.samples = std::max<std::size_t>(c.samples / 10, 1000);
  sp.seed = seed;
  auto cells = stability_scan(A, sp);
  o.result["scan"] = scan_json(cells);
  o.csv.push_back({"region", "alpha", "beta", "m", "n", "estimate", "ci", "threshold"});
  for (const auto &cell : cells)
    for (const auto &e : cell.tried) {
      std::ostringstream est, ci, th;
      est << std::setprecision(17) << e.z.estimate;
      ci << std::setprecision(17) << e.z.half_width;
      th << std::setprecision(17) << e.z.threshold;
      o.csv.push_back({std::to_string(cell.region), str(cell.alpha), str(cell.beta), std::to_string(e.m),
                       std::to_string(e.n), est.str(), ci.str(), th.str()});
    }
  return o;
}

std::vector<Region> vitali_regions(int blocks) {
  std::vector<Region> rs;
  for (int j = 0; j <= blocks; ++j) rs.push_back(Region::of(Interval(Dyadic(0), Dyadic::pow2(-j))));
  for (int j = 0; j < blocks; ++j) rs.push_back(Region::of(Interval(Dyadic::pow2(-(j + 1)), Dyadic::pow2(-j))));
  std::vector<Interval> alternating;
  for (int k = 0; 2 * k + 1 <= blocks; ++k) alternating.emplace_back(Dyadic::pow2(-(2 * k + 1)), Dyadic::pow2(-2 * k));
  rs.push_back(Region::normalize(alternating));
  return rs;
}

Outcome cmd_vitali(const Config &c) {
  VitaliOptions opt;
  opt.tau = tol_or(c, "2^-10");
  opt.seed = seed_or_zero(c);
  opt.mcshane = mcshane_options(c, opt.tau);
  Outcome o;
  if (c.fn.rfind("spike", 0) == 0) {
    opt.n_max = c.n_max > 0 ? c.n_max : 16;
    auto limit = Integrand::constant(VectorValue::zero(scalar_space()));
    auto rep = vitali_limit([](int j) { return spike(j); }, limit, {DualFunctional::coordinate(0)},
                            vitali_regions(opt.n_max), opt);
    o.result = vitali_json(rep);
    o.result["expect"] = "violation";
    o.pass = !rep.h2 || !rep.c;
    return o;
  }
  auto named = make_fn(c);
  std::vector<Region> cover;
  if (c.fn == "3g") {
    opt.n_max = c.n_max > 0 ? c.n_max : 2 * c.R;
    for (int i = 0; i < opt.n_max; ++i) cover.push_back(Region::of(Interval(Dyadic::pow2(-(i + 1)), Dyadic(1))));
    cover.push_back(Region::unit());
  } else {
    opt.n_max = c.n_max > 0 ? c.n_max : 16;
    cover.push_back(Region::unit());
  }
  auto seq = truncation_sequence(named.phi, cover);
  auto fs = coordinate_family(*named.phi.space());
  if (fs.size() > 64) fs.erase(fs.begin() + 64, fs.end());
  auto rep = vitali_limit(seq, named.phi, fs, vitali_regions(std::min(opt.n_max, 24)), opt);
  o.result = vitali_json(rep);
  o.result["expect"] = "limit";
  o.residuals = {{"h1", exact_json(rep.h1_residual)}, {"h2", exact_json(rep.h2_residual)}, {"c", exact_json(rep.c_residual)}};
  o.pass = rep.h1 && rep.h2 && rep.c;
  return o;
}

Outcome gallery_3e(const Config &c) {
  auto seed = need_seed(c);
  std::string g = c.gauge == "auto" ? "const:1/5" : c.gauge;
  auto schedule = parse_schedule(g);
  if (schedule.size() != 1) throw UsageError("gallery 3e takes a single gauge");
  auto fat = build_fat_H(c.L, c.r, seed);
  Witness3EOptions opt;
  opt.R = static_cast<std::size_t>(c.R);
  opt.seed = seed;
  Outcome o;
  o.result["fat_set"] = fatset_json(fat);
  o.result["gauge"] = g;
  try {
    auto w = oscillation_witness_3E(fat, schedule[0], opt);
    bool sub = is_partition(w.p1) && is_partition(w.p2) && is_subordinate(w.p1, schedule[0]) &&
               is_subordinate(w.p2, schedule[0]);
    o.result["witness"] = witness_json(w);
    o.result["subordinate"] = sub;
    o.residuals["gap_minus_bound"] = exact_json(w.gap - w.bound);
    o.pass = sub && w.gap >= w.bound;
  } catch (const SearchExhausted &e) {
    o.result["search_exhausted"] = {{"index", e.index()}, {"trace", e.trace()}, {"what", e.what()}};
    o.pass = false;
  }
  return o;
}

Outcome gallery_3f(const Config &c) {
  auto f = phi_3F(c.grid);
  Rational grid_err = pow2_rational(-c.grid);
  Outcome o;
  o.csv.push_back({"delta", "strategy", "seed", "cells", "error", "bound"});
  bool rate_ok = true;
  json rates = json::array();
  const std::pair<TagStrategy, const char *> strategies[] = {
      {TagStrategy::mid, "mid"}, {TagStrategy::left, "left"}, {TagStrategy::sampled, "sampled"}};
  for (int e : {4, 6, 8}) {
    Rational delta = pow2_rational(-e);
    auto gauge = Gauge::constant(delta);
    Rational worst = 0;
    for (const auto &[strategy, name] : strategies)
      for (std::uint64_t s = 0; s < 3; ++s) {
        CousinOptions co;
        co.strategy = strategy;
        co.seed = splitmix64(seed_or_zero(c) + s);
        auto p = cousin_partition(gauge, co);
        auto err = distance(riemann_sum(f.phi, p), f.integral).hi;
        if (err > worst) worst = err;
        o.csv.push_back({str(delta), name, std::to_string(s), std::to_string(p.items.size()), str(err),
                         str(2 * delta + grid_err)});
        if (strategy == TagStrategy::mid) break;
      }
    bool ok = worst <= 2 * delta + grid_err;
    rate_ok = rate_ok && ok;
    rates.push_back({{"delta", str(delta)}, {"max_error", exact_json(worst)}, {"ok", ok}});
  }
  auto b = bochner_integrate(f.phi, parse_param("eps", c.eps));
  const auto *na = std::get_if<NotApproximable>(&b);
  bool bochner_ok = na && na->bound >= Rational(49, 100);
  McShaneOptions mo;
  for (int e = 2; e <= 8; ++e) mo.schedule.push_back(Gauge::constant(pow2_rational(-e)));
  mo.tolerance = pow2_rational(-40);
  mo.floor_window = 16;
  mo.seed = seed_or_zero(c);
  auto est = mcshane_integrate(f.phi, mo);
  std::optional<Rational> at8;
  const auto finest = Gauge::constant(pow2_rational(-8)).label();
  for (const auto &t : est.gauge_trace)
    if (t.gauge == finest) at8 = t.oscillation;
  bool osc_ok = at8 && *at8 <= pow2_rational(-6);
  o.result = {{"rates", rates}, {"bochner", bochner_json(b)}, {"mcshane", estimate_json(est)},
              {"oscillation_at_2^-8", at8 ? json(exact_json(*at8)) : json(nullptr)}};
  o.residuals = {{"rate", rate_ok}, {"bochner", bochner_ok}, {"oscillation", osc_ok}};
  o.pass = rate_ok && bochner_ok && osc_ok;
  return o;
}

Outcome gallery_3g(const Config &c) {
  auto g = phi_3G(static_cast<std::size_t>(c.R));
  auto tol = tol_or(c, "2^-12");
  McShaneOptions mo = mcshane_options(c, tol);
  auto est = mcshane_integrate(g.phi, mo);
  auto err = distance(est.value, g.integral).hi;
  Outcome o;
  o.result["mcshane"] = estimate_json(est);
  o.residuals["closed_form"] = exact_json(err);
  bool closed = est.status == Status::converged && err <= est.oscillation + tol;
  // Lower integrals of the norm over N blocks.
  int N = c.N > 0 ? c.N : c.R;
  o.csv.push_back({"N", "lower_norm_integral", "half_harmonic"});
  bool monotone = true;
  Rational prev = -1, H = 0;
  json lower = json::array();
  for (int k = 1; k <= N; ++k) {
    auto gk = phi_3G(static_cast<std::size_t>(k));
    auto li = lower_norm_integral(gk.phi, std::max(c.depth, k + 1));
    H += Rational(1, k);
    if (li < prev) monotone = false;
    prev = li;
    lower.push_back(exact_json(li));
    o.csv.push_back({std::to_string(k), str(li), str(H / 2)});
  }
  o.result["lower_norm_integrals"] = lower;
  o.result["monotone"] = monotone;
  o.pass = closed && monotone;
  return o;
}

Outcome cmd_gallery(const Config &c) {
  if (c.which == "3e") return gallery_3e(c);
  if (c.which == "3f") return gallery_3f(c);
  if (c.which == "3g") return gallery_3g(c);
  throw UsageError("gallery target must be 3e, 3f or 3g");
}

Outcome dispatch(const Config &c);

Outcome cmd_report(const Config &c) {
  need_seed(c);
  struct Item {
    const char *name;
    const char *command;
    const char *which;
    const char *fn;
  };
  const Item items[] = {{"integrate_3g", "integrate", "", "3g"}, {"pettis_3g", "pettis", "", "3g"},
                        {"series_3g", "series", "", "3g"},      {"abscont_3g", "abscont", "", "3g"},
                        {"lln_t", "lln", "", "t"},              {"bochner_3f", "bochner", "", "3f"},
                        {"stability_t", "stability", "", "t"},  {"vitali_3g", "vitali", "", "3g"},
                        {"vitali_spike", "vitali", "", "spike:0"}, {"gallery_3e", "gallery", "3e", "3g"},
                        {"gallery_3f", "gallery", "3f", "3g"},  {"gallery_3g", "gallery", "3g", "3g"}};
  Outcome o;
  for (const auto &it : items) {
    Config sub = c;
    sub.command = it.command;
    sub.which = it.which;
    sub.fn = it.fn;
    if (std::string(it.which) == "3e") {
      sub.gauge = "auto";
      sub.R = 64;
    }
    auto r = dispatch(sub);
    o.result[it.name] = {{"pass", r.pass}, {"result", r.result}, {"residuals", r.residuals}};
    o.pass = o.pass && r.pass;
  }
  return o;
}

Outcome dispatch(const Config &c) {
  if (c.command == "integrate") return cmd_integrate(c);
  if (c.command == "pettis") return cmd_pettis(c);
  if (c.command == "series") return cmd_series(c);
  if (c.command == "abscont") return cmd_abscont(c);
  if (c.command == "lln") return cmd_lln(c);
  if (c.command == "bochner") return cmd_bochner(c);
  if (c.command == "stability") return cmd_stability(c);
  if (c.command == "vitali") return cmd_vitali(c);
  if (c.command == "gallery") return cmd_gallery(c);
  if (c.command == "report") return cmd_report(c);
  throw UsageError("unknown command " + c.command);
}

std::string csv_cell(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

void write_csv(const Table &t, const std::string &path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  for (const auto &row : t) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << csv_cell(row[i]);
    f << '\n';
  }
}

std::string timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

const std::set<std::string> &known_keys() {
  static const std::set<std::string> keys{"fn",    "R",     "L",         "r",      "tol",   "gauge",   "seed",
                                          "draws", "batches", "samples", "depth",  "N",     "max-level", "trials",
                                          "grid",  "eps",   "n-max",     "alpha",  "beta",  "m",       "n",
                                          "mn-max", "threads", "out",    "csv",    "deterministic"};
  return keys;
}

// Config-file values become flags placed after the command line, skipped
// when the same flag was given explicitly.
std::vector<std::string> merge_config(std::vector<std::string> args, const std::string &path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception &e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  std::set<std::string> given;
  for (const auto &a : args)
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  for (const auto &[key, value] : j.items()) {
    std::string k = key;
    std::replace(k.begin(), k.end(), '_', '-');
    if (!known_keys().count(k)) throw UsageError("unknown config key '" + key + "'");
    if (given.count(k)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + k);
      continue;
    }
    args.push_back("--" + k);
    if (value.is_string())
      args.push_back(value.get<std::string>());
    else if (value.is_number_integer() || value.is_number_unsigned())
      args.push_back(value.dump());
    else
      throw UsageError("config key '" + key + "' must be a string, integer or boolean");
  }
  return args;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  Config c;
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) c.config = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) c.config = args[i].substr(9);
    }
    if (!c.config.empty()) args = merge_config(std::move(args), c.config);
  } catch (const UsageError &e) {
    err << "gauge_lab: " << e.what() << '\n';
    return 2;
  }

  CLI::App app{"Gauge integral laboratory: experiments with exact dyadic arithmetic"};
  app.name("gauge_lab");
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  app.add_option("--fn", c.fn, "integrand: 3g, 3f, 3e, t, const:c, poly:c0,c1,.., dyadic-indicator:d, spike:j");
  app.add_option("--R", c.R, "truncation of sequence spaces / 3G blocks");
  app.add_option("--L", c.L, "fat set stages");
  app.add_option("--r", c.r, "fat set resolution");
  app.add_option("--tol", c.tol, "tolerance as p/2^k or p/q");
  app.add_option("--gauge", c.gauge, "auto, or comma list of const:<rational>");
  auto *seed_opt = app.add_option("--seed", seed, "seed (default from GIL_SEED)");
  app.add_option("--draws", c.draws, "draws per batch (lln)");
  app.add_option("--batches", c.batches, "batches (lln)");
  app.add_option("--samples", c.samples, "Monte Carlo samples (stability)");
  app.add_option("--depth", c.depth, "lower integral depth");
  app.add_option("--N", c.N, "number of blocks (series, gallery 3g)");
  app.add_option("--max-level", c.max_level, "gauge levels of the automatic schedule");
  app.add_option("--trials", c.trials, "partitions per gauge level");
  app.add_option("--grid", c.grid, "grid depth of the 3F step space");
  app.add_option("--eps", c.eps, "Bochner approximation tolerance");
  app.add_option("--n-max", c.n_max, "last sequence index (vitali)");
  app.add_option("--alpha", c.alpha, "lower level (stability)");
  app.add_option("--beta", c.beta, "upper level (stability)");
  app.add_option("--m", c.m, "points below alpha (stability)");
  app.add_option("--n", c.n, "points above beta (stability)");
  app.add_option("--mn-max", c.mn_max, "largest m and n scanned");
  app.add_option("--threads", c.threads, "worker cap; results do not depend on it");
  app.add_option("--out", c.out, "report path (stdout when absent)");
  app.add_option("--csv", c.csv, "CSV path for table-valued output");
  app.add_option("--config", c.config, "JSON config; flags override it");
  app.add_flag("--deterministic", c.deterministic, "omit the timestamp from the report");

  const char *commands[][2] = {{"integrate", "McShane integral over [0,1] with a gauge schedule"},
                               {"pettis", "Pettis consistency over functionals and regions"},
                               {"series", "interval series of the indefinite integral"},
                               {"abscont", "absolute continuity modulus table"},
                               {"lln", "empirical-mean integration in batches"},
                               {"bochner", "simple-function approximation"},
                               {"stability", "stability-set Monte Carlo and (m,n) scan"},
                               {"vitali", "convergence harness"},
                               {"report", "run the full battery"}};
  for (const auto &[name, help] : commands) app.add_subcommand(name, help);
  auto *gallery = app.add_subcommand("gallery", "gallery objects");
  gallery->add_option("target", c.which, "3e, 3f or 3g")->required()->check(CLI::IsMember({"3e", "3f", "3g"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return 2;
  }
  c.command = app.get_subcommands().front()->get_name();

  if (seed_opt->count() > 0) {
    c.seed = seed;
    c.seed_source = "flag";
  } else if (const char *env = std::getenv("GIL_SEED")) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing");
      c.seed_source = "GIL_SEED";
    } catch (const std::exception &) {
      err << "gauge_lab: GIL_SEED must be an unsigned integer\n";
      return 2;
    }
  }

  Outcome o;
  try {
    validate(c);
    o = dispatch(c);
  } catch (const UsageError &e) {
    err << "gauge_lab: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument &e) {
    err << "gauge_lab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    err << "gauge_lab: " << c.command << " failed: " << e.what() << '\n';
    o.pass = false;
    o.result = {{"error", e.what()}};
  }

  json report = {{"schema", "gauge-lab/1"},
                 {"op", c.command == "gallery" ? "gallery " + c.which : c.command},
                 {"params", params_json(c)},
                 {"seed", c.seed ? json(*c.seed) : json(nullptr)},
                 {"residuals", o.residuals},
                 {"verdict", o.pass ? "pass" : "fail"},
                 {"result", o.result}};
  if (!c.deterministic) report["timestamp"] = timestamp();

  try {
    if (c.out.empty()) {
      out << report.dump(2) << '\n';
    } else {
      std::ofstream f(c.out);
      if (!f) throw std::runtime_error("cannot write " + c.out);
      f << report.dump(2) << '\n';
      out << report["op"].get<std::string>() << ": " << (o.pass ? "pass" : "fail") << " -> " << c.out << '\n';
    }
    if (!c.csv.empty() && !o.csv.empty()) write_csv(o.csv, c.csv);
  } catch (const std::exception &e) {
    err << "gauge_lab: " << e.what() << '\n';
    return 2;
  }
  if (!o.pass) err << "gauge_lab: " << report["op"].get<std::string>() << " check failed\n";
  return o.pass ? 0 : 1;
}

} // namespace gaugelab
