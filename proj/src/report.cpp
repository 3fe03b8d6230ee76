#include "gaugelab/report.hpp"

namespace gaugelab {

json exact_json(const Rational &q) { return {{"exact", rational_str(q)}, {"approx", q.get_d()}}; }

json enclosure_json(const NormEnclosure &e) {
  if (e.exact()) return exact_json(e.lo);
  return {{"lo", rational_str(e.lo)}, {"hi", rational_str(e.hi)}, {"approx", e.approx()},
          {"error_bound", Rational(e.hi - e.lo).get_d()}};
}

json vector_json(const VectorValue &v) {
  json coords = json::array();
  for (const auto &x : v.data()) coords.push_back(rational_str(x));
  return {{"space", v.space()->describe()}, {"coords", coords}, {"approx", v.to_doubles()},
          {"norm", enclosure_json(norm(v))}};
}

json region_json(const Region &r) {
  json parts = json::array();
  for (const auto &p : r.parts()) parts.push_back({p.lo.str(), p.hi.str()});
  return parts;
}

Region region_from_json(const json &j) {
  std::vector<Interval> ivs;
  for (const auto &p : j) ivs.emplace_back(Dyadic::parse(p.at(0).get<std::string>()), Dyadic::parse(p.at(1).get<std::string>()));
  return Region::normalize(std::move(ivs));
}

json estimate_json(const IntegralEstimate &e) {
  json trace = json::array();
  for (const auto &t : e.gauge_trace)
    trace.push_back({{"level", t.level}, {"gauge", t.gauge}, {"cells", t.cells}, {"oscillation", exact_json(t.oscillation)}});
  return {{"value", vector_json(e.value)},
          {"oscillation", exact_json(e.oscillation)},
          {"status", to_string(e.status)},
          {"gauge_trace", trace},
          {"contract", "stability over the gauge schedule tried; not a proof of McShane integrability"}};
}

json pettis_json(const PettisReport &r) {
  return {{"checks", r.rows.size()}, {"failures", r.failures}, {"max_residual", exact_json(r.max_residual)}, {"pass", r.pass}};
}

json series_json(const SeriesReport &r) {
  json tails = json::array();
  for (const auto &t : r.tails) tails.push_back(enclosure_json(t));
  return {{"tails", tails}, {"cauchy", exact_json(r.cauchy)}, {"pass", r.pass}};
}

json modulus_json(const std::vector<ModulusRow> &rows) {
  json out = json::array();
  for (const auto &r : rows) out.push_back({{"eta", rational_str(r.eta)}, {"modulus", exact_json(r.modulus)}, {"regions", r.regions}});
  return out;
}

json talagrand_json(const TalagrandResult &r) {
  return {{"batches", r.means.size()}, {"pooled", vector_json(r.pooled)}, {"spread", exact_json(r.spread)}, {"sigma", r.sigma}};
}

json bochner_json(const BochnerResult &r) {
  if (const auto *na = std::get_if<NotApproximable>(&r))
    return {{"verdict", "NotApproximable"}, {"bound", exact_json(na->bound)}, {"reason", na->reason}};
  const auto &c = std::get<BochnerCertificate>(r);
  return {{"verdict", "certificate"}, {"pieces", c.parts.size()}, {"dom_bound", exact_json(c.dom_bound)},
          {"epsilon", exact_json(c.epsilon)}, {"value", vector_json(c.value)}};
}

json vitali_json(const VitaliReport &r) {
  return {{"H1", r.h1}, {"H2", r.h2}, {"C", r.c}, {"C_claimed", r.c_claimed},
          {"h1_residual", exact_json(r.h1_residual)}, {"h2_residual", exact_json(r.h2_residual)},
          {"c_residual", exact_json(r.c_residual)}, {"violations", r.violations}};
}

json zestimate_json(const ZEstimate &z) {
  return {{"estimate", z.estimate}, {"ci", z.half_width}, {"threshold", z.threshold}, {"hits", z.hits}, {"samples", z.samples}};
}

json scan_json(const std::vector<ScanCell> &cells) {
  json out = json::array();
  for (const auto &c : cells) {
    json tried = json::array();
    for (const auto &e : c.tried) tried.push_back({{"m", e.m}, {"n", e.n}, {"z", zestimate_json(e.z)}});
    json cell = {{"region", c.region}, {"alpha", rational_str(c.alpha)}, {"beta", rational_str(c.beta)},
                 {"outcome", to_string(c.outcome)}, {"tried", tried}};
    if (c.outcome == ScanOutcome::witness) cell["witness"] = {c.m, c.n};
    out.push_back(std::move(cell));
  }
  return out;
}

json fatset_json(const FatSet &fat) {
  json stages = json::array();
  for (const auto &s : fat.stages) stages.push_back({{"parts", s.parts().size()}, {"measure", exact_json(s.measure().to_rational())}});
  return {{"resolution", fat.resolution}, {"stages", stages}, {"top", region_json(fat.top())}};
}

json witness_json(const Witness3E &w) {
  json T = json::array(), U = json::array(), fam = json::array();
  for (const auto &t : w.T) T.push_back(t.str());
  for (const auto &u : w.U) U.push_back(u.str());
  for (const auto &f : w.family) fam.push_back({{"id", f.id}, {"support", region_json(f.support)}});
  return {{"k", w.k}, {"m", w.m}, {"stage", w.stage}, {"d_measure", exact_json(w.d_measure)},
          {"T", T}, {"U", U}, {"P1", to_json(w.p1)}, {"P2", to_json(w.p2)},
          {"family", fam}, {"gap", exact_json(w.gap)}, {"bound", exact_json(w.bound)}};
}

} // namespace gaugelab
