#pragma once

#include "gaugelab/gallery.hpp"
#include "gaugelab/integrators.hpp"
#include "gaugelab/stability.hpp"

#include <json.hpp>

namespace gaugelab {

using nlohmann::json;

/// Exact value as "p/2^k" (or "p/q") with a decimal approximation alongside.
json exact_json(const Rational &q);
json enclosure_json(const NormEnclosure &e);
json vector_json(const VectorValue &v);
json region_json(const Region &r);
Region region_from_json(const json &j);

json estimate_json(const IntegralEstimate &e);
json pettis_json(const PettisReport &r);
json series_json(const SeriesReport &r);
json modulus_json(const std::vector<ModulusRow> &rows);
json talagrand_json(const TalagrandResult &r);
json bochner_json(const BochnerResult &r);
json vitali_json(const VitaliReport &r);
json zestimate_json(const ZEstimate &z);
json scan_json(const std::vector<ScanCell> &cells);
json fatset_json(const FatSet &fat);
json witness_json(const Witness3E &w);

} // namespace gaugelab
