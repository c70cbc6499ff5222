#pragma once

#include <string>

#include <json.hpp>

#include "dimlab/map_model.hpp"
#include "dimlab/measures.hpp"
#include "dimlab/moran.hpp"
#include "dimlab/pressure.hpp"

namespace dimlab {

using json = nlohmann::json;

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

// {"family": "manneville", "beta": 1} or {"branches": [...]} with branch
// kinds linear {slope, offset}, manneville {beta, shift} and polynomial
// {lo, hi, coefficients}.
IntervalMap map_from_json(const json& j);
IntervalMap load_map(const std::string& path);
json map_to_json(const IntervalMap& map);
json map_report(const IntervalMap& map);

// {"type": "bernoulli", "p": [...]}, {"type": "markov", "order": r,
// "transition": [[...], ...]}, {"type": "dirac", "branch": b} or
// {"type": "block", "n": n, "words": [...], "weights": [...]}.
MeasureSpec measure_from_json(const json& j);
MeasureSpec load_measure(const std::string& path);
json measure_to_json(const MeasureSpec& mu);

// {"k": 2, "alpha": [...] | "measure": {...}, "delta": 0.1, "eps": 0.05}
// Moments of a measure need the map.
GoodCylinderFilter filter_from_json(const json& j, const IntervalMap& map);
json filter_to_json(const GoodCylinderFilter& f);

json scheme_to_json(const MoranScheme& s);
MoranScheme explicit_scheme_from_json(const json& j);
json product_scheme_to_json(const ProductScheme& s);
ProductScheme product_scheme_from_json(const json& j);

}  // namespace dimlab
