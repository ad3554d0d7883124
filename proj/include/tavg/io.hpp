#pragma once

#include <iosfwd>
#include <json.hpp>
#include <span>
#include <string>

#include "tavg/autos.hpp"
#include "tavg/averaging.hpp"
#include "tavg/dynamics.hpp"
#include "tavg/poly.hpp"

namespace tavg {

using json = nlohmann::json;

inline constexpr int certificate_version = 1;

// Parse errors throw invalid_input.
json to_json(cplx z);
cplx complex_from_json(const json& j);

// [[re, im], ...] ascending in degree.
json poly_to_json(const ComplexPoly& f);
ComplexPoly poly_from_json(const json& j);

// {dim, components: [[{exps: [..], re, im}, ...], ...]}
json map_to_json(const MultiPolyMap& F);
MultiPolyMap map_from_json(const json& j);

json weights_to_json(const WeightSequence& w);
WeightSequence weights_from_json(const json& j);

json certificate_to_json(const Certificate& c);
Certificate certificate_from_json(const json& j);

json chart_sidecar(const ComponentChart& chart);
// Binary PGM: bounded pixels black, escaping pixels shaded by escape time.
void write_chart_pgm(std::ostream& os, const ComponentChart& chart);

// Crossings of G = level along grid edges, linearly interpolated; columns x,y,G.
void write_level_curves_csv(std::ostream& os, const ComplexPoly& f, const Box& box, int resolution,
                            std::span<const double> levels);

// Columns group,index,sup_norm,centered_norm,median_re,median_im.
void write_norm_trace_csv(std::ostream& os, const NormTrace& t);

}  // namespace tavg
