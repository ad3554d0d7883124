#include "tavg/io.hpp"

#include <algorithm>
#include <ostream>

#include "tavg/errors.hpp"

namespace tavg {

namespace {

template <class F>
auto parsing(const char* what, F&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw invalid_input(std::string(what) + ": " + e.what());
  }
}

json opt_complex(const std::optional<cplx>& z) { return z ? to_json(*z) : json(nullptr); }

json complex_list(const std::vector<cplx>& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back(to_json(z));
  return a;
}

std::vector<cplx> complex_list_from(const json& j) {
  std::vector<cplx> v;
  for (const auto& x : j) v.push_back(complex_from_json(x));
  return v;
}

json trace_to_json(const NormTrace& t) {
  json a = json::array();
  for (const auto& e : t.entries)
    a.push_back({{"index", e.index}, {"sup_norm", e.sup_norm}, {"centered_norm", e.centered_norm}, {"median", to_json(e.median)}});
  return a;
}

json grid_to_json(const SampleGrid& g) {
  return {{"center", to_json(g.center)}, {"radius", g.radius}, {"rings", g.rings}, {"per_ring", g.per_ring}};
}

SampleGrid grid_from_json(const json& j) {
  SampleGrid g;
  g.center = complex_from_json(j.at("center"));
  g.radius = j.at("radius").get<double>();
  g.rings = j.at("rings").get<int>();
  g.per_ring = j.at("per_ring").get<int>();
  return g;
}

}  // namespace

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  return parsing("complex number", [&] {
    if (!j.is_array() || j.size() != 2) throw invalid_input("complex number must be [re, im]");
    return cplx{j.at(0).get<double>(), j.at(1).get<double>()};
  });
}

json poly_to_json(const ComplexPoly& f) { return complex_list(f.coeffs()); }

ComplexPoly poly_from_json(const json& j) {
  return parsing("polynomial literal", [&] {
    const json& a = j.is_object() ? j.at("polynomial") : j;
    if (!a.is_array() || a.empty()) throw invalid_input("polynomial literal must be a non-empty array of [re, im]");
    return ComplexPoly(complex_list_from(a));
  });
}

json map_to_json(const MultiPolyMap& F) {
  json comps = json::array();
  for (const auto& c : F.components) {
    json terms = json::array();
    for (const auto& [m, v] : c.terms) terms.push_back({{"exps", m}, {"re", v.real()}, {"im", v.imag()}});
    comps.push_back(terms);
  }
  return {{"dim", F.dim}, {"components", comps}};
}

MultiPolyMap map_from_json(const json& j) {
  return parsing("map literal", [&] {
    const json& o = j.contains("map") ? j.at("map") : j;
    const int dim = o.at("dim").get<int>();
    std::vector<MultiPoly> comps;
    for (const auto& c : o.at("components")) {
      MultiPoly p(dim);
      for (const auto& t : c) {
        const auto m = t.at("exps").get<Monomial>();
        p.terms[m] += cplx{t.value("re", 0.0), t.value("im", 0.0)};
      }
      comps.push_back(p);
    }
    return MultiPolyMap(dim, comps);
  });
}

json weights_to_json(const WeightSequence& w) {
  json e = json::array();
  for (const auto& x : w.entries) e.push_back({x.index, x.weight.real(), x.weight.imag()});
  return {{"entries", e}, {"group_end", w.group_end}, {"region", grid_to_json(w.region)}};
}

WeightSequence weights_from_json(const json& j) {
  return parsing("weight sequence", [&] {
    WeightSequence w;
    for (const auto& x : j.at("entries")) w.entries.push_back({x.at(0).get<long long>(), cplx{x.at(1).get<double>(), x.at(2).get<double>()}});
    w.group_end = j.at("group_end").get<std::vector<std::size_t>>();
    w.region = grid_from_json(j.at("region"));
    if (w.entries.empty()) throw invalid_input("weight sequence is empty");
    if (!w.group_end.empty() && w.group_end.back() != w.entries.size()) throw invalid_input("group boundaries do not cover the entries");
    return w;
  });
}

json certificate_to_json(const Certificate& c) {
  json chain = json::array();
  for (const auto& s : c.chain) chain.push_back({{"word", s.word}, {"set", s.set}});
  json wit = {
      {"base", opt_complex(c.base)},
      {"fiber", complex_list(c.fiber)},
      {"generators", c.generators},
      {"S0", c.S0},
      {"chain", chain},
      {"block", c.block},
      {"block_fallback", c.block_fallback},
      {"norm_trace", trace_to_json(c.norm_trace)},
      {"norm_grid", grid_to_json(c.norm_trace.grid)},
      {"weights", c.weights ? weights_to_json(*c.weights) : json(nullptr)},
      {"green", c.green},
      {"vandermonde", {{"rank", c.vandermonde_rank}, {"columns", c.vandermonde_columns}}},
      {"component_class", c.component_class},
      {"enlargement_assumed", c.enlargement_assumed},
  };
  return {{"version", certificate_version},
          {"polynomial", poly_to_json(c.f)},
          {"point", to_json(c.point)},
          {"N", c.N},
          {"verdict", to_string(c.verdict)},
          {"rule", to_string(c.rule)},
          {"reason", c.reason},
          {"forced_zero_prefix", c.forced_zero_prefix},
          {"witnesses", wit},
          {"tolerances", c.tolerances},
          {"budgets", c.budgets},
          {"seed", c.seed}};
}

Certificate certificate_from_json(const json& j) {
  return parsing("certificate", [&] {
    if (j.at("version").get<int>() != certificate_version) throw invalid_input("unsupported certificate version");
    Certificate c;
    c.f = poly_from_json(j.at("polynomial"));
    c.point = complex_from_json(j.at("point"));
    c.N = j.at("N").get<int>();
    c.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    c.rule = rule_from_string(j.at("rule").get<std::string>());
    c.reason = j.value("reason", "");
    c.forced_zero_prefix = j.value("forced_zero_prefix", 0);
    const auto& w = j.at("witnesses");
    if (!w.at("base").is_null()) c.base = complex_from_json(w.at("base"));
    c.fiber = complex_list_from(w.at("fiber"));
    c.generators = w.at("generators").get<std::vector<std::vector<int>>>();
    c.S0 = w.at("S0").get<std::vector<int>>();
    for (const auto& s : w.at("chain")) c.chain.push_back({s.at("word").get<std::vector<int>>(), s.at("set").get<std::vector<int>>()});
    c.block = w.at("block").get<std::vector<int>>();
    c.block_fallback = w.value("block_fallback", false);
    for (const auto& e : w.at("norm_trace"))
      c.norm_trace.entries.push_back({e.at("index").get<long long>(), e.at("sup_norm").get<double>(),
                                      e.at("centered_norm").get<double>(), complex_from_json(e.at("median"))});
    c.norm_trace.grid = grid_from_json(w.at("norm_grid"));
    if (!w.at("weights").is_null()) c.weights = weights_from_json(w.at("weights"));
    c.green = w.value("green", 0.0);
    c.vandermonde_rank = w.at("vandermonde").at("rank").get<int>();
    c.vandermonde_columns = w.at("vandermonde").at("columns").get<int>();
    c.component_class = w.value("component_class", "");
    c.enlargement_assumed = w.value("enlargement_assumed", false);
    c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    c.budgets = j.at("budgets").get<std::map<std::string, double>>();
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
  });
}

json chart_sidecar(const ComponentChart& chart) {
  json comps = json::array();
  for (const auto& c : chart.components)
    comps.push_back({{"id", c.id}, {"sample", to_json(c.sample)}, {"limit_cycle", c.limit_cycle},
                     {"pixel_count", c.pixel_count}, {"signature", c.signature}});
  json cycles = json::array();
  for (const auto& cy : chart.cycles)
    cycles.push_back({{"period", cy.period}, {"points", complex_list(cy.points)}, {"multiplier", to_json(cy.multiplier)},
                      {"class", to_string(cy.cls)}});
  return {{"box", {{"lo", to_json(chart.box.lo)}, {"hi", to_json(chart.box.hi)}}},
          {"width", chart.width},
          {"height", chart.height},
          {"max_iter", chart.max_iter},
          {"pixel_size", chart.pixel_size()},
          {"row_order", "top row has the largest imaginary part"},
          {"components", comps},
          {"cycles", cycles}};
}

void write_chart_pgm(std::ostream& os, const ComponentChart& chart) {
  os << "P5\n" << chart.width << ' ' << chart.height << "\n255\n";
  for (int iy = chart.height - 1; iy >= 0; --iy)
    for (int ix = 0; ix < chart.width; ++ix) {
      const int t = chart.escape_time[chart.index(ix, iy)];
      const unsigned char v = t < 0 ? 0 : static_cast<unsigned char>(255 - std::min(t, 191));
      os.put(static_cast<char>(v));
    }
}

void write_level_curves_csv(std::ostream& os, const ComplexPoly& f, const Box& box, int resolution,
                            std::span<const double> levels) {
  if (resolution < 2) throw invalid_input("write_level_curves_csv: resolution must be at least 2");
  const double w = box.hi.real() - box.lo.real(), h = box.hi.imag() - box.lo.imag();
  std::vector<cplx> pts;
  for (int iy = 0; iy < resolution; ++iy)
    for (int ix = 0; ix < resolution; ++ix)
      pts.emplace_back(box.lo.real() + w * ix / (resolution - 1), box.lo.imag() + h * iy / (resolution - 1));
  std::vector<GreensEstimate> g(pts.size());
  green_values(f, pts, g);
  auto at = [&](int ix, int iy) { return static_cast<std::size_t>(iy) * static_cast<std::size_t>(resolution) + static_cast<std::size_t>(ix); };
  os << "x,y,G\n";
  os.precision(12);
  for (double level : levels)
    for (int iy = 0; iy < resolution; ++iy)
      for (int ix = 0; ix < resolution; ++ix)
        for (auto [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
          if (ix + dx >= resolution || iy + dy >= resolution) continue;
          const auto a = at(ix, iy), b = at(ix + dx, iy + dy);
          const double ga = g[a].value - level, gb = g[b].value - level;
          if ((ga < 0.0) == (gb < 0.0)) continue;
          const double s = ga / (ga - gb);
          const cplx p = pts[a] + s * (pts[b] - pts[a]);
          os << p.real() << ',' << p.imag() << ',' << level << '\n';
        }
}

void write_norm_trace_csv(std::ostream& os, const NormTrace& t) {
  os << "group,index,sup_norm,centered_norm,median_re,median_im\n";
  os.precision(17);
  for (std::size_t k = 0; k < t.entries.size(); ++k) {
    const auto& e = t.entries[k];
    os << k << ',' << e.index << ',' << e.sup_norm << ',' << e.centered_norm << ',' << e.median.real() << ','
       << e.median.imag() << '\n';
  }
}

}  // namespace tavg
