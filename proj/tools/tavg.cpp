#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "tavg/averaging.hpp"
#include "tavg/autos.hpp"
#include "tavg/errors.hpp"
#include "tavg/io.hpp"
#include "tavg/monodromy.hpp"
#include "tavg/permgroup.hpp"

using namespace tavg;

namespace {

constexpr int exit_invalid = 2;
constexpr int exit_numerical = 3;
constexpr int exit_budget = 4;
constexpr int exit_inconclusive = 5;

struct Settings {
  std::string poly;
  std::string map;
  std::string inverse;
  bool include_identity = false;
  std::string point = "0,0";
  int level = 2;
  std::uint64_t seed = 1;
  double radius = 0.0;
  int groups = 5;
  int resolution = 400;
  std::string levels = "0.25,0.5,1";
  int depth = 6;
  std::string out;
  std::string weights_out;
  std::string trace_csv;
  std::string curves_csv;
  std::string loops_csv;
  std::string certificate;
  int budget_chart_iter = 1000;
  long long budget_horizon = 100000;
  std::size_t budget_closure = 100000;
  int budget_trials = 20;
  int budget_degree = 8;
  std::size_t budget_terms = 20000;
  int budget_green_iter = 10000;
  double tol_green = 1e-12;
  double tol_rank = 1e-9;
  double tol_relation = 1e-9;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw invalid_input(what + ": " + e.what());
  }
}

// Literal, file path, or a seeded random polynomial.
ComplexPoly load_poly(const Settings& s) {
  const std::string& v = s.poly;
  if (v.empty()) throw invalid_input("--poly is required");
  const std::map<std::string, int> random_degrees{{"random-quadratic", 2}, {"random-cubic", 3}, {"random-quartic", 4}};
  if (auto it = random_degrees.find(v); it != random_degrees.end()) {
    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> g;
    std::vector<cplx> c;
    for (int i = 0; i < it->second; ++i) c.emplace_back(g(rng), g(rng));
    c.emplace_back(1.0);
    return ComplexPoly(c);
  }
  if (v.front() == '[' || v.front() == '{') return poly_from_json(parse_json_text(v, "polynomial literal"));
  return poly_from_json(parse_json_text(read_file(v), v));
}

MultiPolyMap named_map(const std::string& name, bool inverse) {
  const auto x = MultiPoly::variable(2, 0), y = MultiPoly::variable(2, 1);
  if (name == "henon") return inverse ? henon_inverse(ComplexPoly({0.0, 0.0, 1.0})) : henon_map(ComplexPoly({0.0, 0.0, 1.0}));
  if (name == "elementary" && !inverse) {
    MultiPoly c(2);
    c.terms[{3, 0}] = 1.0;
    return {2, {x, y + c}};
  }
  if (name == "nagata" && !inverse) {
    const auto a = MultiPoly::variable(3, 0), b = MultiPoly::variable(3, 1), z = MultiPoly::variable(3, 2);
    const auto D = multiply(a, a) - multiply(b, z);
    return {3, {a + multiply(D, z), b + 2.0 * multiply(D, a) + multiply(multiply(D, D), z), z}};
  }
  throw invalid_input("unknown map name: " + name);
}

MultiPolyMap load_map(const std::string& v, bool inverse) {
  if (v.empty()) throw invalid_input("--map is required");
  if (v == "henon" || v == "elementary" || v == "nagata") return named_map(v, inverse);
  if (v.front() == '{') return map_from_json(parse_json_text(v, "map literal"));
  return map_from_json(parse_json_text(read_file(v), v));
}

cplx parse_point(const std::string& s) {
  std::istringstream is(s);
  double re = 0.0, im = 0.0;
  char comma = 0;
  if (!(is >> re)) throw invalid_input("--point must be re,im");
  if (is >> comma) {
    if (comma != ',' || !(is >> im)) throw invalid_input("--point must be re,im");
  }
  if (!is.eof() && is.peek() != EOF) throw invalid_input("--point must be re,im");
  if (!std::isfinite(re) || !std::isfinite(im)) throw invalid_input("--point must be finite");
  return {re, im};
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw invalid_input("bad number list: " + s);
    }
  }
  return v;
}

void check_budgets(const Settings& s) {
  if (s.level < 1 || s.resolution < 2 || s.groups < 1 || s.depth < 1 || s.budget_chart_iter < 1 || s.budget_horizon < 1 ||
      s.budget_closure < 1 || s.budget_trials < 1 || s.budget_degree < 2 || s.budget_terms < 1 || s.budget_green_iter < 1)
    throw invalid_input("levels, resolutions and budgets must be positive");
  if (!(s.tol_green > 0.0) || !(s.tol_rank > 0.0) || !(s.tol_relation > 0.0)) throw invalid_input("tolerances must be positive");
}

CertifyOptions certify_options(const Settings& s) {
  CertifyOptions o;
  o.chart_resolution = s.resolution;
  o.chart_max_iter = s.budget_chart_iter;
  o.siegel_groups = s.groups;
  o.siegel.horizon = s.budget_horizon;
  o.closure_cap = s.budget_closure;
  o.seed = s.seed;
  o.green_tol = s.tol_green;
  o.green_max_iter = s.budget_green_iter;
  return o;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("cannot write " + path);
  out << text;
}

struct Output {
  json config;
  std::string out;

  void emit(json doc) const {
    doc["tool_version"] = TAVG_VERSION;
    doc["config"] = config;
    doc["config_hash"] = hex(fnv1a(config.dump()));
    doc["seed"] = config.at("options").contains("seed") ? json(std::stoull(config.at("options").at("seed").get<std::string>())) : json(nullptr);
    const auto text = doc.dump(2) + "\n";
    if (out.empty())
      std::cout << text;
    else
      write_text(out, text);
  }
};

int cmd_img(const Settings& s, const Output& o) {
  const auto f = load_poly(s);
  const int N = s.level;
  std::optional<ImgGenerators> gens;
  cplx base = parse_point(s.point);
  std::string note;
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int t = 0; t < s.budget_trials && !gens; ++t) {
    try {
      gens = img_generators(f, N, base);
    } catch (const numerical_failure& e) {
      note += std::string(e.what()) + "; ";
      base = {u(rng), u(rng)};
    }
  }
  if (!gens) throw numerical_failure("img: no base point with a simple fiber and clean lifts; " + note);
  const int d = f.degree();
  const int n = static_cast<int>(gens->tree.level(N).points.size());
  std::vector<Perm> perms;
  json gj = json::array();
  for (std::size_t i = 0; i < gens->perms.size(); ++i) {
    const auto& L = gens->loops[i];
    perms.push_back(gens->perms[i].perm);
    gj.push_back({{"kind", to_string(L.kind)},
                  {"around", L.kind == LoopPath::Kind::lollipop ? to_json(L.around) : json(nullptr)},
                  {"radius", L.radius},
                  {"stem_angle", L.stem_angle},
                  {"clearance", L.clearance},
                  {"permutation", gens->perms[i].perm},
                  {"cycle_type", gens->perms[i].cycle_type()}});
    if (!s.loops_csv.empty()) {
      std::ostringstream os;
      write_loop_csv(os, L);
      write_text(s.loops_csv + "_" + std::to_string(i) + ".csv", os.str());
    }
  }
  const PermGroup G(n, perms);
  const auto crit = critical_data(f, N);
  json doc = {{"command", "img"},
              {"polynomial", poly_to_json(f)},
              {"level", N},
              {"base", to_json(base)},
              {"fiber", json::array()},
              {"critical_values", json::array()},
              {"generators", gj},
              {"transitive", G.is_transitive()},
              {"order", G.order().str()},
              {"tree_aut_order", tree_aut_order(d, N).str()},
              {"full_tree_aut", is_full_tree_aut(G, d, N)},
              {"note", note}};
  for (const auto& w : gens->tree.level(N).points) doc["fiber"].push_back(to_json(w));
  for (const auto& v : crit.critical_values) doc["critical_values"].push_back(to_json(v));
  o.emit(doc);
  return 0;
}

int cmd_certify(const Settings& s, const Output& o) {
  const auto f = load_poly(s);
  const auto c = certify(f, parse_point(s.point), s.level, certify_options(s));
  json doc = certificate_to_json(c);
  doc["command"] = "certify";
  o.emit(doc);
  if (c.weights && !s.weights_out.empty()) write_text(s.weights_out, weights_to_json(*c.weights).dump(2) + "\n");
  return c.verdict == Verdict::inconclusive ? exit_inconclusive : 0;
}

int cmd_refute_global(const Settings& s, const Output& o) {
  const auto f = load_poly(s);
  RefuteOptions r;
  r.trials = s.budget_trials;
  r.seed = s.seed;
  r.rank_tol = s.tol_rank;
  const auto c = refute_global(f, s.level, r);
  json doc = certificate_to_json(c);
  doc["command"] = "refute-global";
  o.emit(doc);
  return c.verdict == Verdict::inconclusive ? exit_inconclusive : 0;
}

int cmd_siegel(const Settings& s, const Output& o) {
  const auto f = load_poly(s);
  if (!(s.radius > 0.0)) throw invalid_input("--radius must be positive");
  SiegelOptions so;
  so.horizon = s.budget_horizon;
  so.chart_resolution = s.resolution;
  so.chart_max_iter = s.budget_chart_iter;
  const auto r = build_siegel_weights(f, parse_point(s.point), s.radius, s.groups, {}, so);
  json trace = json::array();
  for (const auto& e : r.trace.entries)
    trace.push_back({{"index", e.index}, {"sup_norm", e.sup_norm}, {"centered_norm", e.centered_norm}, {"median", to_json(e.median)}});
  json returns = json::array();
  for (const auto& x : r.returns) returns.push_back({x.target, x.selected});
  json doc = {{"command", "siegel-weights"},
              {"polynomial", poly_to_json(f)},
              {"preperiod", r.preperiod},
              {"weights", weights_to_json(r.weights)},
              {"norm_trace", trace},
              {"targets", r.targets},
              {"tolerances", r.tolerances},
              {"returns", returns},
              {"limit", {{"normalized", to_json(cplx{})}, {"empirical", to_json(r.trace.entries.back().median)}}}};
  o.emit(doc);
  if (!s.trace_csv.empty()) {
    std::ostringstream os;
    write_norm_trace_csv(os, r.trace);
    write_text(s.trace_csv, os.str());
  }
  if (!s.weights_out.empty()) write_text(s.weights_out, weights_to_json(r.weights).dump(2) + "\n");
  return 0;
}

int cmd_green(const Settings& s, const Output& o) {
  const auto f = load_poly(s);
  const cplx z = parse_point(s.point);
  const auto g = green_value(f, z, s.tol_green, s.budget_green_iter);
  json doc = {{"command", "green"},
              {"polynomial", poly_to_json(f)},
              {"point", to_json(z)},
              {"green", g.value},
              {"iterations_used", g.iterations_used},
              {"error_bound", g.error_bound},
              {"escape_radius", f.degree() >= 2 ? escape_radius(f) : 0.0}};
  if (f.degree() >= 2) {
    ChartOptions co;
    co.max_iter = s.budget_chart_iter;
    const auto chart = component_chart(f, default_box(f), s.resolution, co);
    const auto pc = classify_point(f, z, chart);
    doc["class"] = to_string(pc.kind);
    doc["component"] = pc.component;
  }
  if (!s.curves_csv.empty()) {
    const auto levels = parse_list(s.levels);
    std::ostringstream os;
    write_level_curves_csv(os, f, default_box(f), s.resolution, levels);
    write_text(s.curves_csv, os.str());
  }
  o.emit(doc);
  return 0;
}

int cmd_chart(const Settings& s, const Output& o) {
  const auto f = load_poly(s);
  if (s.out.empty()) throw invalid_input("chart needs --out as the output prefix");
  ChartOptions co;
  co.max_iter = s.budget_chart_iter;
  const auto chart = component_chart(f, default_box(f), s.resolution, co);
  std::ostringstream pgm;
  write_chart_pgm(pgm, chart);
  write_text(s.out + ".pgm", pgm.str());
  json doc = chart_sidecar(chart);
  doc["command"] = "chart";
  doc["polynomial"] = poly_to_json(f);
  doc["image"] = s.out + ".pgm";
  Output side = o;
  side.out = s.out + ".json";
  side.emit(doc);
  return 0;
}

int cmd_classify_auto(const Settings& s, const Output& o) {
  const auto F = load_map(s.map, false);
  std::optional<MultiPolyMap> inv;
  if (!s.inverse.empty())
    inv = load_map(s.inverse, true);
  else if (s.map == "henon")
    inv = named_map("henon", true);
  FinitenessOptions fo;
  fo.verify_tol = s.tol_relation;
  fo.cap = s.budget_terms * 10;
  fo.include_identity = s.include_identity;
  const auto rep = locally_finite_relation(F, s.depth, fo);
  json rel = json::array();
  for (const auto& a : rep.relation) rel.push_back(to_json(a));
  json doc = {{"command", "classify-auto"},
              {"map", map_to_json(F)},
              {"finiteness",
               {{"verdict", to_string(rep.verdict)},
                {"degrees", rep.degrees},
                {"relation", rel},
                {"includes_identity", rep.includes_identity},
                {"residual", rep.residual},
                {"rate", rep.rate},
                {"note", rep.note}}}};
  if (F.dim == 2) {
    ClassifyOptions co;
    co.n_max = s.budget_degree;
    co.cap = s.budget_terms;
    co.witness.seed = s.seed;
    const auto c = classify_c2(F, inv, co);
    json cj = {{"class", to_string(c.cls)},
               {"degrees", c.growth.degrees},
               {"truncated", c.growth.truncated},
               {"rate", c.rate},
               {"global_time_average", c.global_average ? json(*c.global_average) : json(nullptr)},
               {"conclusion", c.global_average ? (*c.global_average ? "global time average exists" : "no global time average")
                                               : "undetermined"},
               {"note", c.note}};
    if (c.witnesses) {
      const auto& w = *c.witnesses;
      cj["witnesses"] = {{"forward", {{"start", {to_json(w.forward.start[0]), to_json(w.forward.start[1])}}, {"norms", w.forward.norms}, {"rate", w.forward.rate}}},
                         {"backward", {{"start", {to_json(w.backward.start[0]), to_json(w.backward.start[1])}}, {"norms", w.backward.norms}, {"rate", w.backward.rate}}},
                         {"bounded_forward_norms", w.bounded}};
    }
    doc["c2"] = cj;
  }
  o.emit(doc);
  return 0;
}

int cmd_replay(const Settings& s, const Output& o) {
  if (s.certificate.empty()) throw invalid_input("--certificate is required");
  const auto c = certificate_from_json(parse_json_text(read_file(s.certificate), s.certificate));
  const bool ok = replay(c, certify_options(s));
  o.emit({{"command", "replay"}, {"certificate", s.certificate}, {"verdict", to_string(c.verdict)}, {"rule", to_string(c.rule)}, {"replayed", ok}});
  return ok ? 0 : exit_numerical;
}

// Each config entry becomes --name=value in front of the command.
std::vector<std::string> args_from_config(const json& cfg) {
  std::vector<std::string> a{"tavg", cfg.at("command").get<std::string>()};
  for (const auto& [k, v] : cfg.at("options").items()) {
    const auto value = v.get<std::string>();
    if (!value.empty()) a.push_back("--" + k + "=" + value);
  }
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() == 3 && args[1] == "--config") {
    try {
      args = args_from_config(parse_json_text(read_file(args[2]), args[2]));
    } catch (const std::exception& e) {
      std::cerr << "tavg: " << e.what() << "\n";
      return exit_invalid;
    }
  }

  CLI::App app{"Certificates for weighted time averages of polynomial maps"};
  app.set_version_flag("--version", std::string("tavg ") + TAVG_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Settings s;

  auto common = [&](CLI::App* c) {
    c->add_option("--seed", s.seed, "RNG seed");
    c->add_option("--out", s.out, "output path (stdout when empty)");
  };
  auto poly_opts = [&](CLI::App* c) {
    c->add_option("--poly", s.poly, "polynomial literal [[re,im],...], JSON file, or random-quadratic/cubic/quartic");
  };
  auto chart_opts = [&](CLI::App* c) {
    c->add_option("--resolution", s.resolution, "chart resolution in pixels");
    c->add_option("--budget-chart-iter", s.budget_chart_iter, "escape-time iterations per pixel");
  };

  std::map<std::string, std::function<int(const Settings&, const Output&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& help, auto handler) {
    auto* c = app.add_subcommand(name, help);
    common(c);
    handlers[name] = handler;
    return c;
  };

  auto* img = sub("img", "iterated monodromy generators and group facts", cmd_img);
  poly_opts(img);
  img->add_option("--level", s.level, "tree level N");
  img->add_option("--point", s.point, "base point re,im");
  img->add_option("--budget-trials", s.budget_trials, "base point attempts");
  img->add_option("--loops-csv", s.loops_csv, "prefix for loop polylines");

  auto* cert = sub("certify", "certificate for a point", cmd_certify);
  poly_opts(cert);
  chart_opts(cert);
  cert->add_option("--point", s.point, "point re,im");
  cert->add_option("--level", s.level, "prefix length N");
  cert->add_option("--groups", s.groups, "Siegel groups");
  cert->add_option("--budget-horizon", s.budget_horizon, "near-return scan horizon");
  cert->add_option("--budget-closure", s.budget_closure, "chain closure state cap");
  cert->add_option("--budget-green-iter", s.budget_green_iter, "Green's function iterations");
  cert->add_option("--tol-green", s.tol_green, "Green's function tolerance");
  cert->add_option("--weights-out", s.weights_out, "weights file for TimeAverageExists");

  auto* ref = sub("refute-global", "global refutation by fiber rank", cmd_refute_global);
  poly_opts(ref);
  ref->add_option("--level", s.level, "prefix length N");
  ref->add_option("--budget-trials", s.budget_trials, "base point attempts");
  ref->add_option("--tol-rank", s.tol_rank, "relative singular value cutoff");

  auto* sw = sub("siegel-weights", "weight sequence on a rotation domain", cmd_siegel);
  poly_opts(sw);
  chart_opts(sw);
  sw->add_option("--point", s.point, "disk center re,im");
  sw->add_option("--radius", s.radius, "disk radius");
  sw->add_option("--groups", s.groups, "number of correction groups");
  sw->add_option("--budget-horizon", s.budget_horizon, "near-return scan horizon");
  sw->add_option("--trace-csv", s.trace_csv, "norm trace CSV");
  sw->add_option("--weights-out", s.weights_out, "weights JSON");

  auto* gr = sub("green", "Green's function at a point and level curves", cmd_green);
  poly_opts(gr);
  chart_opts(gr);
  gr->add_option("--point", s.point, "point re,im");
  gr->add_option("--levels", s.levels, "comma separated levels for the curves");
  gr->add_option("--curves-csv", s.curves_csv, "level curve CSV (x,y,G)");
  gr->add_option("--budget-green-iter", s.budget_green_iter, "iterations");
  gr->add_option("--tol-green", s.tol_green, "tolerance");

  auto* ch = sub("chart", "escape-time image and component sidecar", cmd_chart);
  poly_opts(ch);
  chart_opts(ch);

  auto* ca = sub("classify-auto", "degree growth and locally finite relations", cmd_classify_auto);
  ca->add_option("--map", s.map, "map literal, JSON file, or henon/elementary/nagata");
  ca->add_option("--inverse", s.inverse, "inverse map for escape witnesses");
  ca->add_option("--depth", s.depth, "largest relation order D");
  ca->add_flag("--include-identity", s.include_identity, "let f^0 join the relation");
  ca->add_option("--budget-degree", s.budget_degree, "iterates examined for degree growth");
  ca->add_option("--budget-terms", s.budget_terms, "term cap per component");
  ca->add_option("--tol-relation", s.tol_relation, "symbolic residual tolerance");

  auto* rp = sub("replay", "recompute the witnesses of a certificate", cmd_replay);
  rp->add_option("--certificate", s.certificate, "certificate JSON");
  chart_opts(rp);

  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_invalid;
  }

  auto* used = app.get_subcommands().front();
  Output out;
  out.out = s.out;
  json opts = json::object();
  for (const auto* opt : used->get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    std::string v;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) v += (v.empty() ? "" : ",") + r;
    } else {
      v = opt->get_default_str();
    }
    opts[opt->get_lnames().front()] = v;
  }
  out.config = {{"command", used->get_name()}, {"options", opts}};

  try {
    check_budgets(s);
    return handlers.at(used->get_name())(s, out);
  } catch (const invalid_input& e) {
    std::cerr << "tavg: invalid input: " << e.what() << "\n";
    return exit_invalid;
  } catch (const budget_exceeded& e) {
    std::cerr << "tavg: budget exceeded: " << e.what() << "\n";
    return exit_budget;
  } catch (const numerical_failure& e) {
    std::cerr << "tavg: numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "tavg: " << e.what() << "\n";
    return exit_numerical;
  }
}
