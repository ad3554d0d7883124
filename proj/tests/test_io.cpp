#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "tavg/errors.hpp"
#include "tavg/io.hpp"

using namespace tavg;

namespace {

ComplexPoly siegel_quadratic() {
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  return ComplexPoly({0.0, std::polar(1.0, 2.0 * std::numbers::pi * golden), 1.0});
}

void check_round_trip(const Certificate& c) {
  const json j = certificate_to_json(c);
  const auto text = j.dump(2);
  const Certificate back = certificate_from_json(json::parse(text));
  CHECK(certificate_to_json(back).dump(2) == text);
  CHECK(back.verdict == c.verdict);
  CHECK(back.rule == c.rule);
  CHECK(back.fiber == c.fiber);
  CHECK(back.generators == c.generators);
  CHECK(back.block == c.block);
  CHECK(replay(back));
}

}  // namespace

TEST_CASE("polynomial literal") {
  const auto f = poly_from_json(json::parse("[[1,0],[0,0],[1,0]]"));
  CHECK(f.degree() == 2);
  CHECK(f(cplx{0.0, 1.0}) == cplx{0.0});
  CHECK(poly_to_json(f).dump() == "[[1.0,0.0],[0.0,0.0],[1.0,0.0]]");
  CHECK(poly_from_json(json::parse(R"({"polynomial": [[0,0],[1,0]]})")).degree() == 1);
  CHECK_THROWS_AS(poly_from_json(json::parse("[]")), invalid_input);
  CHECK_THROWS_AS(poly_from_json(json::parse("[[1,0,3]]")), invalid_input);
  CHECK_THROWS_AS(poly_from_json(json::parse(R"([["a",0]])")), invalid_input);
}

TEST_CASE("map literal round trip") {
  const auto h = henon_map(ComplexPoly({0.5, 0.0, 1.0}), cplx{0.0, 1.0});
  const auto j = map_to_json(h);
  CHECK(j.at("dim") == 2);
  CHECK(map_from_json(j) == h);
  CHECK(map_from_json(json::parse(j.dump())) == h);
  const auto lit = json::parse(R"({"dim": 2, "components": [[{"exps": [0, 1], "re": 1}, {"exps": [2, 0], "re": 1}], [{"exps": [1, 0], "re": 1}]]})");
  CHECK(map_from_json(lit) == henon_map(ComplexPoly({0.0, 0.0, 1.0})));
  CHECK_THROWS_AS(map_from_json(json::parse(R"({"dim": 2, "components": [[{"exps": [0, 1, 2], "re": 1}], []]})")), invalid_input);
  CHECK_THROWS_AS(map_from_json(json::parse(R"({"components": []})")), invalid_input);
}

TEST_CASE("certificate round trips and replays") {
  SUBCASE("monodromy block") { check_round_trip(certify(ComplexPoly({-1.0, 0.0, 1.0}), 0.1, 3)); }
  SUBCASE("Siegel weights") {
    const auto c = certify(siegel_quadratic(), cplx{0.05, 0.02}, 2);
    REQUIRE(c.weights.has_value());
    check_round_trip(c);
    const auto w = weights_from_json(weights_to_json(*c.weights));
    CHECK(w.entries.size() == c.weights->entries.size());
    CHECK(w.group_end == c.weights->group_end);
  }
  SUBCASE("global") { check_round_trip(refute_global(ComplexPoly({1.0, 0.0, 1.0}), 3)); }
  SUBCASE("escaping") { check_round_trip(certify(ComplexPoly({1.0, 0.0, 1.0}), 3.0, 2)); }
  SUBCASE("schema keys") {
    const auto j = certificate_to_json(certify(ComplexPoly({-1.0, 0.0, 1.0}), 0.1, 3));
    for (const char* k : {"version", "polynomial", "point", "N", "verdict", "rule", "witnesses", "tolerances", "budgets"})
      CHECK(j.contains(k));
    for (const char* k : {"base", "fiber", "generators", "chain", "block", "norm_trace"}) CHECK(j.at("witnesses").contains(k));
    auto bad = j;
    bad["version"] = 99;
    CHECK_THROWS_AS(certificate_from_json(bad), invalid_input);
    bad = j;
    bad["verdict"] = "Perhaps";
    CHECK_THROWS_AS(certificate_from_json(bad), invalid_input);
  }
}

TEST_CASE("chart export") {
  const ComplexPoly f({-1.0, 0.0, 1.0});
  const auto chart = component_chart(f, default_box(f), 60);
  std::ostringstream os;
  write_chart_pgm(os, chart);
  const auto s = os.str();
  const std::string header = "P5\n60 60\n255\n";
  REQUIRE(s.size() == header.size() + 3600);
  CHECK(s.substr(0, header.size()) == header);
  const auto side = chart_sidecar(chart);
  CHECK(side.at("width") == 60);
  CHECK(side.at("components").size() == chart.components.size());
  CHECK(side.at("cycles").size() == chart.cycles.size());
}

TEST_CASE("level curve points lie on the level set") {
  const ComplexPoly f({1.0, 0.0, 1.0});
  std::ostringstream os;
  const double levels[] = {0.25, 0.5};
  write_level_curves_csv(os, f, Box{{-2.0, -2.0}, {2.0, 2.0}}, 120, levels);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,y,G");
  int n = 0;
  double worst = 0.0;
  while (std::getline(is, line)) {
    double x, y, g;
    char c1, c2;
    std::istringstream ls(line);
    ls >> x >> c1 >> y >> c2 >> g;
    worst = std::max(worst, std::abs(green_value(f, {x, y}).value - g));
    ++n;
  }
  CHECK(n > 100);
  CHECK(worst < 0.02);
}

TEST_CASE("norm trace csv") {
  NormTrace t;
  t.entries = {{0, 0.5, 0.5, 0.0}, {3, 0.25, 0.2, cplx{0.1, 0.0}}};
  std::ostringstream os;
  write_norm_trace_csv(os, t);
  CHECK(os.str().rfind("group,index,sup_norm,centered_norm,median_re,median_im\n0,0,0.5,0.5,0,0\n1,3,0.25", 0) == 0);
}
