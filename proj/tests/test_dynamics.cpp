#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tavg/dynamics.hpp"
#include "tavg/errors.hpp"
#include "test_support.hpp"

using namespace tavg;
using namespace tavg::testing;

namespace {

const double golden = (std::sqrt(5.0) - 1.0) / 2.0;

ComplexPoly siegel_quadratic() { return ComplexPoly({0.0, std::polar(1.0, 2.0 * std::numbers::pi * golden), 1.0}); }
ComplexPoly dumbbell() { return ComplexPoly({0.0, 0.0, 8.0, -8.0, 2.0}); }

}  // namespace

TEST_CASE("escape radius doubles moduli beyond it") {
  CHECK(escape_radius(ComplexPoly({0.0, 0.0, 1.0})) == doctest::Approx(2.0));
  std::mt19937_64 rng(3);
  for (const auto& f : {z2p1(), basilica(), quartic(), dumbbell(), siegel_quadratic()}) {
    const double R = escape_radius(f);
    CHECK(R >= 1.0);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < 100; ++i) {
      const cplx z = std::polar(R * (1.0 + 1e-9), ang(rng));
      CHECK(std::abs(f(z)) >= 2.0 * std::abs(z));
    }
  }
  // z^2+1: |z^2+1| >= 2|z| holds from 1+sqrt(2) on, and the returned R is beyond it.
  CHECK(escape_radius(z2p1()) >= 1.0 + std::sqrt(2.0));
  CHECK_THROWS_AS(escape_radius(ComplexPoly({1.0, 2.0})), invalid_input);
}

TEST_CASE("green_value") {
  SUBCASE("z^2 at 4 is log 4") {
    const auto g = green_value(ComplexPoly({0.0, 0.0, 1.0}), 4.0);
    CHECK(g.value == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  }
  SUBCASE("bounded orbit gives zero") {
    // A fixed point of z^2+1 stays put for a short budget.
    const cplx fixed = (1.0 + std::sqrt(cplx{-3.0})) / 2.0;
    const auto g = green_value(z2p1(), fixed, 1e-12, 30);
    CHECK(g.value == 0.0);
    CHECK(g.error_bound == 0.0);
  }
  SUBCASE("error bound respects tolerance") {
    const auto g = green_value(z2p1(), cplx{0.3, 0.2}, 1e-10);
    CHECK(g.value > 0.0);
    CHECK(g.error_bound <= 1e-10);
  }
}

TEST_CASE("Green functional equation G(f(z)) = d G(z)") {
  std::mt19937_64 rng(17);
  for (const auto& f : {z2p1(), basilica(), quartic(), dumbbell(), siegel_quadratic()}) {
    const double R = escape_radius(f);
    int tested = 0;
    while (tested < 1000) {
      const cplx z = random_cplx(rng, R);
      const double g0 = green_value(f, z).value;
      if (g0 <= 0.0) continue;
      ++tested;
      const double g1 = green_value(f, f(z)).value;
      CHECK(std::abs(g1 - f.degree() * g0) <= 1e-8);
    }
  }
}

TEST_CASE("fiber points share the pulled-back Green value") {
  for (const auto& f : {z2p1(), basilica(), quartic()}) {
    const cplx p{2.5, 0.7};
    const double gp = green_value(f, p).value;
    REQUIRE(gp > 0.0);
    for (int N = 1; N <= 3; ++N) {
      const auto fb = fiber(f, p, N);
      for (const auto& w : fb.points) CHECK(std::abs(green_value(f, w).value - gp / std::pow(f.degree(), N)) <= 1e-6);
    }
  }
}

TEST_CASE("batch Green kernel: serial and parallel agree") {
  std::mt19937_64 rng(4);
  std::vector<cplx> zs(500);
  for (auto& z : zs) z = random_cplx(rng, 2.0);
  std::vector<GreensEstimate> a(zs.size()), b(zs.size());
  green_values(basilica(), zs, a, 1e-12, 10000, exec_policy::serial);
  green_values(basilica(), zs, b, 1e-12, 10000, exec_policy::parallel);
  for (std::size_t i = 0; i < zs.size(); ++i) CHECK(a[i].value == b[i].value);
}

TEST_CASE("multiplier classes") {
  CHECK(classify_multiplier(0.0) == CycleClass::superattracting);
  CHECK(classify_multiplier(0.5) == CycleClass::attracting);
  CHECK(classify_multiplier(2.0) == CycleClass::repelling);
  CHECK(classify_multiplier(std::polar(1.0, 2.0 * std::numbers::pi / 5.0)) == CycleClass::parabolic);
  CHECK(classify_multiplier(std::polar(1.0, 2.0 * std::numbers::pi * golden)) == CycleClass::rotation);
}

TEST_CASE("find_cycles") {
  SUBCASE("z^2-1 has the superattracting 2-cycle {0,-1}") {
    const auto cs = find_cycles(basilica(), 2);
    bool found = false;
    for (const auto& c : cs)
      if (c.period == 2) {
        found = true;
        CHECK(c.cls == CycleClass::superattracting);
        const std::vector<cplx> expect{0.0, -1.0};
        CHECK(hausdorff(c.points, expect) < 1e-12);
      }
    CHECK(found);
  }
  SUBCASE("2z^2(z-2)^2 has the superattracting fixed point 0") {
    const auto cs = find_cycles(dumbbell(), 1);
    bool found = false;
    for (const auto& c : cs)
      if (std::abs(c.points[0]) < 1e-12) {
        found = true;
        CHECK(c.cls == CycleClass::superattracting);
      }
    CHECK(found);
  }
  SUBCASE("golden Siegel quadratic: rotation fixed point at 0") {
    const auto cs = find_cycles(siegel_quadratic(), 1);
    bool found = false;
    for (const auto& c : cs)
      if (std::abs(c.points[0]) < 1e-12) {
        found = true;
        CHECK(c.cls == CycleClass::rotation);
        CHECK(std::abs(c.multiplier - siegel_quadratic()[1]) < 1e-12);
      }
    CHECK(found);
  }
  SUBCASE("cycles are deduplicated and satisfy f^m(z) = z") {
    const auto cs = find_cycles(z2p1(), 4);
    int total_points = 0;
    for (const auto& c : cs) {
      total_points += c.period;
      for (const auto& p : c.points) CHECK(std::abs(eval_iterate(z2p1(), c.period, p) - p) < 1e-8);
    }
    // every root of f^4(z) = z and f^3(z) = z is a point of some listed cycle
    CHECK(total_points == 2 + 2 + 6 + 12);
  }
  SUBCASE("z^2+1 has 9 cycles of exact period 6") {
    // 2^6 - 2^3 - 2^2 + 2 = 54 points of exact period 6
    int count = 0;
    for (const auto& c : find_cycles(z2p1(), 6))
      if (c.period == 6) {
        ++count;
        CHECK(std::abs(z2p1()(c.points.back()) - c.points.front()) < 1e-8);
      }
    CHECK(count == 9);
  }
}

TEST_CASE("superattracting fixture cycles contain a critical point") {
  for (const auto& f : {basilica(), quartic(), dumbbell()}) {
    const auto crit = roots(f.derivative());
    for (const auto& c : find_cycles(f, 2)) {
      if (c.cls != CycleClass::superattracting) continue;
      bool hit = false;
      for (const auto& p : c.points)
        for (const auto& q : crit) hit = hit || std::abs(p - q) < 1e-8;
      CHECK(hit);
    }
  }
}

TEST_CASE("component charts") {
  SUBCASE("z^2: unit disk is one component attracted to 0") {
    const auto f = ComplexPoly({0.0, 0.0, 1.0});
    const auto ch = component_chart(f, default_box(f), 200);
    const int l = ch.component_at(0.0);
    REQUIRE(l >= 0);
    CHECK(ch.component_at(cplx{0.5, 0.3}) == l);
    CHECK(ch.component_at(cplx{-0.6, -0.6}) == l);
    const auto& comp = ch.components[static_cast<std::size_t>(l)];
    REQUIRE(comp.limit_cycle >= 0);
    CHECK(std::abs(ch.cycles[static_cast<std::size_t>(comp.limit_cycle)].points[0]) < 1e-12);
    CHECK(ch.components.size() == 1);
  }
  SUBCASE("z^2-1: components of 0 and -1 differ, both attracted to {0,-1}") {
    const auto ch = component_chart(basilica(), default_box(basilica()), 400);
    const int a = ch.component_at(0.0), b = ch.component_at(-1.0);
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    CHECK(a != b);
    const int ca = ch.components[static_cast<std::size_t>(a)].limit_cycle;
    const int cb = ch.components[static_cast<std::size_t>(b)].limit_cycle;
    REQUIRE(ca >= 0);
    CHECK(ca == cb);
    CHECK(ch.cycles[static_cast<std::size_t>(ca)].period == 2);
    // The sample orbit of every component converges to its recorded cycle.
    for (const auto& comp : ch.components) {
      REQUIRE(comp.limit_cycle >= 0);
      const auto& cy = ch.cycles[static_cast<std::size_t>(comp.limit_cycle)];
      cplx z = comp.sample;
      for (int n = 0; n < 200; ++n) z = basilica()(z);
      double dist = 1e9;
      for (const auto& p : cy.points) dist = std::min(dist, std::abs(z - p));
      CHECK(dist < 1e-6);
    }
  }
  SUBCASE("z^2+1 has empty interior") {
    for (int res : {128, 256}) {
      const auto ch = component_chart(z2p1(), default_box(z2p1()), res);
      CHECK(ch.components.empty());
    }
  }
  SUBCASE("corners must escape") {
    CHECK_THROWS_AS(component_chart(basilica(), Box{{-0.2, -0.2}, {0.2, 0.2}}, 64), invalid_input);
  }
}

TEST_CASE("chart refinement never turns interior pixels into escaping ones") {
  const auto box = default_box(basilica());
  const auto coarse = component_chart(basilica(), box, 150);
  const auto fine = component_chart(basilica(), box, 300);
  int checked = 0;
  for (int iy = 0; iy < coarse.height; ++iy)
    for (int ix = 0; ix < coarse.width; ++ix) {
      const auto i = coarse.index(ix, iy);
      if (coarse.label[i] < 0 || coarse.escape_distance[i] < 2) continue;
      ++checked;
      for (int sy = 0; sy < 2; ++sy)
        for (int sx = 0; sx < 2; ++sx) CHECK(fine.escape_time[fine.index(2 * ix + sx, 2 * iy + sy)] < 0);
    }
  CHECK(checked > 100);
}

TEST_CASE("serial and parallel chart kernels agree") {
  ChartOptions s, p;
  s.policy = exec_policy::serial;
  p.policy = exec_policy::parallel;
  const auto a = component_chart(quartic(), default_box(quartic()), 160, s);
  const auto b = component_chart(quartic(), default_box(quartic()), 160, p);
  CHECK(a.escape_time == b.escape_time);
  CHECK(a.label == b.label);
}

TEST_CASE("classify_point") {
  const auto ch = component_chart(basilica(), default_box(basilica()), 400);
  SUBCASE("z^2+1 at 0 escapes") {
    const auto ch1 = component_chart(z2p1(), default_box(z2p1()), 64);
    const auto c = classify_point(z2p1(), 0.0, ch1);
    CHECK(c.kind == PointClass::Kind::escaping);
    CHECK(c.green > 0.0);
  }
  SUBCASE("z^2-1 at 0 is bounded in the superattracting basin") {
    const auto c = classify_point(basilica(), 0.0, ch);
    REQUIRE(c.kind == PointClass::Kind::bounded);
    const auto& comp = ch.components[static_cast<std::size_t>(c.component)];
    CHECK(ch.cycles[static_cast<std::size_t>(comp.limit_cycle)].cls == CycleClass::superattracting);
  }
  SUBCASE("z^2-1 at 10 escapes") { CHECK(classify_point(basilica(), 10.0, ch).kind == PointClass::Kind::escaping); }
  SUBCASE("repelling fixed point is near the Julia set") {
    const double beta = (1.0 + std::sqrt(5.0)) / 2.0;
    CHECK(classify_point(basilica(), beta, ch).kind == PointClass::Kind::near_julia);
  }
}

TEST_CASE("golden Siegel quadratic chart: rotation component at 0") {
  const auto f = siegel_quadratic();
  const auto ch = component_chart(f, default_box(f), 300);
  const int l = ch.component_at(0.0);
  REQUIRE(l >= 0);
  const int cyc = ch.components[static_cast<std::size_t>(l)].limit_cycle;
  REQUIRE(cyc >= 0);
  CHECK(ch.cycles[static_cast<std::size_t>(cyc)].cls == CycleClass::rotation);
}
