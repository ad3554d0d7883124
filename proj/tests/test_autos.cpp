#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tavg/autos.hpp"
#include "tavg/errors.hpp"

using namespace tavg;

namespace {

MultiPoly mono(int k, Monomial m, cplx c) {
  MultiPoly p(k);
  p.terms[std::move(m)] = c;
  return p;
}

MultiPoly var(int k, int j) { return MultiPoly::variable(k, j); }

MultiPolyMap henon() { return henon_map(ComplexPoly({0.0, 0.0, 1.0})); }

MultiPolyMap elementary() { return {2, {var(2, 0), var(2, 1) + mono(2, {3, 0}, 1.0)}}; }

// Classical Nagata map with D = x^2 - y z, which D preserves.
MultiPolyMap nagata() {
  const auto x = var(3, 0), y = var(3, 1), z = var(3, 2);
  const auto D = multiply(x, x) - multiply(y, z);
  return {3, {x + multiply(D, z), y + 2.0 * multiply(D, x) + multiply(multiply(D, D), z), z}};
}

std::vector<cplx> random_point(std::mt19937_64& rng, int k, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<cplx> x;
  for (int j = 0; j < k; ++j) x.emplace_back(u(rng), u(rng));
  return x;
}

double dist(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Numerical oracle for sum a_i F^i at x, by plain iteration.
std::vector<cplx> relation_at(const MultiPolyMap& F, const std::vector<cplx>& a, bool with_identity, std::vector<cplx> x) {
  std::vector<cplx> s(x.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i > 0 || !with_identity) x = F(x);
    for (std::size_t j = 0; j < x.size(); ++j) s[j] += a[i] * x[j];
  }
  return s;
}

MultiPolyMap random_map(std::mt19937_64& rng, int k, int max_deg, int terms) {
  std::uniform_int_distribution<int> e(0, max_deg);
  std::normal_distribution<double> g;
  std::vector<MultiPoly> comps;
  for (int c = 0; c < k; ++c) {
    MultiPoly p(k);
    for (int t = 0; t < terms; ++t) {
      Monomial m(static_cast<std::size_t>(k));
      int budget = max_deg;
      for (auto& x : m) {
        x = std::min(e(rng), budget);
        budget -= x;
      }
      p.terms[m] += cplx{g(rng), g(rng)};
    }
    comps.push_back(p);
  }
  return {k, comps};
}

}  // namespace

TEST_CASE("composition matches hand expansions") {
  const auto h2 = compose(henon(), henon());
  // (z + (w + z^2)^2, w + z^2)
  const MultiPoly first = var(2, 0) + mono(2, {0, 2}, 1.0) + mono(2, {2, 1}, 2.0) + mono(2, {4, 0}, 1.0);
  CHECK(h2.components[0] == first);
  CHECK(h2.components[1] == var(2, 1) + mono(2, {2, 0}, 1.0));
  CHECK(h2.degree() == 4);

  const auto e2 = compose(elementary(), elementary());
  CHECK(e2.components[0] == var(2, 0));
  CHECK(e2.components[1] == var(2, 1) + mono(2, {3, 0}, 2.0));
  CHECK(e2.degree() == 3);

  CHECK(compose(MultiPolyMap::identity(2), henon()) == henon());
  CHECK(compose(henon(), MultiPolyMap::identity(2)) == henon());
}

TEST_CASE("composition agrees with evaluation and respects the degree bound") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const int k = 2 + t % 2;
    const auto F = random_map(rng, k, 3, 4), G = random_map(rng, k, 2, 3);
    const auto FG = compose(F, G);
    CHECK(FG.degree() <= F.degree() * G.degree());
    for (int s = 0; s < 3; ++s) {
      const auto x = random_point(rng, k);
      CHECK(dist(FG(x), F(G(x))) <= 1e-9 * (1.0 + dist(F(G(x)), std::vector<cplx>(x.size()))));
    }
  }
  const auto h = henon();
  MultiPolyMap it = h;
  for (int n = 2; n <= 5; ++n) {
    const auto next = compose(h, it);
    CHECK(next.degree() == h.degree() * it.degree());
    it = next;
  }
}

TEST_CASE("degree growth") {
  CHECK(degree_growth(henon(), 5).degrees == std::vector<int>{2, 4, 8, 16, 32});
  CHECK(degree_growth(elementary(), 5).degrees == std::vector<int>{3, 3, 3, 3, 3});
  const MultiPolyMap affine(2, {2.0 * var(2, 1) + MultiPoly::constant(2, 1.0), var(2, 0) - var(2, 1)});
  CHECK(degree_growth(affine, 3).degrees == std::vector<int>{1, 1, 1});
  CHECK(fitted_growth_rate({2, 4, 8, 16, 32}) == doctest::Approx(2.0));
  const auto capped = degree_growth(henon(), 20, 500);
  CHECK(capped.truncated);
  CHECK(capped.degrees.size() < 20);
}

TEST_CASE("locally finite relations are verified by recomposition") {
  SUBCASE("elementary map gives the second difference") {
    const auto r = locally_finite_relation(elementary(), 6);
    REQUIRE(r.verdict == FinitenessReport::Verdict::locally_finite);
    CHECK(r.relation == std::vector<cplx>{1.0, -2.0, 1.0});
    CHECK(r.residual == 0.0);
    std::mt19937_64 rng(1);
    for (int s = 0; s < 5; ++s) {
      const auto x = random_point(rng, 2, 2.0);
      CHECK(dist(relation_at(elementary(), r.relation, false, x), {0.0, 0.0}) < 1e-12);
    }
  }
  SUBCASE("the identity may join on request") {
    FinitenessOptions o;
    o.include_identity = true;
    const auto r = locally_finite_relation(elementary(), 6, o);
    REQUIRE(r.verdict == FinitenessReport::Verdict::locally_finite);
    CHECK(r.includes_identity);
    CHECK(r.relation == std::vector<cplx>{1.0, -2.0, 1.0});
  }
  SUBCASE("Nagata map") {
    const auto r = locally_finite_relation(nagata(), 6);
    REQUIRE(r.verdict == FinitenessReport::Verdict::locally_finite);
    CHECK(r.relation == std::vector<cplx>{1.0, -3.0, 3.0, -1.0});
    CHECK(r.degrees.front() == 5);
    std::mt19937_64 rng(2);
    for (int s = 0; s < 5; ++s) {
      const auto x = random_point(rng, 3);
      CHECK(dist(relation_at(nagata(), r.relation, false, x), {0.0, 0.0, 0.0}) < 1e-9);
    }
    CHECK(relative_difference(relation_map(nagata(), r.relation, false), MultiPolyMap(3, {MultiPoly(3), MultiPoly(3), MultiPoly(3)})) <= 1e-9);
  }
  SUBCASE("a linear map of order four") {
    const MultiPolyMap L(2, {cplx{0.0, 1.0} * var(2, 0), cplx{0.0, -1.0} * var(2, 1)});
    const auto r = locally_finite_relation(L, 6);
    REQUIRE(r.verdict == FinitenessReport::Verdict::locally_finite);
    CHECK(r.relation == std::vector<cplx>{1.0, 0.0, 1.0});
  }
  SUBCASE("Henon map grows") {
    const auto r = locally_finite_relation(henon(), 6);
    CHECK(r.verdict == FinitenessReport::Verdict::degree_growth);
    CHECK(r.rate == doctest::Approx(2.0));
    CHECK(r.relation.empty());
  }
  CHECK_THROWS_AS(locally_finite_relation(henon(), 0), invalid_input);
}

TEST_CASE("C^2 classification") {
  const ComplexPoly p({1.0, 0.0, 0.0, 1.0});
  const auto hc = classify_c2(henon_map(p), henon_inverse(p));
  CHECK(hc.cls == C2Class::henon_like);
  CHECK(hc.global_average == false);
  CHECK(hc.growth.degrees.front() == 3);
  // only saddle fixed points here: a witness may be absent, the class stands
  if (!hc.witnesses) CHECK(hc.note.find("witness search failed") != std::string::npos);
  const auto hq = classify_c2(henon(), henon_inverse(ComplexPoly({0.0, 0.0, 1.0})));
  CHECK(hq.cls == C2Class::henon_like);
  CHECK(hq.witnesses.has_value());

  const MultiPolyMap el(2, {0.5 * var(2, 0) + MultiPoly::constant(2, 5.0), var(2, 1) + mono(2, {2, 0}, 1.0)});
  const auto ec = classify_c2(el);
  CHECK(ec.cls == C2Class::elementary_like);
  CHECK(ec.global_average == true);
  CHECK(locally_finite_relation(el, 8).verdict == FinitenessReport::Verdict::locally_finite);

  const double c = std::cos(0.3), s = std::sin(0.3);
  const MultiPolyMap rot(2, {c * var(2, 0) - s * var(2, 1), s * var(2, 0) + c * var(2, 1)});
  CHECK(classify_c2(rot).cls == C2Class::affine);

  CHECK(classify_c2(elementary()).cls == C2Class::elementary_like);
  CHECK(locally_finite_relation(elementary(), 8).verdict == FinitenessReport::Verdict::locally_finite);
  CHECK_THROWS_AS(classify_c2(nagata()), invalid_input);
}

TEST_CASE("Henon escape witnesses") {
  const auto h = henon();
  const auto hi = henon_inverse(ComplexPoly({0.0, 0.0, 1.0}));
  const auto w = henon_escape_witnesses(h, hi);

  CHECK(w.forward.start == std::vector<cplx>{3.0, 0.0});
  CHECK(w.forward.rate >= 1.5);
  // independent iteration: |z_{n+1}| >= |z_n|^2 - |w_n| and the norms recorded match
  cplx z = 3.0, v = 0.0;
  for (std::size_t n = 1; n < w.forward.norms.size(); ++n) {
    const cplx z1 = v + z * z, v1 = z;
    CHECK(std::abs(z1) >= std::abs(z) * std::abs(z) - std::abs(v));
    z = z1;
    v = v1;
    CHECK(std::max(std::abs(z), std::abs(v)) == doctest::Approx(w.forward.norms[n]).epsilon(1e-12));
    CHECK(std::log(w.forward.norms[n]) >= static_cast<double>(n) * std::log(w.forward.rate) + std::log(w.forward.norms[0]) - 1e-9);
  }

  double top = 0.0;
  for (double b : w.bounded) top = std::max(top, b);
  CHECK(top <= 100.0);
  CHECK(w.bounded.size() == 31);
  CHECK(w.backward.rate > 1.0);
  CHECK(w.backward.norms.back() >= 1e100);
  // backward orbit by the explicit inverse (z, w) -> (w, z - w^2)
  z = w.backward.start[0];
  v = w.backward.start[1];
  for (std::size_t n = 1; n < std::min<std::size_t>(w.backward.norms.size(), 8); ++n) {
    const cplx z1 = v, v1 = z - v * v;
    z = z1;
    v = v1;
    CHECK(std::max(std::abs(z), std::abs(v)) == doctest::Approx(w.backward.norms[n]).epsilon(1e-9));
  }

  CHECK_THROWS_AS(henon_escape_witnesses(elementary(), elementary()), invalid_input);
  CHECK_THROWS_AS(henon_escape_witnesses(h, h), invalid_input);
}

TEST_CASE("map validation") {
  CHECK_THROWS_AS(MultiPolyMap(2, {var(2, 0)}), invalid_input);
  CHECK_THROWS_AS(MultiPolyMap(2, {var(2, 0), var(3, 1)}), invalid_input);
  CHECK_THROWS_AS(MultiPolyMap(2, {var(2, 0), mono(2, {1, 0, 0}, 1.0)}), invalid_input);
  CHECK_THROWS_AS(MultiPolyMap(2, {var(2, 0), mono(2, {-1, 0}, 1.0)}), invalid_input);
  CHECK_THROWS_AS(compose(henon(), nagata()), invalid_input);
  CHECK_THROWS_AS(henon_map(ComplexPoly({0.0, 0.0, 1.0}), 0.0), invalid_input);
  const MultiPolyMap tiny(2, {var(2, 0) + mono(2, {2, 0}, 1e-15), var(2, 1)});
  CHECK(tiny.degree() == 1);
}
