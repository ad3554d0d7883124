#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "tavg/errors.hpp"
#include "tavg/permgroup.hpp"
#include "group_oracles.hpp"

using namespace tavg;
using namespace tavg::testing;

TEST_CASE("group orders") {
  CHECK(group_order(PermGroup(2, {{1, 0}})) == 2);
  CHECK(group_order(PermGroup(4, {{1, 0, 2, 3}, {1, 2, 3, 0}})) == 24);
  CHECK(group_order(PermGroup(5, {})) == 1);
  CHECK(group_order(PermGroup(9, {{1, 2, 3, 4, 5, 6, 7, 8, 0}, {1, 0, 2, 3, 4, 5, 6, 7, 8}})) == 362880);
  // (3!)^13 does not fit in 64 bits
  CHECK(tree_aut_order(3, 3) == boost::multiprecision::pow(big_int(6), 13));
  CHECK(tree_aut_order(2, 2) == 8);
}

TEST_CASE("group order and membership match brute-force enumeration") {
  std::mt19937_64 rng(99);
  const auto inst = random_instances();
  CHECK(inst.size() >= 60);
  for (const auto& I : inst) {
    const PermGroup G(I.n, I.gens);
    CHECK(G.order() == I.elems.size());
    for (int t = 0; t < 10; ++t) {
      CHECK(G.contains(I.elems[rng() % I.elems.size()]));
      const Perm r = random_perm(rng, I.n);
      CHECK(G.contains(r) == (std::find(I.elems.begin(), I.elems.end(), r) != I.elems.end()));
    }
  }
}

TEST_CASE("transitivity") {
  CHECK(!is_transitive(PermGroup(4, {{1, 0, 2, 3}})));
  CHECK(is_transitive(PermGroup(4, {{1, 2, 3, 0}})));
  CHECK(PermGroup(6, {{1, 0, 3, 2, 5, 4}}).orbit(2) == std::vector<int>{2, 3});
}

TEST_CASE("minimal_block examples") {
  const PermGroup klein(4, {{1, 0, 3, 2}, {2, 3, 0, 1}});
  const std::vector<int> s01{0, 1};
  CHECK(minimal_block(klein, s01).points == std::vector<int>{0, 1});
  CHECK(minimal_block(klein, s01).system == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
  const PermGroup s4(4, {{1, 0, 2, 3}, {1, 2, 3, 0}});
  CHECK(minimal_block(s4, s01).points == std::vector<int>{0, 1, 2, 3});
  const std::vector<int> single{2};
  CHECK(minimal_block(s4, single).points == std::vector<int>{2});
}

TEST_CASE("minimal_block and chain_closure equal brute force on small groups") {
  std::mt19937_64 rng(7);
  int transitive = 0;
  for (const auto& I : random_instances()) {
    const PermGroup G(I.n, I.gens);
    for (int t = 0; t < 3; ++t) {
      std::vector<int> seed{static_cast<int>(rng() % static_cast<unsigned>(I.n)), static_cast<int>(rng() % static_cast<unsigned>(I.n))};
      std::sort(seed.begin(), seed.end());
      seed.erase(std::unique(seed.begin(), seed.end()), seed.end());
      const auto blocks = brute_blocks(I.n, I.elems, seed);
      REQUIRE(!blocks.empty());
      const auto smallest = *std::min_element(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
      const auto mb = minimal_block(G, seed);
      CHECK(mb.points == smallest);
      CHECK(is_block(G, mb.points));
      for (const auto& B : blocks) CHECK(std::includes(B.begin(), B.end(), mb.points.begin(), mb.points.end()));
      // the system partitions the orbit of the block
      std::size_t covered = 0;
      for (const auto& b : mb.system) covered += b.size();
      std::set<int> orb;
      for (int x : mb.points)
        for (int y : G.orbit(x)) orb.insert(y);
      CHECK(covered == orb.size());

      const auto cc = chain_closure(G, seed);
      CHECK(cc.exhaustive);
      CHECK(std::includes(mb.points.begin(), mb.points.end(), cc.points.begin(), cc.points.end()));
      if (G.is_transitive()) {
        ++transitive;
        CHECK(cc.points == mb.points);
      }
      CHECK(replay_chain(G, cc));
    }
  }
  CHECK(transitive > 20);
}

TEST_CASE("chain_closure examples") {
  const PermGroup s4(4, {{1, 0, 2, 3}, {1, 2, 3, 0}});
  const std::vector<int> s01{0, 1};
  const auto c = chain_closure(s4, s01);
  CHECK(c.points == std::vector<int>{0, 1, 2, 3});
  CHECK(c.chain.size() == 2);
  CHECK(replay_chain(s4, c));
  // witness words are shortlex-first in the enumeration
  CHECK(c.chain.front().word.size() <= 2);

  const PermGroup z2(4, {{1, 0, 3, 2}});
  const auto d = chain_closure(z2, s01);
  CHECK(d.points == std::vector<int>{0, 1});
  CHECK(d.chain.empty());
}

TEST_CASE("chain_closure falls back to the block when the enumeration is capped") {
  const PermGroup s8(8, {{1, 0, 2, 3, 4, 5, 6, 7}, {1, 2, 3, 4, 5, 6, 7, 0}});
  const std::vector<int> seed{0, 4};
  const auto c = chain_closure(s8, seed, 5);
  CHECK(!c.exhaustive);
  CHECK(c.points.size() == 8);
  CHECK(replay_chain(s8, c));
  const auto full = chain_closure(s8, seed);
  CHECK(full.exhaustive);
  CHECK(full.points.size() == 8);
  CHECK(!full.used_block_fallback);
}

TEST_CASE("replay rejects tampered chains") {
  const PermGroup s4(4, {{1, 0, 2, 3}, {1, 2, 3, 0}});
  const std::vector<int> s01{0, 1};
  auto c = chain_closure(s4, s01);
  REQUIRE(!c.chain.empty());
  c.chain.front().set.pop_back();
  CHECK(!replay_chain(s4, c));
}

TEST_CASE("tree automorphism tests") {
  std::mt19937_64 rng(1);
  SUBCASE("random tree automorphisms are tree-compatible") {
    for (int t = 0; t < 50; ++t) CHECK(is_tree_compatible(random_tree_perm(rng, 3, 2), 3, 2));
    CHECK(!is_tree_compatible({0, 2, 1, 3}, 2, 2));
  }
  SUBCASE("full group detection") {
    // Aut(T_2) for the binary tree of depth 2 is generated by the root swap
    // and a swap below one vertex.
    const PermGroup full(4, {{2, 3, 0, 1}, {1, 0, 2, 3}});
    CHECK(is_full_tree_aut(full, 2, 2));
    const PermGroup cyc(4, {{2, 3, 1, 0}});
    CHECK(!is_full_tree_aut(cyc, 2, 2));
    CHECK_THROWS_AS(is_full_tree_aut(PermGroup(4, {{0, 2, 1, 3}}), 2, 2), invalid_input);
  }
  SUBCASE("enough random tree automorphisms generate everything") {
    std::vector<Perm> gens;
    for (int k = 0; k < 6; ++k) gens.push_back(random_tree_perm(rng, 3, 2));
    CHECK(is_full_tree_aut(PermGroup(9, gens), 3, 2));
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(PermGroup(3, {{0, 0, 1}}), invalid_input);
  CHECK_THROWS_AS(PermGroup(3, {{0, 1}}), invalid_input);
  const PermGroup g(3, {{1, 2, 0}});
  const std::vector<int> bad{5};
  CHECK_THROWS_AS(minimal_block(g, bad), invalid_input);
  CHECK_THROWS_AS(chain_closure(g, std::vector<int>{}), invalid_input);
}

TEST_CASE("copies share one chain and agree") {
  const PermGroup a(6, {{1, 2, 3, 4, 5, 0}, {1, 0, 2, 3, 4, 5}});
  const PermGroup b = a;
  CHECK(a.order() == 720);
  CHECK(b.order() == 720);
  CHECK(a.base() == b.base());
}
