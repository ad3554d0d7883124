#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace tavg {

using big_int = boost::multiprecision::cpp_int;

// Image array: p[i] is the image of i.
using Perm = std::vector<int>;

Perm identity_perm(int n);
// a then b: i -> b[a[i]].
Perm perm_then(const Perm& a, const Perm& b);
Perm perm_inverse(const Perm& a);
bool is_perm(const Perm& p);
// Images of the children of one node stay siblings at every level of the
// d-ary tree of depth N (points are level-N tree indices).
bool is_tree_compatible(const Perm& p, int d, int N);

// Finite permutation group given by generators. The stabilizer chain is
// built on first use and shared between copies.
class PermGroup {
public:
  PermGroup(int n, std::vector<Perm> generators);

  int degree() const { return n_; }
  const std::vector<Perm>& generators() const { return gens_; }

  big_int order() const;
  bool contains(const Perm& p) const;
  std::vector<int> orbit(int point) const;
  bool is_transitive() const;
  // Base points of the stabilizer chain.
  std::vector<int> base() const;

private:
  struct Chain;
  const Chain& chain() const;

  int n_;
  std::vector<Perm> gens_;
  mutable std::shared_ptr<Chain> chain_;
};

big_int group_order(const PermGroup& g);
bool is_transitive(const PermGroup& g);

struct Block {
  std::vector<int> points;               // sorted
  std::vector<std::vector<int>> system;  // images of points under the group, each sorted
};

// Images of B under the group when they form a partition of their union,
// nullopt when some image meets B without equalling it.
std::optional<std::vector<std::vector<int>>> block_system(const PermGroup& g, std::span<const int> points);
bool is_block(const PermGroup& g, std::span<const int> points);

// Smallest block containing the seed: union-find closure of the seed pairs
// under the generators.
Block minimal_block(const PermGroup& g, std::span<const int> seed);

big_int tree_aut_order(int d, int N);
// Throws invalid_input when a generator is not tree-compatible.
bool is_full_tree_aut(const PermGroup& g, int d, int N);

struct ChainStep {
  std::vector<int> word;  // generator indices, applied left to right
  Perm sigma;
  std::vector<int> set;   // S_j after the step, sorted
};

struct ChainClosure {
  std::vector<int> points;       // sorted
  std::vector<int> start;        // S_0, sorted
  std::vector<ChainStep> chain;  // S_j = sigma_j(S_{j-1}) u S_{j-1}
  std::size_t states = 0;        // group elements enumerated
  bool exhaustive = false;       // every group element was visited
  bool used_block_fallback = false;
};

// Grows S0 by sigma(T) whenever sigma(T) meets T, sigma ranging over group
// elements enumerated breadth-first over generator words (shortlex). When
// the enumeration hits `cap` and the group is transitive, the result is
// completed by minimal_block, which coincides with the full closure.
ChainClosure chain_closure(const PermGroup& g, std::span<const int> S0, std::size_t cap = 100000);

// Replays a chain: checks every side condition as index sets.
bool replay_chain(const PermGroup& g, const ChainClosure& c);

Perm word_to_perm(const PermGroup& g, std::span<const int> word);

}  // namespace tavg
