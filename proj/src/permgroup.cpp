#include "tavg/permgroup.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <numeric>
#include <unordered_set>

#include "tavg/errors.hpp"

namespace tavg {

namespace {

struct PermHash {
  std::size_t operator()(const Perm& p) const {
    std::size_t h = 1469598103934665603ull;
    for (int x : p) {
      h ^= static_cast<std::size_t>(x);
      h *= 1099511628211ull;
    }
    return h;
  }
};

std::vector<int> sorted_unique(std::span<const int> pts) {
  std::vector<int> v(pts.begin(), pts.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<int> image_of(const Perm& p, const std::vector<int>& set) {
  std::vector<int> out;
  out.reserve(set.size());
  for (int x : set) out.push_back(p[static_cast<std::size_t>(x)]);
  std::sort(out.begin(), out.end());
  return out;
}

bool intersects(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    a[i] < b[j] ? ++i : ++j;
  }
  return false;
}

void check_points(int n, std::span<const int> pts) {
  if (pts.empty()) throw invalid_input("point set must be nonempty");
  for (int x : pts)
    if (x < 0 || x >= n) throw invalid_input("point out of range");
}

}  // namespace

Perm identity_perm(int n) {
  Perm p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return p;
}

Perm perm_then(const Perm& a, const Perm& b) {
  Perm c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = b[static_cast<std::size_t>(a[i])];
  return c;
}

Perm perm_inverse(const Perm& a) {
  Perm c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[static_cast<std::size_t>(a[i])] = static_cast<int>(i);
  return c;
}

bool is_perm(const Perm& p) {
  std::vector<char> seen(p.size(), 0);
  for (int x : p) {
    if (x < 0 || static_cast<std::size_t>(x) >= p.size() || seen[static_cast<std::size_t>(x)]) return false;
    seen[static_cast<std::size_t>(x)] = 1;
  }
  return true;
}

bool is_tree_compatible(const Perm& p, int d, int N) {
  if (!is_perm(p)) return false;
  std::size_t n = 1;
  for (int k = 0; k < N; ++k) n *= static_cast<std::size_t>(d);
  if (p.size() != n) return false;
  std::vector<int> cur = p;
  for (int k = N; k > 1; --k) {
    std::vector<int> up(cur.size() / static_cast<std::size_t>(d), -1);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const std::size_t parent = i / static_cast<std::size_t>(d);
      const int img = cur[i] / d;
      if (up[parent] < 0)
        up[parent] = img;
      else if (up[parent] != img)
        return false;
    }
    cur = std::move(up);
  }
  return true;
}

// Deterministic Schreier-Sims: levels are verified from the deepest up;
// a Schreier generator that fails to sift joins the strong generators and
// the check restarts at the level where it dropped out.
struct PermGroup::Chain {
  struct Level {
    int base = -1;
    std::vector<Perm> trans;  // trans[x] maps base to x; empty when x is not in the orbit
    std::vector<int> orbit;
  };
  int n = 0;
  std::vector<int> base;
  std::vector<Perm> strong;
  std::vector<Level> levels;

  static int moved_point(const Perm& h) {
    for (std::size_t x = 0; x < h.size(); ++x)
      if (h[x] != static_cast<int>(x)) return static_cast<int>(x);
    return -1;
  }

  std::vector<const Perm*> level_gens(std::size_t i) const {
    std::vector<const Perm*> out;
    for (const auto& s : strong) {
      bool fixes = true;
      for (std::size_t j = 0; j < i && fixes; ++j) fixes = s[static_cast<std::size_t>(base[j])] == base[j];
      if (fixes) out.push_back(&s);
    }
    return out;
  }

  void rebuild(std::size_t i) {
    Level& L = levels[i];
    L.base = base[i];
    L.trans.assign(static_cast<std::size_t>(n), Perm{});
    L.trans[static_cast<std::size_t>(L.base)] = identity_perm(n);
    L.orbit = {L.base};
    const auto gens = level_gens(i);
    for (std::size_t k = 0; k < L.orbit.size(); ++k) {
      const int x = L.orbit[k];
      for (const Perm* g : gens) {
        const int y = (*g)[static_cast<std::size_t>(x)];
        if (!L.trans[static_cast<std::size_t>(y)].empty()) continue;
        L.trans[static_cast<std::size_t>(y)] = perm_then(L.trans[static_cast<std::size_t>(x)], *g);
        L.orbit.push_back(y);
      }
    }
  }

  // Residue of h after sifting from level i, and the level where it stopped.
  std::pair<Perm, std::size_t> sift(Perm h, std::size_t i) const {
    for (std::size_t j = i; j < levels.size(); ++j) {
      const Perm& t = levels[j].trans[static_cast<std::size_t>(h[static_cast<std::size_t>(levels[j].base)])];
      if (t.empty()) return {std::move(h), j};
      h = perm_then(h, perm_inverse(t));
    }
    return {std::move(h), levels.size()};
  }

  void build(const std::vector<Perm>& gens) {
    const Perm id = identity_perm(n);
    for (const auto& g : gens) {
      if (g == id) continue;
      strong.push_back(g);
      bool moves = false;
      for (int b : base) moves = moves || g[static_cast<std::size_t>(b)] != b;
      if (!moves) base.push_back(moved_point(g));
    }
    levels.assign(base.size(), Level{});
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(base.size()) - 1;
    while (i >= 0) {
      const auto ui = static_cast<std::size_t>(i);
      rebuild(ui);
      bool clean = true;
      const auto gens_i = level_gens(ui);
      for (std::size_t k = 0; k < levels[ui].orbit.size() && clean; ++k) {
        const int x = levels[ui].orbit[k];
        for (const Perm* s : gens_i) {
          const int y = (*s)[static_cast<std::size_t>(x)];
          Perm h = perm_then(perm_then(levels[ui].trans[static_cast<std::size_t>(x)], *s),
                             perm_inverse(levels[ui].trans[static_cast<std::size_t>(y)]));
          auto [r, j] = sift(std::move(h), ui + 1);
          if (r == id) continue;
          if (j == levels.size()) {
            base.push_back(moved_point(r));
            levels.emplace_back();
          }
          strong.push_back(std::move(r));
          for (std::size_t l = ui + 1; l < j; ++l) rebuild(l);
          i = static_cast<std::ptrdiff_t>(j);
          clean = false;
          break;
        }
      }
      if (clean) --i;
    }
  }

  bool sift_is_identity(const Perm& h) const {
    auto [r, j] = sift(h, 0);
    return j == levels.size() && r == identity_perm(n);
  }
};

PermGroup::PermGroup(int n, std::vector<Perm> generators) : n_(n), gens_(std::move(generators)) {
  if (n < 1) throw invalid_input("PermGroup: degree must be >= 1");
  for (const auto& g : gens_)
    if (static_cast<int>(g.size()) != n || !is_perm(g)) throw invalid_input("PermGroup: generator is not a permutation");
}

const PermGroup::Chain& PermGroup::chain() const {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (!chain_) {
    auto c = std::make_shared<Chain>();
    c->n = n_;
    c->build(gens_);
    chain_ = c;
  }
  return *chain_;
}

big_int PermGroup::order() const {
  big_int o = 1;
  for (const auto& L : chain().levels) o *= L.orbit.size();
  return o;
}

bool PermGroup::contains(const Perm& p) const {
  if (static_cast<int>(p.size()) != n_ || !is_perm(p)) return false;
  return chain().sift_is_identity(p);
}

std::vector<int> PermGroup::base() const {
  std::vector<int> b;
  for (const auto& L : chain().levels) b.push_back(L.base);
  return b;
}

std::vector<int> PermGroup::orbit(int point) const {
  if (point < 0 || point >= n_) throw invalid_input("orbit: point out of range");
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::vector<int> out{point};
  seen[static_cast<std::size_t>(point)] = 1;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (const auto& g : gens_) {
      const int y = g[static_cast<std::size_t>(out[i])];
      if (!seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = 1;
        out.push_back(y);
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

bool PermGroup::is_transitive() const { return static_cast<int>(orbit(0).size()) == n_; }

big_int group_order(const PermGroup& g) { return g.order(); }
bool is_transitive(const PermGroup& g) { return g.is_transitive(); }

std::optional<std::vector<std::vector<int>>> block_system(const PermGroup& g, std::span<const int> points) {
  check_points(g.degree(), points);
  const auto B = sorted_unique(points);
  std::vector<std::vector<int>> sys{B};
  std::vector<int> owner(static_cast<std::size_t>(g.degree()), -1);
  for (int x : B) owner[static_cast<std::size_t>(x)] = 0;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    for (const auto& p : g.generators()) {
      auto img = image_of(p, sys[i]);
      const int o = owner[static_cast<std::size_t>(img.front())];
      if (o >= 0) {
        if (sys[static_cast<std::size_t>(o)] != img) return std::nullopt;
        continue;
      }
      for (int x : img)
        if (owner[static_cast<std::size_t>(x)] >= 0) return std::nullopt;
      for (int x : img) owner[static_cast<std::size_t>(x)] = static_cast<int>(sys.size());
      sys.push_back(std::move(img));
    }
  }
  return sys;
}

bool is_block(const PermGroup& g, std::span<const int> points) { return block_system(g, points).has_value(); }

Block minimal_block(const PermGroup& g, std::span<const int> seed) {
  check_points(g.degree(), seed);
  const auto S = sorted_unique(seed);
  std::vector<int> parent(static_cast<std::size_t>(g.degree()));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  std::deque<std::pair<int, int>> queue;
  for (std::size_t i = 1; i < S.size(); ++i) {
    const int a = find(S[0]), b = find(S[i]);
    if (a == b) continue;
    parent[static_cast<std::size_t>(b)] = a;
    queue.emplace_back(a, b);
  }
  while (!queue.empty()) {
    const auto [a, b] = queue.front();
    queue.pop_front();
    for (const auto& p : g.generators()) {
      const int x = find(p[static_cast<std::size_t>(a)]), y = find(p[static_cast<std::size_t>(b)]);
      if (x == y) continue;
      parent[static_cast<std::size_t>(y)] = x;
      queue.emplace_back(x, y);
    }
  }
  Block blk;
  const int r = find(S[0]);
  std::vector<std::vector<int>> classes(static_cast<std::size_t>(g.degree()));
  for (int x = 0; x < g.degree(); ++x) classes[static_cast<std::size_t>(find(x))].push_back(x);
  blk.points = classes[static_cast<std::size_t>(r)];
  auto sys = block_system(g, blk.points);
  if (!sys) throw numerical_failure("minimal_block: internal inconsistency");
  for (auto& b : *sys) std::sort(b.begin(), b.end());
  std::sort(sys->begin(), sys->end());
  blk.system = std::move(*sys);
  return blk;
}

big_int tree_aut_order(int d, int N) {
  if (d < 1 || N < 0) throw invalid_input("tree_aut_order: bad signature");
  big_int fact = 1;
  for (int i = 2; i <= d; ++i) fact *= i;
  big_int nodes = 0, pw = 1;
  for (int k = 0; k < N; ++k) {
    nodes += pw;
    pw *= d;
  }
  return boost::multiprecision::pow(fact, static_cast<unsigned>(nodes));
}

bool is_full_tree_aut(const PermGroup& g, int d, int N) {
  for (const auto& p : g.generators())
    if (!is_tree_compatible(p, d, N)) throw invalid_input("is_full_tree_aut: generator is not tree-compatible");
  if (g.generators().empty() && g.degree() != 1) return N == 0;
  return g.order() == tree_aut_order(d, N);
}

Perm word_to_perm(const PermGroup& g, std::span<const int> word) {
  Perm p = identity_perm(g.degree());
  for (int w : word) {
    if (w < 0 || static_cast<std::size_t>(w) >= g.generators().size()) throw invalid_input("word: bad generator index");
    p = perm_then(p, g.generators()[static_cast<std::size_t>(w)]);
  }
  return p;
}

ChainClosure chain_closure(const PermGroup& g, std::span<const int> S0, std::size_t cap) {
  check_points(g.degree(), S0);
  ChainClosure out;
  out.start = sorted_unique(S0);
  std::vector<int> T = out.start;

  struct Elem {
    Perm p;
    std::vector<int> word;
  };
  std::vector<Elem> elems;
  std::unordered_set<Perm, PermHash> seen;
  const Perm id = identity_perm(g.degree());
  elems.push_back({id, {}});
  seen.insert(id);
  bool truncated = false;
  for (std::size_t i = 0; i < elems.size(); ++i) {
    for (std::size_t k = 0; k < g.generators().size(); ++k) {
      Perm q = perm_then(elems[i].p, g.generators()[k]);
      if (seen.count(q)) continue;
      if (elems.size() >= cap) {
        truncated = true;
        break;
      }
      seen.insert(q);
      auto w = elems[i].word;
      w.push_back(static_cast<int>(k));
      elems.push_back({std::move(q), std::move(w)});
    }
    if (truncated) break;
  }
  out.states = elems.size();
  out.exhaustive = !truncated;

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& e : elems) {
      const auto img = image_of(e.p, T);
      if (!intersects(img, T)) continue;
      std::vector<int> uni;
      std::set_union(T.begin(), T.end(), img.begin(), img.end(), std::back_inserter(uni));
      if (uni.size() == T.size()) continue;
      T = std::move(uni);
      out.chain.push_back({e.word, e.p, T});
      changed = true;
    }
  }
  if (truncated && g.is_transitive()) {
    const auto blk = minimal_block(g, out.start);
    if (blk.points.size() > T.size()) {
      T = blk.points;
      out.used_block_fallback = true;
    }
  }
  out.points = T;
  return out;
}

bool replay_chain(const PermGroup& g, const ChainClosure& c) {
  std::vector<int> T = c.start;
  for (const auto& step : c.chain) {
    const Perm sigma = word_to_perm(g, step.word);
    if (sigma != step.sigma) return false;
    const auto img = image_of(sigma, T);
    if (!intersects(img, T)) return false;
    std::vector<int> uni;
    std::set_union(T.begin(), T.end(), img.begin(), img.end(), std::back_inserter(uni));
    if (uni == T || uni != step.set) return false;
    T = std::move(uni);
  }
  return c.used_block_fallback ? is_block(g, c.points) : T == c.points;
}

}  // namespace tavg
