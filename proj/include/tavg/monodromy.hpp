#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tavg/exec.hpp"
#include "tavg/poly.hpp"

namespace tavg {

// Closed polyline based at `base` (points.front() == points.back() == base).
struct LoopPath {
  enum class Kind { lollipop, infinity_loop, composite };
  Kind kind = Kind::composite;
  cplx base{};
  std::vector<cplx> points;
  cplx around{};          // encircled critical value (lollipop only)
  double radius = 0.0;    // circle radius (lollipop) or outer radius (infinity loop)
  double clearance = 0.0; // min distance from the polyline to the critical values it was built against
  double stem_angle = 0.0;

  double arclength() const;
};

std::string to_string(LoopPath::Kind k);

// Winding number of the closed polyline around v (v must not lie on it).
int winding_number(const LoopPath& loop, cplx v);

// Distance from the polyline to a point.
double distance_to(const LoopPath& loop, cplx v);

// First a, then b. Both must share the base point.
LoopPath concatenate(const LoopPath& a, const LoopPath& b);
LoopPath reversed(const LoopPath& a);

// Levels 0..N of the preimage tree of p; levels[0] holds p alone and
// level-k point i has parent i / d at level k-1.
struct PreimageTree {
  ComplexPoly f;
  cplx base{};
  std::vector<Fiber> levels;

  int depth() const { return static_cast<int>(levels.size()) - 1; }
  int degree() const { return f.degree(); }
  const Fiber& level(int k) const { return levels.at(static_cast<std::size_t>(k)); }
};

PreimageTree preimage_tree(const ComplexPoly& f, cplx p, int N, const FiberOptions& opt = {});

// perm[i] is the index reached from fiber point i; composition applies the
// first loop's permutation first.
struct TreePermutation {
  int level = 0;
  int degree = 0;
  std::vector<int> perm;

  std::size_t size() const { return perm.size(); }
  bool is_bijection() const;
  // Children of one node go to children of one node at every level.
  bool is_tree_compatible() const;
  // Induced action on level k < level; throws if not tree-compatible.
  TreePermutation restrict_to(int k) const;
  bool is_identity() const;
  // Cycle lengths in descending order.
  std::vector<int> cycle_type() const;

  friend bool operator==(const TreePermutation&, const TreePermutation&) = default;
};

TreePermutation identity_permutation(int degree, int level);
// a then b.
TreePermutation then(const TreePermutation& a, const TreePermutation& b);
TreePermutation inverse(const TreePermutation& a);

struct LollipopOptions {
  double clearance_factor = 0.25;  // circle radius relative to the min pairwise distance
  int circle_points = 96;
};

// One counterclockwise lollipop per distinct critical value of f^N, ordered
// counterclockwise by stem direction starting just after the stem of the
// loop at infinity, so that their product in this order is that loop.
std::vector<LoopPath> lollipop_generators(const ComplexPoly& f, int N, cplx p, const LollipopOptions& opt = {});

// Radial stem from p beyond every critical value, one counterclockwise turn,
// stem back.
LoopPath infinity_loop(const ComplexPoly& f, int N, cplx p, const LollipopOptions& opt = {});

struct LiftOptions {
  int initial_divisions = 512;    // initial step = arclength / initial_divisions
  double min_step_factor = 1e-8;  // step floor = arclength * min_step_factor
  int max_newton = 4;
  exec_policy policy = exec_policy::parallel;
};

// Continues every level-k fiber point along the loop (k = tree depth when
// level < 0) and matches endpoints within separation / 3. Throws
// numerical_failure on lost tracks or ambiguous matches.
TreePermutation lift_loop(const PreimageTree& tree, const LoopPath& loop, int level = -1, const LiftOptions& opt = {});

// Lift of the infinity loop; throws numerical_failure unless it is a single
// d^N-cycle.
TreePermutation infinity_cycle(const PreimageTree& tree, const LiftOptions& opt = {}, const LollipopOptions& lopt = {});

// Lollipop lifts followed by the lift at infinity, all on one tree.
struct ImgGenerators {
  PreimageTree tree;
  std::vector<LoopPath> loops;  // lollipops in planar order, then the infinity loop
  std::vector<TreePermutation> perms;
};

ImgGenerators img_generators(const ComplexPoly& f, int N, cplx p, const LiftOptions& opt = {},
                             const LollipopOptions& lopt = {}, const FiberOptions& fopt = {});

void write_loop_csv(std::ostream& os, const LoopPath& loop);

}  // namespace tavg
