#include "tavg/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>

#include "tavg/errors.hpp"

namespace tavg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double segment_distance(cplx a, cplx b, cplx v) {
  const cplx ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(v - a);
  const double t = std::clamp(((v - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
  return std::abs(v - (a + t * ab));
}

double polyline_distance(const std::vector<cplx>& pts, cplx v) {
  double d = std::abs(pts.front() - v);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) d = std::min(d, segment_distance(pts[i], pts[i + 1], v));
  return d;
}

double normalized_angle(double a) {
  a = std::fmod(a, two_pi);
  return a < 0.0 ? a + two_pi : a;
}

struct CriticalSetup {
  std::vector<cplx> values;
  double clearance = 0.0;
};

CriticalSetup critical_setup(const ComplexPoly& f, int N, cplx p, const LollipopOptions& opt) {
  if (N < 1) throw invalid_input("monodromy: level must be >= 1");
  if (f.degree() < 2) throw invalid_input("monodromy: degree must be >= 2");
  CriticalSetup s;
  s.values = critical_data(f, N).critical_values;
  std::vector<cplx> pts = s.values;
  pts.push_back(p);
  const double sep = min_separation(pts);
  for (const auto& v : s.values)
    if (same_critical_value(v, p)) throw invalid_input("monodromy: base point is a critical value");
  s.clearance = opt.clearance_factor * sep;
  return s;
}

bool stem_clear(const std::vector<cplx>& stem, const std::vector<cplx>& values, cplx skip, bool has_skip,
                double min_dist) {
  for (const auto& w : values) {
    if (has_skip && w == skip) continue;
    if (polyline_distance(stem, w) < min_dist) return false;
  }
  return true;
}

double infinity_stem_angle(cplx p, const CriticalSetup& s, double outer) {
  // middle of the widest angular gap between critical directions seen from p
  std::vector<double> dirs;
  for (const auto& v : s.values) dirs.push_back(normalized_angle(std::arg(v - p)));
  std::sort(dirs.begin(), dirs.end());
  double base = 0.0, gap = -1.0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double next = i + 1 < dirs.size() ? dirs[i + 1] : dirs.front() + two_pi;
    if (next - dirs[i] > gap + 1e-12) {
      gap = next - dirs[i];
      base = dirs[i] + gap / 2.0;
    }
  }
  for (int k = 0; k <= 128; ++k) {
    for (int sgn : {1, -1}) {
      if (k == 0 && sgn < 0) continue;
      const double phi = base + sgn * k * two_pi / 256.0;
      const cplx u = std::polar(1.0, phi);
      const double b = (std::conj(p) * u).real();
      const double t = -b + std::sqrt(b * b - std::norm(p) + outer * outer);
      const std::vector<cplx> stem{p, p + t * u};
      if (stem_clear(stem, s.values, {}, false, 2.0 * s.clearance)) return phi;
    }
  }
  throw numerical_failure("monodromy: no clear ray to infinity; move the base point");
}

double outer_radius(cplx p, const CriticalSetup& s) {
  double m = std::abs(p);
  for (const auto& v : s.values) m = std::max(m, std::abs(v));
  return 2.0 * m + 1.0;
}

// F = f^n together with F' and F''.
struct IterateEval {
  ComplexPoly f, df, d2f;
  int n = 0;

  void operator()(cplx z, cplx& F, cplx& F1, cplx& F2) const {
    F = z;
    F1 = 1.0;
    F2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const cplx a = df(F);
      const cplx b = d2f(F);
      F2 = b * F1 * F1 + a * F2;
      F1 = a * F1;
      F = f(F);
    }
  }
};

cplx track(const IterateEval& ev, const std::vector<cplx>& path, cplx w0, double sep, double length,
           const LiftOptions& opt) {
  const double h0 = length / opt.initial_divisions;
  const double h_min = length * opt.min_step_factor;
  double h = h0;
  int accepted = 0;
  cplx w = w0;
  for (std::size_t s = 0; s + 1 < path.size(); ++s) {
    const cplx a = path[s], b = path[s + 1];
    const double seg = std::abs(b - a);
    if (seg == 0.0) continue;
    const cplx dir = (b - a) / seg;
    double t = 0.0;
    while (t < seg) {
      const double step = std::min(h, seg - t);
      const double t1 = t + step;
      const cplx target = t1 >= seg ? b : a + t1 * dir;
      cplx F, F1, F2;
      ev(w, F, F1, F2);
      bool ok = F1 != cplx{} && std::isfinite(std::abs(F1));
      cplx x = w;
      if (ok) {
        x = w + (target - F) / F1;  // predictor: solves the linearization at the new target
        int it = 0;
        ok = false;
        while (it <= opt.max_newton) {
          cplx G, G1, G2;
          ev(x, G, G1, G2);
          if (G1 == cplx{}) break;
          const cplx dx = (G - target) / G1;
          x -= dx;
          ++it;
          if (std::abs(dx) <= 1e-14 * (1.0 + std::abs(x))) {
            ok = it <= opt.max_newton;
            break;
          }
        }
        const double moved = std::abs(x - w);
        const double branch = std::abs(F2) > 0.0 ? 0.25 * std::abs(F1) / std::abs(F2) : INFINITY;
        if (ok && (moved > sep / 3.0 || moved > branch)) ok = false;
      }
      if (!ok) {
        h = step / 2.0;
        if (h < h_min) throw numerical_failure("lift_loop: step underflow, lost track");
        accepted = 0;
        continue;
      }
      w = x;
      t = t1;
      if (++accepted >= 4 && h < h0) {
        h = std::min(2.0 * h, h0);
        accepted = 0;
      }
    }
  }
  return w;
}

}  // namespace

double LoopPath::arclength() const {
  double L = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) L += std::abs(points[i + 1] - points[i]);
  return L;
}

std::string to_string(LoopPath::Kind k) {
  switch (k) {
    case LoopPath::Kind::lollipop: return "lollipop";
    case LoopPath::Kind::infinity_loop: return "infinity_loop";
    case LoopPath::Kind::composite: return "composite";
  }
  return "unknown";
}

int winding_number(const LoopPath& loop, cplx v) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < loop.points.size(); ++i)
    total += std::arg((loop.points[i + 1] - v) / (loop.points[i] - v));
  return static_cast<int>(std::lround(total / two_pi));
}

double distance_to(const LoopPath& loop, cplx v) { return polyline_distance(loop.points, v); }

LoopPath concatenate(const LoopPath& a, const LoopPath& b) {
  if (a.base != b.base) throw invalid_input("concatenate: loops have different base points");
  LoopPath c;
  c.kind = LoopPath::Kind::composite;
  c.base = a.base;
  c.points = a.points;
  c.points.insert(c.points.end(), b.points.begin() + 1, b.points.end());
  c.clearance = std::min(a.clearance, b.clearance);
  c.stem_angle = a.stem_angle;
  return c;
}

LoopPath reversed(const LoopPath& a) {
  LoopPath r = a;
  r.kind = LoopPath::Kind::composite;
  std::reverse(r.points.begin(), r.points.end());
  return r;
}

PreimageTree preimage_tree(const ComplexPoly& f, cplx p, int N, const FiberOptions& opt) {
  PreimageTree t;
  t.f = f;
  t.base = p;
  Fiber root;
  root.level = 0;
  root.base = p;
  root.points = {p};
  root.separation = INFINITY;
  root.simple = true;
  t.levels.push_back(root);
  for (auto& fb : fiber_levels(f, p, N, opt)) t.levels.push_back(std::move(fb));
  return t;
}

bool TreePermutation::is_bijection() const {
  std::vector<char> seen(perm.size(), 0);
  for (int x : perm) {
    if (x < 0 || static_cast<std::size_t>(x) >= perm.size() || seen[static_cast<std::size_t>(x)]) return false;
    seen[static_cast<std::size_t>(x)] = 1;
  }
  return true;
}

bool TreePermutation::is_tree_compatible() const {
  if (!is_bijection()) return false;
  std::vector<int> cur = perm;
  for (int k = level; k > 1; --k) {
    std::vector<int> up(cur.size() / static_cast<std::size_t>(degree), -1);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const std::size_t pi = i / static_cast<std::size_t>(degree);
      const int img = cur[i] / degree;
      if (up[pi] < 0)
        up[pi] = img;
      else if (up[pi] != img)
        return false;
    }
    cur = std::move(up);
  }
  return true;
}

TreePermutation TreePermutation::restrict_to(int k) const {
  if (k < 0 || k > level) throw invalid_input("restrict_to: level out of range");
  if (!is_tree_compatible()) throw invalid_input("restrict_to: permutation is not tree-compatible");
  TreePermutation r{level, degree, perm};
  while (r.level > k) {
    std::vector<int> up(r.perm.size() / static_cast<std::size_t>(degree));
    for (std::size_t i = 0; i < r.perm.size(); i += static_cast<std::size_t>(degree))
      up[i / static_cast<std::size_t>(degree)] = r.perm[i] / degree;
    r.perm = std::move(up);
    --r.level;
  }
  return r;
}

bool TreePermutation::is_identity() const {
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != static_cast<int>(i)) return false;
  return true;
}

std::vector<int> TreePermutation::cycle_type() const {
  std::vector<int> out;
  std::vector<char> seen(perm.size(), 0);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = 1;
      ++len;
    }
    out.push_back(len);
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

TreePermutation identity_permutation(int degree, int level) {
  std::size_t n = 1;
  for (int k = 0; k < level; ++k) n *= static_cast<std::size_t>(degree);
  TreePermutation t{level, degree, std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) t.perm[i] = static_cast<int>(i);
  return t;
}

TreePermutation then(const TreePermutation& a, const TreePermutation& b) {
  if (a.perm.size() != b.perm.size()) throw invalid_input("then: size mismatch");
  TreePermutation c{a.level, a.degree, std::vector<int>(a.perm.size())};
  for (std::size_t i = 0; i < a.perm.size(); ++i) c.perm[i] = b.perm[static_cast<std::size_t>(a.perm[i])];
  return c;
}

TreePermutation inverse(const TreePermutation& a) {
  TreePermutation c{a.level, a.degree, std::vector<int>(a.perm.size())};
  for (std::size_t i = 0; i < a.perm.size(); ++i) c.perm[static_cast<std::size_t>(a.perm[i])] = static_cast<int>(i);
  return c;
}

std::vector<LoopPath> lollipop_generators(const ComplexPoly& f, int N, cplx p, const LollipopOptions& opt) {
  const auto setup = critical_setup(f, N, p, opt);
  const double c = setup.clearance;
  const double phi = infinity_stem_angle(p, setup, outer_radius(p, setup));
  std::vector<LoopPath> out;
  for (const auto& v : setup.values) {
    const double dist = std::abs(v - p);
    const double theta = std::arg(v - p);
    std::vector<cplx> stem;
    double stem_angle = theta;
    for (int k = 0; k <= 28 && stem.empty(); ++k) {
      for (int sgn : {1, -1}) {
        if (k == 0 && sgn < 0) continue;
        for (double rho : {0.5, 1.0, 1.5}) {
          std::vector<cplx> cand;
          if (k == 0) {
            cand = {p, v - c * (v - p) / dist};
          } else {
            const cplx q = p + rho * dist * std::polar(1.0, theta + sgn * 0.05 * k);
            cand = {p, q, v - c * (v - q) / std::abs(v - q)};
          }
          if (stem_clear(cand, setup.values, v, true, 2.0 * c)) {
            stem_angle = std::arg(cand[1] - p);
            stem = std::move(cand);
            break;
          }
          if (k == 0) break;
        }
        if (!stem.empty()) break;
      }
    }
    if (stem.empty()) throw numerical_failure("lollipop_generators: cannot route a stem; move the base point");
    LoopPath L;
    L.kind = LoopPath::Kind::lollipop;
    L.base = p;
    L.around = v;
    L.radius = c;
    L.stem_angle = stem_angle;
    L.points = stem;
    const double alpha = std::arg(stem.back() - v);
    for (int j = 1; j < opt.circle_points; ++j) L.points.push_back(v + std::polar(c, alpha + two_pi * j / opt.circle_points));
    L.points.push_back(stem.back());
    for (auto it = stem.rbegin() + 1; it != stem.rend(); ++it) L.points.push_back(*it);
    L.clearance = INFINITY;
    for (const auto& w : setup.values) L.clearance = std::min(L.clearance, distance_to(L, w));
    out.push_back(std::move(L));
  }
  std::stable_sort(out.begin(), out.end(), [&](const LoopPath& a, const LoopPath& b) {
    return normalized_angle(a.stem_angle - phi) < normalized_angle(b.stem_angle - phi);
  });
  return out;
}

LoopPath infinity_loop(const ComplexPoly& f, int N, cplx p, const LollipopOptions& opt) {
  const auto setup = critical_setup(f, N, p, opt);
  const double outer = outer_radius(p, setup);
  const double phi = infinity_stem_angle(p, setup, outer);
  const cplx u = std::polar(1.0, phi);
  const double b = (std::conj(p) * u).real();
  const cplx P = p + (-b + std::sqrt(b * b - std::norm(p) + outer * outer)) * u;
  LoopPath L;
  L.kind = LoopPath::Kind::infinity_loop;
  L.base = p;
  L.radius = outer;
  L.stem_angle = phi;
  L.points = {p, P};
  const double alpha = std::arg(P);
  const int M = std::max(opt.circle_points, 256);
  for (int j = 1; j < M; ++j) L.points.push_back(std::polar(outer, alpha + two_pi * j / M));
  L.points.push_back(P);
  L.points.push_back(p);
  L.clearance = INFINITY;
  for (const auto& w : setup.values) L.clearance = std::min(L.clearance, distance_to(L, w));
  return L;
}

TreePermutation lift_loop(const PreimageTree& tree, const LoopPath& loop, int level, const LiftOptions& opt) {
  const int k = level < 0 ? tree.depth() : level;
  if (k < 1 || k > tree.depth()) throw invalid_input("lift_loop: level out of range");
  if (loop.points.size() < 2 || loop.points.front() != tree.base || loop.points.back() != tree.base)
    throw invalid_input("lift_loop: loop must be closed at the tree base point");
  const Fiber& fb = tree.level(k);
  const IterateEval ev{tree.f, tree.f.derivative(), tree.f.derivative().derivative(), k};
  const double L = loop.arclength();
  const std::size_t n = fb.points.size();
  std::vector<cplx> ends(n);
  std::vector<std::exception_ptr> errs(n);
  auto run = [&](std::ptrdiff_t i) {
    try {
      ends[static_cast<std::size_t>(i)] = track(ev, loop.points, fb.points[static_cast<std::size_t>(i)], fb.separation, L, opt);
    } catch (...) {
      errs[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  const auto total = static_cast<std::ptrdiff_t>(n);
  if (opt.policy == exec_policy::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < total; ++i) run(i);
  } else {
    for (std::ptrdiff_t i = 0; i < total; ++i) run(i);
  }
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);

  TreePermutation t{k, tree.degree(), std::vector<int>(n, -1)};
  for (std::size_t i = 0; i < n; ++i) {
    int hit = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(ends[i] - fb.points[j]) < fb.separation / 3.0) {
        if (hit >= 0) throw numerical_failure("lift_loop: ambiguous endpoint match");
        hit = static_cast<int>(j);
      }
    }
    if (hit < 0) throw numerical_failure("lift_loop: endpoint matches no fiber point");
    t.perm[i] = hit;
  }
  if (!t.is_bijection()) throw numerical_failure("lift_loop: lifted endpoints are not a bijection");
  if (!t.is_tree_compatible()) throw numerical_failure("lift_loop: lifted permutation is not tree-compatible");
  return t;
}

TreePermutation infinity_cycle(const PreimageTree& tree, const LiftOptions& opt, const LollipopOptions& lopt) {
  const auto loop = infinity_loop(tree.f, tree.depth(), tree.base, lopt);
  auto t = lift_loop(tree, loop, -1, opt);
  const auto ct = t.cycle_type();
  if (ct.size() != 1) throw numerical_failure("infinity_cycle: lift is not a single complete cycle");
  return t;
}

ImgGenerators img_generators(const ComplexPoly& f, int N, cplx p, const LiftOptions& opt, const LollipopOptions& lopt,
                             const FiberOptions& fopt) {
  ImgGenerators g{preimage_tree(f, p, N, fopt), lollipop_generators(f, N, p, lopt), {}};
  g.loops.push_back(infinity_loop(f, N, p, lopt));
  for (const auto& L : g.loops) g.perms.push_back(lift_loop(g.tree, L, -1, opt));
  if (g.perms.back().cycle_type().size() != 1)
    throw numerical_failure("img_generators: loop at infinity does not lift to a complete cycle");
  return g;
}

void write_loop_csv(std::ostream& os, const LoopPath& loop) {
  os << "x,y\n";
  os.precision(17);
  for (const auto& z : loop.points) os << z.real() << ',' << z.imag() << '\n';
}

}  // namespace tavg
