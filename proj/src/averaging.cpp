#include "tavg/averaging.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tavg/errors.hpp"

namespace tavg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double sup_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

cplx complex_median(const std::vector<cplx>& v) {
  std::vector<double> re, im;
  for (const auto& x : v) {
    re.push_back(x.real());
    im.push_back(x.imag());
  }
  auto med = [](std::vector<double>& a) {
    std::sort(a.begin(), a.end());
    const std::size_t n = a.size();
    return n % 2 ? a[n / 2] : 0.5 * (a[n / 2 - 1] + a[n / 2]);
  };
  return {med(re), med(im)};
}

bool is_rotation_map(const ComplexPoly& f) {
  if (f.degree() != 1) return false;
  if (std::abs(std::abs(f[1]) - 1.0) > 1e-12) return false;
  return f[1] != cplx{1.0} || f[0] == cplx{};
}

// Orbit of the sample set, advanced one iterate at a time with a sanity check.
struct SampleOrbit {
  const ComplexPoly& f;
  std::vector<cplx> values;
  long long index = 0;
  double bound = INFINITY;

  SampleOrbit(const ComplexPoly& fn, std::vector<cplx> start) : f(fn), values(std::move(start)) {
    if (f.degree() >= 2) bound = escape_radius(f);
  }

  void step() {
    const auto& c = f.coeffs();
    const double bound2 = bound * bound;
    for (auto& v : values) {
      const double x = v.real(), y = v.imag();
      double re = c.back().real(), im = c.back().imag();
      for (std::size_t j = c.size() - 1; j-- > 0;) {
        const double t = re * x - im * y + c[j].real();
        im = re * y + im * x + c[j].imag();
        re = t;
      }
      v = {re, im};
      if (!(re * re + im * im <= bound2)) throw numerical_failure("sample orbit left the escape radius; the region is not inside a bounded Fatou component");
    }
    ++index;
  }

  void advance_to(long long m) {
    while (index < m) step();
  }
};

double sup_distance(const std::vector<cplx>& a, const std::vector<cplx>& b, double cutoff) {
  const double cut2 = cutoff * cutoff;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dx = a[i].real() - b[i].real(), dy = a[i].imag() - b[i].imag();
    m = std::max(m, dx * dx + dy * dy);
    if (m >= cut2) break;
  }
  return std::sqrt(m);
}

// First N >= 0 such that f^N maps the sample disk into one periodic rotation component.
int rotation_preperiod(const ComplexPoly& f, const std::vector<cplx>& samples, const SiegelOptions& opt) {
  if (f.degree() < 2) {
    if (!is_rotation_map(f)) throw invalid_input("build_siegel_weights: degree-1 map is not a rotation");
    return 0;
  }
  ChartOptions co;
  co.max_iter = opt.chart_max_iter;
  const auto chart = component_chart(f, default_box(f), opt.chart_resolution, co);
  std::vector<int> rotation_components;
  for (const auto& cy : chart.cycles) {
    if (cy.cls != CycleClass::rotation) continue;
    for (const auto& q : cy.points) {
      const int id = chart.component_at(q);
      if (id >= 0) rotation_components.push_back(id);
    }
  }
  if (rotation_components.empty()) throw invalid_input("build_siegel_weights: no rotation-class component found");
  std::vector<cplx> cur = samples;
  for (int n = 0; n <= opt.max_preperiod; ++n) {
    const int id = chart.component_at(cur.front());
    bool ok = id >= 0 && std::find(rotation_components.begin(), rotation_components.end(), id) != rotation_components.end();
    for (const auto& w : cur) ok = ok && chart.component_at(w) == id && chart.escape_distance_at(w) >= 1;
    if (ok) return n;
    for (auto& w : cur) w = f(w);
  }
  throw invalid_input("build_siegel_weights: the disk is not mapped into a rotation domain");
}

}  // namespace

std::vector<cplx> SampleGrid::points() const {
  if (!(radius >= 0.0) || rings < 1 || per_ring < 1) throw invalid_input("SampleGrid: bad shape");
  std::vector<cplx> pts{center};
  if (radius == 0.0) return pts;
  for (int j = 1; j <= rings; ++j) {
    const double r = radius * j / rings;
    for (int i = 0; i < per_ring; ++i) pts.push_back(center + std::polar(r, two_pi * i / per_ring));
  }
  return pts;
}

namespace {

NormTraceEntry trace_entry(long long index, const std::vector<cplx>& F) {
  NormTraceEntry t;
  t.index = index;
  t.sup_norm = sup_abs(F);
  t.median = complex_median(F);
  for (const auto& x : F) t.centered_norm = std::max(t.centered_norm, std::abs(x - t.median));
  return t;
}

}  // namespace

NormTrace evaluate_partial_sums(const ComplexPoly& f, const WeightSequence& w, const SampleGrid& grid) {
  NormTrace tr;
  tr.grid = grid;
  const auto samples = grid.points();
  SampleOrbit orbit(f, samples);
  std::vector<cplx> F(samples.size(), cplx{});
  std::size_t e = 0;
  for (std::size_t g = 0; g < w.group_end.size(); ++g) {
    for (; e < w.group_end[g]; ++e) {
      const auto& ent = w.entries[e];
      if (ent.index < orbit.index) throw invalid_input("evaluate_partial_sums: indices must be strictly increasing");
      orbit.advance_to(ent.index);
      for (std::size_t i = 0; i < F.size(); ++i) F[i] += ent.weight * orbit.values[i];
    }
    tr.entries.push_back(trace_entry(e > 0 ? w.entries[e - 1].index : 0, F));
  }
  return tr;
}

SiegelResult build_siegel_weights(const ComplexPoly& f, cplx center, double radius, int groups,
                                  const SampleGrid& grid_shape, const SiegelOptions& opt) {
  if (groups < 1) throw invalid_input("build_siegel_weights: need at least one group");
  if (!(radius > 0.0)) throw invalid_input("build_siegel_weights: radius must be positive");
  SampleGrid grid = grid_shape;
  grid.center = center;
  grid.radius = radius;
  const auto samples = grid.points();

  SiegelResult res;
  res.preperiod = rotation_preperiod(f, samples, opt);
  const long long N = res.preperiod;

  SampleOrbit orbit(f, samples);
  orbit.advance_to(N);
  std::map<long long, std::vector<cplx>> stored{{N, orbit.values}};
  std::vector<cplx> F = orbit.values;
  WeightSequence& w = res.weights;
  w.region = grid;
  w.entries.push_back({N, 1.0});
  w.group_end.push_back(1);
  res.trace.grid = grid;
  res.trace.entries.push_back(trace_entry(N, F));

  // Next index beyond the current one whose iterate is within eps of f^a.
  auto scan = [&](long long a, double eps) {
    const auto& target = stored.at(a);
    const long long start = orbit.index;
    double best = INFINITY;
    while (true) {
      orbit.step();
      const double d = sup_distance(orbit.values, target, eps);
      best = std::min(best, d);
      if (d < eps) break;
      if (orbit.index - start >= opt.horizon)
        throw budget_exceeded("build_siegel_weights: no near-return within the scan horizon (best norm " +
                              std::to_string(best) + ", needed " + std::to_string(eps) + ")");
    }
    stored[orbit.index] = orbit.values;
    res.returns.push_back({a, orbit.index});
    return orbit.index;
  };

  struct Pair {
    double c;
    long long a, b;  // the term c (f^a - f^b)
  };
  std::vector<Pair> pairs;

  for (int k = 1; k <= groups; ++k) {
    const double tau = std::ldexp(1.0, -k);
    res.targets.push_back(tau);
    if (k == 1) {
      const double eps = 0.9 * tau;
      res.tolerances.push_back(eps);
      const long long n1 = scan(N, eps);
      w.entries.push_back({n1, -1.0});
      for (std::size_t i = 0; i < F.size(); ++i) F[i] -= stored[n1][i];
      pairs.push_back({1.0, N, n1});
    } else {
      const double mu = sup_abs(F);
      double sum_c = 0.0;
      for (const auto& p : pairs) sum_c += std::abs(p.c);
      const double eps = 0.9 * (tau - mu / 2.0) / sum_c;
      if (!(eps > 0.0)) throw numerical_failure("build_siegel_weights: previous group missed its target");
      res.tolerances.push_back(eps);
      std::vector<Pair> next;
      for (const auto& p : pairs) {
        const long long b2 = scan(p.b, eps);
        const long long a2 = scan(p.a, eps);
        const double h = p.c / 2.0;
        w.entries.push_back({b2, h});
        w.entries.push_back({a2, -h});
        for (std::size_t i = 0; i < F.size(); ++i) F[i] += h * (stored[b2][i] - stored[a2][i]);
        next.push_back({h, p.a, p.b});
        next.push_back({h, p.a, a2});
        next.push_back({h, b2, p.b});
      }
      pairs = std::move(next);
    }
    w.group_end.push_back(w.entries.size());
    res.trace.entries.push_back(trace_entry(w.entries.back().index, F));
    if (sup_abs(F) > tau) throw numerical_failure("build_siegel_weights: group missed its target");
    // drop stored iterates that no pair refers to any more
    for (auto it = stored.begin(); it != stored.end();) {
      bool used = false;
      for (const auto& p : pairs) used = used || p.a == it->first || p.b == it->first;
      it = used ? std::next(it) : stored.erase(it);
    }
  }
  return res;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::no_time_average: return "NoTimeAverage";
    case Verdict::time_average_exists: return "TimeAverageExists";
    case Verdict::inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string to_string(Rule r) {
  switch (r) {
    case Rule::none: return "None";
    case Rule::global: return "Global";
    case Rule::escaping: return "Escaping";
    case Rule::julia: return "Julia";
    case Rule::monodromy_block: return "MonodromyBlock";
    case Rule::siegel_construction: return "SiegelConstruction";
  }
  return "None";
}

Verdict verdict_from_string(const std::string& s) {
  for (auto v : {Verdict::no_time_average, Verdict::time_average_exists, Verdict::inconclusive})
    if (to_string(v) == s) return v;
  throw invalid_input("unknown verdict: " + s);
}

Rule rule_from_string(const std::string& s) {
  for (auto r : {Rule::none, Rule::global, Rule::escaping, Rule::julia, Rule::monodromy_block, Rule::siegel_construction})
    if (to_string(r) == s) return r;
  throw invalid_input("unknown rule: " + s);
}

int vandermonde_rank(const std::vector<cplx>& pts, int max_power, double rel_tol, std::vector<double>* singular) {
  if (pts.empty() || max_power < 0) throw invalid_input("vandermonde_rank: empty input");
  const auto rows = static_cast<Eigen::Index>(pts.size());
  const auto cols = static_cast<Eigen::Index>(max_power) + 1;
  Eigen::MatrixXcd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    cplx p = 1.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      M(i, j) = p;
      p *= pts[static_cast<std::size_t>(i)];
    }
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double s = M.col(j).cwiseAbs().maxCoeff();
    if (s > 0.0) M.col(j) /= s;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  if (singular) singular->assign(sv.data(), sv.data() + sv.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  return rank;
}

Certificate refute_global(const ComplexPoly& f, int N, const RefuteOptions& opt) {
  if (f.degree() < 2) throw invalid_input("refute_global: degree must be >= 2 (affine maps are locally finite)");
  if (N < 1) throw invalid_input("refute_global: N must be >= 1");
  const int d = f.degree();
  int cols = 1;
  for (int k = 1; k < N; ++k) cols *= d;
  const double R = escape_radius(f);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-R, R);
  for (int t = 0; t < opt.trials; ++t) {
    const cplx p{u(rng), u(rng)};
    Fiber fb;
    try {
      fb = fiber(f, p, N);
    } catch (const numerical_failure&) {
      continue;
    }
    if (!fb.simple) continue;
    Certificate c;
    c.f = f;
    c.N = N;
    c.point = p;
    c.base = p;
    c.fiber = fb.points;
    c.seed = opt.seed;
    c.vandermonde_columns = cols + 1;
    c.vandermonde_rank = vandermonde_rank(fb.points, cols, opt.rank_tol);
    c.rule = Rule::global;
    c.tolerances["rank_rel"] = opt.rank_tol;
    c.tolerances["fiber_residual"] = fb.residual_tol;
    c.budgets["trials"] = opt.trials;
    c.budgets["trial_used"] = t + 1;
    if (c.vandermonde_rank == cols + 1) {
      c.verdict = Verdict::no_time_average;
      c.forced_zero_prefix = N;
      c.reason = "a polynomial of degree <= d^(N-1) constant on d^N distinct fiber points is constant";
    } else {
      c.verdict = Verdict::inconclusive;
      c.reason = "monomial matrix on the fiber is numerically rank deficient";
    }
    return c;
  }
  throw numerical_failure("refute_global: no simple fiber found within the trial budget");
}

namespace {

void fill_common(Certificate& c, const ComplexPoly& f, cplx z, int N, const CertifyOptions& opt) {
  c.f = f;
  c.point = z;
  c.N = N;
  c.seed = opt.seed;
  c.tolerances["green"] = opt.green_tol;
  c.budgets["green_max_iter"] = opt.green_max_iter;
  c.budgets["chart_resolution"] = opt.chart_resolution;
  c.budgets["chart_max_iter"] = opt.chart_max_iter;
  c.budgets["closure_cap"] = static_cast<double>(opt.closure_cap);
  c.budgets["guard_pixels"] = opt.guard_pixels;
}

void certify_rotation(Certificate& c, const ComplexPoly& f, cplx z, const ComponentChart& chart,
                      const CertifyOptions& opt) {
  const int dist = chart.escape_distance_at(z);
  double radius = 0.5 * std::max(0, dist - 1) * chart.pixel_size();
  for (int attempt = 0; attempt < 4 && radius > 0.0; ++attempt, radius /= 2.0) {
    try {
      auto res = build_siegel_weights(f, z, radius, opt.siegel_groups, {}, opt.siegel);
      c.verdict = Verdict::time_average_exists;
      c.rule = Rule::siegel_construction;
      c.reason = "the point is eventually mapped into a rotation domain";
      c.weights = res.weights;
      c.norm_trace = res.trace;
      c.tolerances["siegel_target_slack"] = 1e-9;
      c.budgets["siegel_groups"] = opt.siegel_groups;
      c.budgets["siegel_horizon"] = static_cast<double>(opt.siegel.horizon);
      return;
    } catch (const invalid_input&) {
    } catch (const numerical_failure&) {
    } catch (const budget_exceeded&) {
    }
  }
  c.verdict = Verdict::inconclusive;
  c.reason = "rotation-class component but no weight sequence could be built";
}

void certify_attracting(Certificate& c, const ComplexPoly& f, cplx z, int N, const ComponentChart& chart,
                        int comp, const CycleInfo& cycle, const CertifyOptions& opt) {
  const int d = f.degree();
  int half = 1;
  for (int k = 1; k < N; ++k) half *= d;
  const cplx wN = eval_iterate(f, N, z);
  const int target = chart.component_at(wN);
  cplx q = cycle.points.front();
  double best = INFINITY;
  for (const auto& pt : cycle.points) {
    if (target >= 0 && chart.component_at(pt) == target) {
      q = pt;
      break;
    }
    if (std::abs(pt - wN) < best) {
      best = std::abs(pt - wN);
      q = pt;
    }
  }
  c.enlargement_assumed = true;
  std::string last_error = "no admissible base point near the limit cycle";
  for (double r : {0.05, 0.03, 0.08, 0.02, 0.12}) {
    for (double ang : {0.7, 2.3, 3.9, 5.5}) {
      const cplx p = q + std::polar(r, ang);
      const int pc = chart.component_at(p);
      if (pc < 0 || (target >= 0 && pc != target) || chart.escape_distance_at(p) < opt.guard_pixels) continue;
      ImgGenerators gens;
      try {
        gens = img_generators(f, N, p);
      } catch (const std::exception& e) {
        last_error = e.what();
        continue;
      }
      const auto& fb = gens.tree.level(N);
      std::vector<int> S0;
      for (std::size_t i = 0; i < fb.points.size(); ++i)
        if (chart.component_at(fb.points[i]) == comp && chart.escape_distance_at(fb.points[i]) >= opt.guard_pixels)
          S0.push_back(static_cast<int>(i));
      if (S0.empty()) {
        last_error = "no fiber point inside the component of z";
        continue;
      }
      std::vector<Perm> perms;
      for (const auto& t : gens.perms) perms.push_back(t.perm);
      const PermGroup G(static_cast<int>(fb.points.size()), perms);
      const auto cc = chain_closure(G, S0, opt.closure_cap);

      c.base = p;
      c.fiber = fb.points;
      c.generators = perms;
      c.S0 = S0;
      c.chain.clear();
      for (const auto& st : cc.chain) c.chain.push_back({st.word, st.set});
      c.block = cc.points;
      c.block_fallback = cc.used_block_fallback;
      c.tolerances["fiber_residual"] = fb.residual_tol;
      c.budgets["closure_states"] = static_cast<double>(cc.states);
      if (static_cast<int>(cc.points.size()) > half) {
        c.verdict = Verdict::no_time_average;
        c.rule = Rule::monodromy_block;
        c.forced_zero_prefix = N;
        c.reason = "the closure of the fiber points in the component of z exceeds d^(N-1) points";
      } else {
        c.verdict = Verdict::inconclusive;
        c.rule = Rule::monodromy_block;
        c.reason = "the block through the component's fiber points has at most d^(N-1) points";
      }
      return;
    }
  }
  c.verdict = Verdict::inconclusive;
  c.reason = last_error;
}

}  // namespace

Certificate certify(const ComplexPoly& f, cplx z, int N, const CertifyOptions& opt) {
  if (f.degree() < 2) throw invalid_input("certify: degree must be >= 2");
  if (N < 2) throw invalid_input("certify: N must be >= 2");
  Certificate c;
  fill_common(c, f, z, N, opt);

  const auto g = green_value(f, z, opt.green_tol, opt.green_max_iter);
  c.green = g.value;
  if (g.value > 0.0) {
    c.verdict = Verdict::no_time_average;
    c.rule = Rule::escaping;
    c.forced_zero_prefix = N;
    c.reason = "the orbit of z escapes (positive Green's function)";
    return c;
  }

  ChartOptions co;
  co.max_iter = opt.chart_max_iter;
  const auto chart = component_chart(f, default_box(f), opt.chart_resolution, co);
  const auto pc = classify_point(f, z, chart);
  if (pc.kind == PointClass::Kind::escaping) {
    c.verdict = Verdict::no_time_average;
    c.rule = Rule::escaping;
    c.forced_zero_prefix = N;
    c.reason = "the orbit of z escapes";
    return c;
  }
  if (pc.kind == PointClass::Kind::near_julia) {
    c.verdict = Verdict::inconclusive;
    c.rule = Rule::julia;
    c.reason = "z is within pixel precision of the Julia set";
    return c;
  }
  const auto& comp = chart.components[static_cast<std::size_t>(pc.component)];
  if (comp.limit_cycle < 0) {
    c.verdict = Verdict::inconclusive;
    c.reason = "no limit cycle detected for the component of z";
    return c;
  }
  const auto& cycle = chart.cycles[static_cast<std::size_t>(comp.limit_cycle)];
  c.component_class = to_string(cycle.cls);
  if (cycle.cls == CycleClass::rotation) {
    certify_rotation(c, f, z, chart, opt);
    return c;
  }
  if (cycle.cls == CycleClass::repelling) {
    c.verdict = Verdict::inconclusive;
    c.reason = "component limit is not an attracting, parabolic or rotation cycle";
    return c;
  }
  certify_attracting(c, f, z, N, chart, pc.component, cycle, opt);
  return c;
}

bool replay(const Certificate& c, const CertifyOptions& opt) {
  const int d = c.f.degree();
  switch (c.rule) {
    case Rule::escaping: {
      if (c.verdict != Verdict::no_time_average) return false;
      return green_value(c.f, c.point, opt.green_tol, opt.green_max_iter).value > 0.0 ||
             classify_point(c.f, c.point, component_chart(c.f, default_box(c.f), opt.chart_resolution)).kind ==
                 PointClass::Kind::escaping;
    }
    case Rule::global: {
      if (!c.base) return false;
      for (const auto& w : c.fiber)
        if (std::abs(eval_iterate(c.f, c.N, w) - *c.base) > 1e-8 * std::max(1.0, std::abs(*c.base))) return false;
      if (static_cast<double>(min_separation(c.fiber)) <= 0.0) return false;
      const int r = vandermonde_rank(c.fiber, c.vandermonde_columns - 1, c.tolerances.count("rank_rel") ? c.tolerances.at("rank_rel") : 1e-9);
      if (r != c.vandermonde_rank) return false;
      return (c.verdict == Verdict::no_time_average) == (r == c.vandermonde_columns);
    }
    case Rule::monodromy_block: {
      if (!c.base) return false;
      const auto gens = img_generators(c.f, c.N, *c.base);
      const auto& fb = gens.tree.level(c.N);
      if (fb.points.size() != c.fiber.size()) return false;
      for (std::size_t i = 0; i < fb.points.size(); ++i)
        if (std::abs(fb.points[i] - c.fiber[i]) > 1e-9 * (1.0 + std::abs(c.fiber[i]))) return false;
      if (gens.perms.size() != c.generators.size()) return false;
      for (std::size_t i = 0; i < gens.perms.size(); ++i)
        if (gens.perms[i].perm != c.generators[i]) return false;
      const PermGroup G(static_cast<int>(fb.points.size()), c.generators);
      ChainClosure cc;
      cc.start = c.S0;
      std::sort(cc.start.begin(), cc.start.end());
      for (const auto& st : c.chain) cc.chain.push_back({st.word, word_to_perm(G, st.word), st.set});
      cc.points = c.block;
      cc.used_block_fallback = c.block_fallback;
      if (!replay_chain(G, cc)) return false;
      int half = 1;
      for (int k = 1; k < c.N; ++k) half *= d;
      return (c.verdict == Verdict::no_time_average) == (static_cast<int>(c.block.size()) > half);
    }
    case Rule::siegel_construction: {
      if (!c.weights) return false;
      const auto tr = evaluate_partial_sums(c.f, *c.weights, c.weights->region);
      if (tr.entries.size() != c.norm_trace.entries.size()) return false;
      for (std::size_t k = 0; k < tr.entries.size(); ++k) {
        if (std::abs(tr.entries[k].sup_norm - c.norm_trace.entries[k].sup_norm) > 1e-9) return false;
        if (k >= 1 && tr.entries[k].sup_norm > std::ldexp(1.0, -static_cast<int>(k)) + 1e-9) return false;
      }
      return true;
    }
    case Rule::julia:
    case Rule::none:
      return c.verdict == Verdict::inconclusive;
  }
  return false;
}

}  // namespace tavg
