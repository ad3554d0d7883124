#include "tavg/autos.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <unordered_map>

#include "tavg/errors.hpp"

namespace tavg {

MultiPoly MultiPoly::constant(int nvars, cplx c) {
  MultiPoly p(nvars);
  if (c != cplx{}) p.terms[Monomial(static_cast<std::size_t>(nvars), 0)] = c;
  return p;
}

MultiPoly MultiPoly::variable(int nvars, int j) {
  if (j < 0 || j >= nvars) throw invalid_input("MultiPoly::variable: index out of range");
  MultiPoly p(nvars);
  Monomial m(static_cast<std::size_t>(nvars), 0);
  m[static_cast<std::size_t>(j)] = 1;
  p.terms[m] = 1.0;
  return p;
}

int MultiPoly::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms) {
    int s = 0;
    for (int e : m) s += e;
    d = std::max(d, s);
  }
  return d;
}

double MultiPoly::max_coeff() const {
  double m = 0.0;
  for (const auto& [e, c] : terms) m = std::max(m, std::abs(c));
  return m;
}

cplx MultiPoly::operator()(const std::vector<cplx>& x) const {
  if (static_cast<int>(x.size()) != vars) throw invalid_input("MultiPoly: point has the wrong dimension");
  cplx s{};
  for (const auto& [m, c] : terms) {
    cplx t = c;
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m[j]) t *= std::pow(x[j], m[j]);
    s += t;
  }
  return s;
}

void MultiPoly::prune(double tol) {
  std::erase_if(terms, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& o) {
  if (o.vars != vars) throw invalid_input("MultiPoly: variable count mismatch");
  for (const auto& [m, c] : o.terms) {
    auto [it, fresh] = terms.try_emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (it->second == cplx{}) terms.erase(it);
    }
  }
  return *this;
}

MultiPoly& MultiPoly::operator*=(cplx s) {
  if (s == cplx{}) {
    terms.clear();
    return *this;
  }
  for (auto& [m, c] : terms) c *= s;
  return *this;
}

MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a += -1.0 * b; }
MultiPoly operator*(cplx s, MultiPoly a) { return a *= s; }

namespace {

// Exponent tuples packed into 16-bit fields; usable while every product
// exponent stays below 2^16 and there are at most four variables.
bool packable(const MultiPoly& a, const MultiPoly& b) {
  if (a.vars > 4) return false;
  int da = 0, db = 0;
  for (const auto& [m, c] : a.terms)
    for (int e : m) da = std::max(da, e);
  for (const auto& [m, c] : b.terms)
    for (int e : m) db = std::max(db, e);
  return da + db < 65536;
}

std::uint64_t pack(const Monomial& m) {
  std::uint64_t k = 0;
  for (std::size_t j = 0; j < m.size(); ++j) k |= static_cast<std::uint64_t>(m[j]) << (16 * j);
  return k;
}

Monomial unpack(std::uint64_t k, int vars) {
  Monomial m(static_cast<std::size_t>(vars));
  for (std::size_t j = 0; j < m.size(); ++j) m[j] = static_cast<int>((k >> (16 * j)) & 0xffff);
  return m;
}

}  // namespace

MultiPoly multiply(const MultiPoly& a, const MultiPoly& b, std::size_t cap) {
  if (a.vars != b.vars) throw invalid_input("multiply: variable count mismatch");
  MultiPoly r(a.vars);
  if (packable(a, b)) {
    std::vector<std::pair<std::uint64_t, cplx>> pa, pb;
    for (const auto& [m, c] : a.terms) pa.emplace_back(pack(m), c);
    for (const auto& [m, c] : b.terms) pb.emplace_back(pack(m), c);
    std::unordered_map<std::uint64_t, cplx> acc;
    for (const auto& [ka, ca] : pa)
      for (const auto& [kb, cb] : pb) {
        acc[ka + kb] += ca * cb;
        if (acc.size() > cap) throw budget_exceeded("multiply: term cap exceeded");
      }
    for (const auto& [k, c] : acc)
      if (c != cplx{}) r.terms.emplace(unpack(k, a.vars), c);
    return r;
  }
  Monomial m(static_cast<std::size_t>(a.vars));
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms) {
      for (std::size_t j = 0; j < m.size(); ++j) m[j] = ma[j] + mb[j];
      r.terms[m] += ca * cb;
      if (r.terms.size() > cap) throw budget_exceeded("multiply: term cap exceeded");
    }
  std::erase_if(r.terms, [](const auto& kv) { return kv.second == cplx{}; });
  return r;
}

MultiPolyMap::MultiPolyMap(int k, std::vector<MultiPoly> comps) : dim(k), components(std::move(comps)) {
  if (k < 1) throw invalid_input("MultiPolyMap: dimension must be positive");
  if (static_cast<int>(components.size()) != k) throw invalid_input("MultiPolyMap: need one component per variable");
  for (auto& c : components) {
    if (c.vars != k) throw invalid_input("MultiPolyMap: component has the wrong variable count");
    for (const auto& [m, v] : c.terms) {
      if (static_cast<int>(m.size()) != k) throw invalid_input("MultiPolyMap: exponent tuple has the wrong length");
      for (int e : m)
        if (e < 0) throw invalid_input("MultiPolyMap: negative exponent");
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw invalid_input("MultiPolyMap: non-finite coefficient");
    }
    c.prune();
  }
}

MultiPolyMap MultiPolyMap::identity(int k) {
  std::vector<MultiPoly> c;
  for (int j = 0; j < k; ++j) c.push_back(MultiPoly::variable(k, j));
  return {k, std::move(c)};
}

int MultiPolyMap::degree() const {
  int d = 0;
  for (const auto& c : components) d = std::max(d, c.degree());
  return d;
}

std::size_t MultiPolyMap::term_count() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.terms.size();
  return n;
}

std::vector<cplx> MultiPolyMap::operator()(const std::vector<cplx>& x) const {
  std::vector<cplx> y;
  for (const auto& c : components) y.push_back(c(x));
  return y;
}

MultiPolyMap compose(const MultiPolyMap& F, const MultiPolyMap& G, std::size_t cap) {
  if (F.dim != G.dim) throw invalid_input("compose: dimension mismatch");
  const int k = F.dim;
  std::vector<std::vector<MultiPoly>> pw(static_cast<std::size_t>(k));
  auto power = [&](int j, int e) -> const MultiPoly& {
    auto& v = pw[static_cast<std::size_t>(j)];
    if (v.empty()) v.push_back(MultiPoly::constant(k, 1.0));
    while (static_cast<int>(v.size()) <= e) v.push_back(multiply(v.back(), G.components[static_cast<std::size_t>(j)], cap));
    return v[static_cast<std::size_t>(e)];
  };
  std::vector<MultiPoly> out;
  for (const auto& comp : F.components) {
    MultiPoly acc(k);
    for (const auto& [m, c] : comp.terms) {
      MultiPoly t = MultiPoly::constant(k, c);
      for (int j = 0; j < k; ++j)
        if (m[static_cast<std::size_t>(j)] > 0) t = multiply(t, power(j, m[static_cast<std::size_t>(j)]), cap);
      acc += t;
      if (acc.terms.size() > cap) throw budget_exceeded("compose: term cap exceeded");
    }
    acc.prune();
    out.push_back(std::move(acc));
  }
  return {k, std::move(out)};
}

double relative_difference(const MultiPolyMap& F, const MultiPolyMap& G) {
  if (F.dim != G.dim) throw invalid_input("relative_difference: dimension mismatch");
  double scale = 1.0, diff = 0.0;
  for (std::size_t j = 0; j < F.components.size(); ++j) {
    scale = std::max({scale, F.components[j].max_coeff(), G.components[j].max_coeff()});
    diff = std::max(diff, (F.components[j] - G.components[j]).max_coeff());
  }
  return diff / scale;
}

DegreeGrowth degree_growth(const MultiPolyMap& F, int n_max, std::size_t cap) {
  if (n_max < 1) throw invalid_input("degree_growth: n_max must be positive");
  DegreeGrowth g;
  MultiPolyMap it = F;
  g.degrees.push_back(it.degree());
  for (int n = 2; n <= n_max; ++n) {
    try {
      it = compose(F, it, cap);
    } catch (const budget_exceeded&) {
      g.truncated = true;
      break;
    }
    g.degrees.push_back(it.degree());
  }
  return g;
}

double fitted_growth_rate(const std::vector<int>& degrees) {
  const std::size_t n = degrees.size();
  if (n < 2) return 1.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i + 1), y = std::log(std::max(1, degrees[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return std::exp((dn * sxy - sx * sy) / (dn * sxx - sx * sx));
}

std::string to_string(FinitenessReport::Verdict v) {
  switch (v) {
    case FinitenessReport::Verdict::locally_finite: return "LocallyFinite";
    case FinitenessReport::Verdict::degree_growth: return "DegreeGrowth";
    case FinitenessReport::Verdict::undetermined: return "Undetermined";
  }
  return "Undetermined";
}

MultiPolyMap relation_map(const MultiPolyMap& F, const std::vector<cplx>& a, bool include_identity, std::size_t cap) {
  const int k = F.dim;
  std::vector<MultiPoly> acc(static_cast<std::size_t>(k), MultiPoly(k));
  MultiPolyMap it = MultiPolyMap::identity(k);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i > 0 || !include_identity) it = compose(F, it, cap);
    for (int j = 0; j < k; ++j) acc[static_cast<std::size_t>(j)] += a[i] * it.components[static_cast<std::size_t>(j)];
  }
  MultiPolyMap r;
  r.dim = k;
  r.components = std::move(acc);
  return r;
}

namespace {

cplx snap(cplx c) {
  auto s = [](double x) {
    const double r = std::round(x);
    return std::abs(x - r) < 1e-9 ? r + 0.0 : x;
  };
  return {s(c.real()), s(c.imag())};
}

// Kernel vector of the column-scaled coefficient matrix, or nullopt at full rank.
std::optional<std::vector<cplx>> kernel_vector(const std::vector<MultiPolyMap>& maps, double rank_tol) {
  std::map<std::pair<std::size_t, Monomial>, Eigen::Index> rows;
  for (const auto& m : maps)
    for (std::size_t j = 0; j < m.components.size(); ++j)
      for (const auto& [e, c] : m.components[j].terms) rows.try_emplace({j, e}, static_cast<Eigen::Index>(rows.size()));
  const auto cols = static_cast<Eigen::Index>(maps.size());
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(std::max<Eigen::Index>(static_cast<Eigen::Index>(rows.size()), cols), cols);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const auto& m = maps[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < m.components.size(); ++j)
      for (const auto& [e, c] : m.components[j].terms) A(rows.at({j, e}), i) = c;
  }
  std::vector<double> scale(static_cast<std::size_t>(cols), 1.0);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const double s = A.col(i).cwiseAbs().maxCoeff();
    if (s > 0.0) {
      A.col(i) /= s;
      scale[static_cast<std::size_t>(i)] = s;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0) return std::vector<cplx>(static_cast<std::size_t>(cols), 1.0);
  if (sv(sv.size() - 1) > rank_tol * sv(0)) return std::nullopt;
  const Eigen::VectorXcd v = svd.matrixV().col(cols - 1);
  std::vector<cplx> a(static_cast<std::size_t>(cols));
  double big = 0.0;
  for (Eigen::Index i = 0; i < cols; ++i) {
    a[static_cast<std::size_t>(i)] = v(i) / scale[static_cast<std::size_t>(i)];
    big = std::max(big, std::abs(a[static_cast<std::size_t>(i)]));
  }
  for (const auto& x : a)
    if (std::abs(x) > 1e-6 * big) {
      const cplx lead = x;
      for (auto& y : a) y /= lead;
      break;
    }
  return a;
}

}  // namespace

FinitenessReport locally_finite_relation(const MultiPolyMap& F, int D_max, const FinitenessOptions& opt) {
  if (D_max < 1) throw invalid_input("locally_finite_relation: D_max must be positive");
  FinitenessReport rep;
  rep.includes_identity = opt.include_identity;
  // Four consecutive iterates each growing by a factor >= 1.5 end the search.
  MultiPolyMap it = F;
  std::vector<MultiPolyMap> iterates{F};
  rep.degrees.push_back(F.degree());
  auto geometric = [&] {
    const std::size_t n = rep.degrees.size();
    if (n < 4) return false;
    for (std::size_t i = n - 3; i < n; ++i)
      if (rep.degrees[i] < 1.5 * rep.degrees[i - 1]) return false;
    return true;
  };
  while (static_cast<int>(rep.degrees.size()) < D_max && !geometric()) {
    try {
      it = compose(F, it, opt.cap);
    } catch (const budget_exceeded&) {
      break;
    }
    iterates.push_back(it);
    rep.degrees.push_back(it.degree());
  }
  rep.rate = fitted_growth_rate(rep.degrees);
  if (geometric()) {
    rep.verdict = FinitenessReport::Verdict::degree_growth;
    rep.note = "degrees grow geometrically over the tested range";
    return rep;
  }

  std::vector<MultiPolyMap> maps;
  if (opt.include_identity) maps.push_back(MultiPolyMap::identity(F.dim));
  bool unverified = false;
  for (const auto& m : iterates) {
    maps.push_back(m);
    const auto a = kernel_vector(maps, opt.rank_tol);
    if (!a) continue;
    std::vector<cplx> snapped;
    for (const auto& x : *a) snapped.push_back(snap(x));
    for (const std::vector<cplx>* cand : std::array<const std::vector<cplx>*, 2>{&snapped, &*a}) {
      const auto R = relation_map(F, *cand, opt.include_identity, opt.cap);
      double scale = 1.0;
      for (std::size_t i = 0; i < maps.size(); ++i)
        for (const auto& c : maps[i].components) scale = std::max(scale, std::abs((*cand)[i]) * c.max_coeff());
      double res = 0.0;
      for (const auto& c : R.components) res = std::max(res, c.max_coeff());
      res /= scale;
      if (res <= opt.verify_tol) {
        rep.verdict = FinitenessReport::Verdict::locally_finite;
        rep.relation = *cand;
        rep.residual = res;
        return rep;
      }
    }
    unverified = true;
  }
  rep.verdict = FinitenessReport::Verdict::undetermined;
  rep.note = unverified ? "numerical kernel found but the relation failed symbolic verification"
                        : "no relation up to the tested order";
  return rep;
}

std::string to_string(C2Class c) {
  switch (c) {
    case C2Class::affine: return "Affine";
    case C2Class::elementary_like: return "ElementaryLike";
    case C2Class::henon_like: return "HenonLike";
    case C2Class::undetermined: return "Undetermined";
  }
  return "Undetermined";
}

C2Report classify_c2(const MultiPolyMap& F, const std::optional<MultiPolyMap>& inverse, const ClassifyOptions& opt) {
  if (F.dim != 2) throw invalid_input("classify_c2: map must act on C^2");
  if (opt.n_max < 2) throw invalid_input("classify_c2: n_max must be at least 2");
  C2Report rep;
  rep.growth = degree_growth(F, opt.n_max, opt.cap);
  const auto& d = rep.growth.degrees;
  rep.rate = fitted_growth_rate(d);
  if (F.degree() <= 1) {
    rep.cls = C2Class::affine;
    rep.global_average = true;
    rep.note = "affine maps are locally finite";
    return rep;
  }
  const std::size_t n = d.size();
  if (!rep.growth.truncated && static_cast<int>(n) == opt.n_max) {
    const std::size_t h = n / 2;
    const int early = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(h));
    const int late = *std::max_element(d.begin() + static_cast<std::ptrdiff_t>(h), d.end());
    if (late <= early) {
      rep.cls = C2Class::elementary_like;
      rep.global_average = true;
      rep.note = "bounded degrees: locally finite, a global time average exists";
      return rep;
    }
  }
  bool increasing = n >= 3;
  for (std::size_t i = 1; i < n; ++i) increasing = increasing && d[i] > d[i - 1];
  if (increasing && rep.rate >= 1.5) {
    rep.cls = C2Class::henon_like;
    rep.global_average = false;
    rep.note = "exponential degree growth: no global time average";
    if (inverse) {
      try {
        rep.witnesses = henon_escape_witnesses(F, *inverse, opt.witness);
      } catch (const budget_exceeded& e) {
        rep.note += std::string("; witness search failed: ") + e.what();
      }
    }
    return rep;
  }
  rep.cls = C2Class::undetermined;
  rep.note = "irregular degree growth within the budget";
  return rep;
}

namespace {

double sup_norm(const std::vector<cplx>& x) {
  double m = 0.0;
  for (const auto& v : x) m = std::max(m, std::abs(v));
  return m;
}

// Orbit norms until the escape norm is passed or the step budget runs out.
std::vector<double> orbit_norms(const MultiPolyMap& F, std::vector<cplx> x, int steps, double stop) {
  std::vector<double> norms{sup_norm(x)};
  for (int s = 0; s < steps && norms.back() < stop; ++s) {
    x = F(x);
    const double n = sup_norm(x);
    if (!std::isfinite(n)) break;
    norms.push_back(n);
  }
  return norms;
}

// Min ratio over the escape phase (points beyond `from`), 0 if it never escapes.
double escape_rate(const std::vector<double>& norms, double from, double stop) {
  if (norms.back() < stop) return 0.0;
  double r = INFINITY;
  int count = 0;
  for (std::size_t i = 1; i < norms.size(); ++i)
    if (norms[i - 1] > from) {
      r = std::min(r, norms[i] / norms[i - 1]);
      ++count;
    }
  return count >= 3 ? r : 0.0;
}

MultiPoly partial(const MultiPoly& p, int j) {
  MultiPoly r(p.vars);
  for (const auto& [m, c] : p.terms) {
    const int e = m[static_cast<std::size_t>(j)];
    if (e == 0) continue;
    Monomial q = m;
    q[static_cast<std::size_t>(j)] = e - 1;
    r.terms[q] += static_cast<double>(e) * c;
  }
  return r;
}

// Newton's method for F(x) = x in C^2.
std::optional<std::vector<cplx>> fixed_point(const MultiPolyMap& F, std::vector<cplx> x) {
  MultiPoly J[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) J[i][j] = partial(F.components[static_cast<std::size_t>(i)], j);
  for (int it = 0; it < 100; ++it) {
    const auto y = F(x);
    const cplx g0 = y[0] - x[0], g1 = y[1] - x[1];
    const cplx a = J[0][0](x) - 1.0, b = J[0][1](x), c = J[1][0](x), d = J[1][1](x) - 1.0;
    const cplx det = a * d - b * c;
    if (det == cplx{} || !std::isfinite(std::abs(det))) return std::nullopt;
    const cplx dx0 = (d * g0 - b * g1) / det, dx1 = (a * g1 - c * g0) / det;
    x[0] -= dx0;
    x[1] -= dx1;
    if (!std::isfinite(std::abs(x[0])) || !std::isfinite(std::abs(x[1]))) return std::nullopt;
    if (std::abs(dx0) + std::abs(dx1) < 1e-14 * (1.0 + std::abs(x[0]) + std::abs(x[1]))) return x;
  }
  return std::nullopt;
}

bool stays_bounded(const MultiPolyMap& F, std::vector<cplx> x, int steps, double bound) {
  for (int s = 0; s < steps; ++s) {
    if (!(sup_norm(x) <= bound)) return false;
    x = F(x);
  }
  return sup_norm(x) <= bound;
}

}  // namespace

HenonWitnesses henon_escape_witnesses(const MultiPolyMap& F, const MultiPolyMap& inverse, const WitnessOptions& opt) {
  if (F.dim != 2 || inverse.dim != 2) throw invalid_input("henon_escape_witnesses: maps must act on C^2");
  if (F.degree() < 2) throw invalid_input("henon_escape_witnesses: map is affine");
  if (relative_difference(compose(F, inverse), MultiPolyMap::identity(2)) > 1e-9 ||
      relative_difference(compose(inverse, F), MultiPolyMap::identity(2)) > 1e-9)
    throw invalid_input("henon_escape_witnesses: the supplied inverse does not invert the map");
  const auto growth = degree_growth(F, 3, 20000);
  for (std::size_t i = 1; i < growth.degrees.size(); ++i)
    if (growth.degrees[i] <= growth.degrees[i - 1]) throw invalid_input("henon_escape_witnesses: map is not HenonLike");

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  HenonWitnesses w;

  bool found = false;
  for (int s = 0; s < opt.samples && !found; ++s) {
    const double scale = 3.0 * (1.0 + s / 20);
    const std::vector<cplx> x = s == 0 ? std::vector<cplx>{3.0, 0.0} : std::vector<cplx>{scale * u(rng), scale * u(rng)};
    const auto norms = orbit_norms(F, x, opt.max_steps, opt.escape_norm);
    const double r = escape_rate(norms, 0.0, opt.escape_norm);
    if (r > 1.0) {
      w.forward = {x, norms, r};
      found = true;
    }
  }
  if (!found) throw budget_exceeded("henon_escape_witnesses: no forward-escaping sample");

  // Points with bounded forward orbit, then bisection toward escaping points
  // to land near the boundary of the bounded set. The landing point must
  // leave its seed, and its backward orbit must clear the bounded ball within
  // half the step budget.
  std::vector<std::vector<cplx>> inside;
  for (int s = 0; s < opt.samples && inside.size() < 8; ++s) {
    std::vector<cplx> x{cplx{2.0 * u(rng), 2.0 * u(rng)}, cplx{2.0 * u(rng), 2.0 * u(rng)}};
    if (s == 0) x = {0.0, 0.0};
    std::optional<std::vector<cplx>> q;
    if (stays_bounded(F, x, 2 * opt.bounded_steps, opt.bounded_norm))
      q = x;
    else if (const auto fp = fixed_point(F, x); fp && stays_bounded(F, *fp, 2 * opt.bounded_steps, opt.bounded_norm))
      q = fp;
    if (!q) continue;
    const bool seen = std::any_of(inside.begin(), inside.end(), [&](const auto& y) {
      return std::abs(y[0] - (*q)[0]) + std::abs(y[1] - (*q)[1]) < 1e-8;
    });
    if (!seen) inside.push_back(*q);
  }
  if (inside.empty()) throw budget_exceeded("henon_escape_witnesses: no sample with bounded forward orbit");
  for (int s = 0; s < opt.samples; ++s) {
    const auto& seed = inside[static_cast<std::size_t>(s) % inside.size()];
    const std::vector<cplx> out =
        s == 0 ? w.forward.start : std::vector<cplx>{cplx{4.0 * u(rng), 4.0 * u(rng)}, cplx{4.0 * u(rng), 4.0 * u(rng)}};
    if (stays_bounded(F, out, 2 * opt.bounded_steps, opt.bounded_norm)) continue;
    std::vector<cplx> lo = seed, hi = out;
    for (int it = 0; it < 200; ++it) {
      const std::vector<cplx> mid{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
      if (mid == lo || mid == hi) break;
      (stays_bounded(F, mid, 2 * opt.bounded_steps, opt.bounded_norm) ? lo : hi) = mid;
    }
    const double moved = std::abs(lo[0] - seed[0]) + std::abs(lo[1] - seed[1]);
    if (moved < 1e-6 * (1.0 + sup_norm(seed))) continue;
    const auto back = orbit_norms(inverse, lo, opt.max_steps, opt.escape_norm);
    const auto clear = std::find_if(back.begin(), back.end(), [&](double n) { return n > opt.bounded_norm; });
    if (clear - back.begin() > opt.max_steps / 2) continue;
    const double r = escape_rate(back, opt.bounded_norm, opt.escape_norm);
    if (r > 1.0) {
      w.backward = {lo, back, r};
      std::vector<cplx> x = lo;
      w.bounded.push_back(sup_norm(x));
      for (int k = 0; k < opt.bounded_steps; ++k) {
        x = F(x);
        w.bounded.push_back(sup_norm(x));
      }
      return w;
    }
  }
  throw budget_exceeded("henon_escape_witnesses: no point with bounded forward and escaping backward orbit");
}

MultiPolyMap henon_map(const ComplexPoly& p, cplx delta) {
  if (delta == cplx{}) throw invalid_input("henon_map: delta must be nonzero");
  MultiPoly a = delta * MultiPoly::variable(2, 1);
  for (int i = 0; i <= p.degree(); ++i)
    if (p[static_cast<std::size_t>(i)] != cplx{}) {
      MultiPoly t(2);
      t.terms[{i, 0}] = p[static_cast<std::size_t>(i)];
      a += t;
    }
  return {2, {a, MultiPoly::variable(2, 0)}};
}

MultiPolyMap henon_inverse(const ComplexPoly& p, cplx delta) {
  if (delta == cplx{}) throw invalid_input("henon_inverse: delta must be nonzero");
  MultiPoly b = (1.0 / delta) * MultiPoly::variable(2, 0);
  for (int i = 0; i <= p.degree(); ++i)
    if (p[static_cast<std::size_t>(i)] != cplx{}) {
      MultiPoly t(2);
      t.terms[{0, i}] = -p[static_cast<std::size_t>(i)] / delta;
      b += t;
    }
  return {2, {MultiPoly::variable(2, 1), b}};
}

}  // namespace tavg
