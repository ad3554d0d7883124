#include "tavg/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "tavg/errors.hpp"

namespace tavg {

namespace {

constexpr double normalize_threshold = 1e-12;

void strip_trailing(std::vector<cplx>& c) {
  if (c.empty()) {
    c.push_back(0.0);
    return;
  }
  double big = 0.0;
  for (const auto& a : c) big = std::max(big, std::abs(a));
  const double cut = normalize_threshold * big;
  while (c.size() > 1 && std::abs(c.back()) <= cut) c.pop_back();
  if (c.size() == 1 && std::abs(c[0]) <= cut) c[0] = 0.0;
}

}  // namespace

ComplexPoly::ComplexPoly(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
  strip_trailing(coeffs_);
}

ComplexPoly ComplexPoly::from_roots(std::span<const cplx> rts, cplx leading) {
  std::vector<cplx> c{leading};
  for (const auto& r : rts) {
    std::vector<cplx> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  return ComplexPoly(std::move(c));
}

cplx ComplexPoly::operator()(cplx z) const {
  cplx acc = coeffs_.back();
  for (std::size_t i = coeffs_.size() - 1; i-- > 0;) acc = acc * z + coeffs_[i];
  return acc;
}

void ComplexPoly::eval_with_derivative(cplx z, cplx& value, cplx& deriv) const {
  cplx p = coeffs_.back();
  cplx dp = 0.0;
  for (std::size_t i = coeffs_.size() - 1; i-- > 0;) {
    dp = dp * z + p;
    p = p * z + coeffs_[i];
  }
  value = p;
  deriv = dp;
}

ComplexPoly ComplexPoly::derivative() const {
  if (coeffs_.size() == 1) return ComplexPoly();
  std::vector<cplx> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<double>(i);
  return ComplexPoly(std::move(d));
}

ComplexPoly ComplexPoly::compose(const ComplexPoly& inner) const {
  if (inner.degree() == 0) return constant((*this)(inner[0]));
  ComplexPoly acc = constant(coeffs_.back());
  for (std::size_t i = coeffs_.size() - 1; i-- > 0;) {
    acc = acc * inner;
    acc.coeffs_[0] += coeffs_[i];
  }
  return acc;
}

double ComplexPoly::magnitude_at(cplx z) const {
  const double r = std::abs(z);
  double acc = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * r + std::abs(coeffs_[i]);
  return acc;
}

ComplexPoly operator+(const ComplexPoly& a, const ComplexPoly& b) {
  std::vector<cplx> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
  return ComplexPoly(std::move(c));
}

ComplexPoly operator-(const ComplexPoly& a, const ComplexPoly& b) { return a + cplx{-1.0} * b; }

ComplexPoly operator*(const ComplexPoly& a, const ComplexPoly& b) {
  std::vector<cplx> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    if (a.coeffs_[i] == cplx{}) continue;
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  }
  if (a.is_zero() || b.is_zero()) return ComplexPoly();
  return ComplexPoly(std::move(c), ComplexPoly::exact_tag{});
}

ComplexPoly operator*(cplx s, const ComplexPoly& a) {
  std::vector<cplx> c = a.coeffs_;
  for (auto& x : c) x *= s;
  return ComplexPoly(std::move(c));
}

cplx eval(const ComplexPoly& f, cplx z) { return f(z); }

void eval_iterate(const ComplexPoly& f, int n, cplx z, cplx& value, cplx& deriv) {
  cplx w = z;
  cplx dw = 1.0;
  for (int k = 0; k < n; ++k) {
    cplx v, dv;
    f.eval_with_derivative(w, v, dv);
    dw *= dv;
    w = v;
  }
  value = w;
  deriv = dw;
}

cplx eval_iterate(const ComplexPoly& f, int n, cplx z) {
  for (int k = 0; k < n; ++k) z = f(z);
  return z;
}

ComplexPoly iterate(const ComplexPoly& f, int n, std::size_t degree_cap) {
  if (n < 0) throw invalid_input("iterate: negative iteration count");
  const auto d = static_cast<std::size_t>(std::max(f.degree(), 1));
  std::size_t total = 1;
  for (int k = 0; k < n; ++k) {
    if (total > degree_cap / d) throw budget_exceeded("iterate: degree cap exceeded");
    total *= d;
  }
  ComplexPoly acc = ComplexPoly::identity();
  for (int k = 0; k < n; ++k) acc = f.compose(acc);
  return acc;
}

std::vector<cplx> roots(const ComplexPoly& f, const RootOptions& opt) {
  const int deg = f.degree();
  if (deg < 1) throw invalid_input("roots: polynomial must have degree >= 1");

  std::vector<cplx> c(f.coeffs().begin(), f.coeffs().end());
  const cplx lead = c.back();
  for (auto& a : c) a /= lead;

  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(deg));
  // Exact zero roots are peeled off so that z^k factors come back exact.
  std::size_t shift = 0;
  while (shift + 1 < c.size() && c[shift] == cplx{}) ++shift;
  out.assign(shift, cplx{0.0});
  c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(shift));
  const ComplexPoly g(c);
  const int n = g.degree();
  if (n == 0) return out;
  if (n == 1) {
    out.push_back(-c[0]);
    return out;
  }

  // Sharp Cauchy bound: the positive root of x^n = sum |c_i| x^i.
  double crude = 0.0;
  for (int i = 0; i < n; ++i) crude = std::max(crude, std::abs(c[static_cast<std::size_t>(i)]));
  double lo = 0.0, hi = crude + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double x = 0.5 * (lo + hi);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::abs(c[static_cast<std::size_t>(i)]) * std::pow(x, i - n);
    (s > 1.0 ? lo : hi) = x;
  }
  const double cauchy = hi;

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::vector<cplx> z(static_cast<std::size_t>(n));
  const double step = 2.0 * std::numbers::pi / n;
  for (int k = 0; k < n; ++k) {
    const double ang = step * (k + 0.25 + jitter(rng));
    z[static_cast<std::size_t>(k)] = std::polar(cauchy * (1.0 + 0.05 * jitter(rng)), ang);
  }

  std::vector<char> done(static_cast<std::size_t>(n), 0);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < opt.max_iter; ++it) {
    bool all = true;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (done[k]) continue;
      cplx p, dp;
      g.eval_with_derivative(z[k], p, dp);
      if (std::abs(p) <= 4.0 * eps * g.magnitude_at(z[k])) {
        done[k] = 1;
        continue;
      }
      const cplx ratio = p / dp;
      cplx s = 0.0;
      for (std::size_t j = 0; j < z.size(); ++j)
        if (j != k) s += 1.0 / (z[k] - z[j]);
      const cplx w = ratio / (1.0 - ratio * s);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
        z[k] += cplx{1e-8, 1e-8} * (1.0 + std::abs(z[k]));
        all = false;
        continue;
      }
      z[k] -= w;
      if (std::abs(w) <= opt.tol * (1.0 + std::abs(z[k])))
        done[k] = 1;
      else
        all = false;
    }
    if (all) break;
  }

  for (auto& r : z) {
    for (int it = 0; it < 3; ++it) {
      cplx p, dp;
      g.eval_with_derivative(r, p, dp);
      if (dp == cplx{}) break;
      const cplx cand = r - p / dp;
      if (std::abs(g(cand)) < std::abs(p))
        r = cand;
      else
        break;
    }
    const double res = std::abs(g(r));
    const double scale = g.magnitude_at(r);
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag()) || !(res <= 1e-9 * scale))
      throw numerical_failure("roots: residual " + std::to_string(res) + " above tolerance");
    out.push_back(r);
  }
  return out;
}

bool same_critical_value(cplx a, cplx b) {
  return std::abs(a - b) <= 1e-8 * (1.0 + std::max(std::abs(a), std::abs(b)));
}

CriticalData critical_data(const ComplexPoly& f, int n, const RootOptions& opt) {
  const int d = f.degree();
  if (d < 2) throw invalid_input("critical_data: degree must be >= 2");
  if (n < 1) throw invalid_input("critical_data: level must be >= 1");
  CriticalData out;
  out.level = n;
  out.critical_points = roots(f.derivative(), opt);
  for (const auto& c : out.critical_points) {
    cplx x = c;
    for (int k = 1; k <= n; ++k) {
      x = f(x);
      auto it = std::find_if(out.critical_values.begin(), out.critical_values.end(),
                             [&](cplx v) { return same_critical_value(v, x); });
      if (it == out.critical_values.end()) {
        out.critical_values.push_back(x);
        out.multiplicity.push_back(1);
        out.first_level.push_back(k);
      } else {
        const auto idx = static_cast<std::size_t>(it - out.critical_values.begin());
        ++out.multiplicity[idx];
        out.first_level[idx] = std::min(out.first_level[idx], k);
      }
    }
  }
  out.max_cardinality = static_cast<int>(out.critical_values.size()) == n * (d - 1);
  return out;
}

double min_separation(std::span<const cplx> pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, std::abs(pts[i] - pts[j]));
  return best;
}

namespace {

// Newton on f^level(w) = p, keeping a step only when it lowers the residual.
cplx polish_on_iterate(const ComplexPoly& f, int level, cplx p, cplx w) {
  for (int it = 0; it < 3; ++it) {
    cplx v, dv;
    eval_iterate(f, level, w, v, dv);
    if (dv == cplx{}) break;
    const cplx cand = w - (v - p) / dv;
    if (std::abs(eval_iterate(f, level, cand) - p) < std::abs(v - p))
      w = cand;
    else
      break;
  }
  return w;
}

}  // namespace

std::vector<Fiber> fiber_levels(const ComplexPoly& f, cplx p, int N, const FiberOptions& opt) {
  if (N < 1) throw invalid_input("fiber: level must be >= 1");
  const int d = f.degree();
  if (d < 1) throw invalid_input("fiber: constant polynomial");
  const double tol_abs = opt.residual_tol * std::max(1.0, std::abs(p));

  std::vector<Fiber> levels;
  std::vector<cplx> parents{p};
  for (int k = 1; k <= N; ++k) {
    const auto np = static_cast<std::ptrdiff_t>(parents.size());
    std::vector<cplx> pts(parents.size() * static_cast<std::size_t>(d));
    bool failed = false;
    auto solve_one = [&](std::ptrdiff_t j) {
      std::vector<cplx> c = f.coeffs();
      c[0] -= parents[static_cast<std::size_t>(j)];
      const auto rts = roots(ComplexPoly(std::move(c)), opt.roots);
      for (int r = 0; r < d; ++r) {
        const auto idx = static_cast<std::size_t>(j) * static_cast<std::size_t>(d) + static_cast<std::size_t>(r);
        pts[idx] = polish_on_iterate(f, k, p, rts[static_cast<std::size_t>(r)]);
      }
    };
    if (opt.policy == exec_policy::parallel) {
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t j = 0; j < np; ++j) {
        try {
          solve_one(j);
        } catch (const numerical_failure&) {
#pragma omp atomic write
          failed = true;
        }
      }
    } else {
      for (std::ptrdiff_t j = 0; j < np; ++j) {
        try {
          solve_one(j);
        } catch (const numerical_failure&) {
          failed = true;
        }
      }
    }
    if (failed) throw numerical_failure("fiber: root solver failed at level " + std::to_string(k));

    Fiber fb;
    fb.level = k;
    fb.base = p;
    fb.points = std::move(pts);
    fb.residual_tol = tol_abs;
    for (const auto& w : fb.points) fb.max_residual = std::max(fb.max_residual, std::abs(eval_iterate(f, k, w) - p));
    fb.separation = fb.points.size() > 1 ? min_separation(fb.points) : std::numeric_limits<double>::infinity();
    fb.simple = fb.separation > 10.0 * tol_abs;
    if (fb.simple && d >= 2) {
      const auto cd = critical_data(f, k, opt.roots);
      for (const auto& v : cd.critical_values)
        if (same_critical_value(v, p)) fb.simple = false;
    }
    if (fb.max_residual > tol_abs)
      throw numerical_failure("fiber: residual " + std::to_string(fb.max_residual) + " above tolerance");
    if (!fb.simple && !opt.allow_non_simple)
      throw non_simple_fiber("fiber: base point is (numerically) a critical value of f^" + std::to_string(k));
    parents = fb.points;
    levels.push_back(std::move(fb));
  }
  return levels;
}

Fiber fiber(const ComplexPoly& f, cplx p, int N, const FiberOptions& opt) {
  auto lv = fiber_levels(f, p, N, opt);
  return std::move(lv.back());
}

}  // namespace tavg
