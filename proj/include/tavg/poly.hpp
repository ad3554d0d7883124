#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tavg/exec.hpp"

namespace tavg {

using cplx = std::complex<double>;

// One-variable polynomial with complex coefficients, ascending degree order.
// Trailing coefficients below 1e-12 * max|coeff| are stripped on construction,
// so the leading coefficient is always nonzero (except for the zero polynomial,
// which is stored as the single coefficient 0).
class ComplexPoly {
public:
  ComplexPoly() : coeffs_{cplx{0.0}} {}
  explicit ComplexPoly(std::vector<cplx> coeffs);

  static ComplexPoly identity() { return ComplexPoly({0.0, 1.0}); }
  static ComplexPoly constant(cplx c) { return ComplexPoly({c}); }
  static ComplexPoly from_roots(std::span<const cplx> roots, cplx leading = 1.0);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  cplx leading() const { return coeffs_.back(); }
  cplx operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : cplx{}; }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == cplx{}; }

  cplx operator()(cplx z) const;
  // Value and first derivative in one Horner pass.
  void eval_with_derivative(cplx z, cplx& value, cplx& deriv) const;

  ComplexPoly derivative() const;
  // this(inner(z)).
  ComplexPoly compose(const ComplexPoly& inner) const;

  // Sum of |a_i| |z|^i, the natural scale for residuals at z.
  double magnitude_at(cplx z) const;

  friend ComplexPoly operator+(const ComplexPoly& a, const ComplexPoly& b);
  friend ComplexPoly operator-(const ComplexPoly& a, const ComplexPoly& b);
  friend ComplexPoly operator*(const ComplexPoly& a, const ComplexPoly& b);
  friend ComplexPoly operator*(cplx s, const ComplexPoly& a);

private:
  struct exact_tag {};
  // Degree is known exactly (products, compositions); no stripping.
  ComplexPoly(std::vector<cplx> coeffs, exact_tag) : coeffs_(std::move(coeffs)) {}

  std::vector<cplx> coeffs_;
};

cplx eval(const ComplexPoly& f, cplx z);

// f^n(z) and (f^n)'(z) by running the orbit, without expanding f^n.
void eval_iterate(const ComplexPoly& f, int n, cplx z, cplx& value, cplx& deriv);
cplx eval_iterate(const ComplexPoly& f, int n, cplx z);

// Coefficients of f^n; f^0 is the identity. Throws budget_exceeded when
// deg(f)^n > degree_cap.
ComplexPoly iterate(const ComplexPoly& f, int n, std::size_t degree_cap = 1u << 16);

struct RootOptions {
  double tol = 1e-13;
  int max_iter = 500;
  std::uint64_t seed = 0x5eed;
};

// All roots with multiplicity: Aberth-Ehrlich iteration from a perturbed
// circle of Cauchy-bound radius, then Newton polishing. Throws
// numerical_failure if residuals cannot be brought under control.
std::vector<cplx> roots(const ComplexPoly& f, const RootOptions& opt = {});

// Critical data of f^n: critical points of f and the deduplicated critical
// values of f^n, i.e. the union of f^k(Crit f) for 1 <= k <= n.
struct CriticalData {
  int level = 0;
  std::vector<cplx> critical_points;
  std::vector<cplx> critical_values;
  std::vector<int> multiplicity;  // number of (critical point, k) pairs per value
  std::vector<int> first_level;   // smallest k producing the value
  bool max_cardinality = false;   // |values| == n(d-1)
};

// Values closer than 1e-8 * (1 + |v|) are merged.
bool same_critical_value(cplx a, cplx b);

CriticalData critical_data(const ComplexPoly& f, int n, const RootOptions& opt = {});

// Points of f^{-N}(p), laid out as a d-ary tree: level-N point i has its
// image under f at index i / d in the level N-1 fiber.
struct Fiber {
  int level = 0;
  cplx base{};
  std::vector<cplx> points;
  double separation = 0.0;    // min pairwise distance
  double max_residual = 0.0;  // max |f^N(w) - p|
  double residual_tol = 0.0;
  bool simple = false;

  std::size_t parent(std::size_t i, int degree) const { return i / static_cast<std::size_t>(degree); }
};

struct FiberOptions {
  double residual_tol = 1e-9;  // relative to max(1, |p|)
  bool allow_non_simple = false;
  exec_policy policy = exec_policy::parallel;
  RootOptions roots{};
};

// Level-by-level: fibers[k-1] is f^{-k}(p) for k = 1..N.
std::vector<Fiber> fiber_levels(const ComplexPoly& f, cplx p, int N, const FiberOptions& opt = {});

Fiber fiber(const ComplexPoly& f, cplx p, int N, const FiberOptions& opt = {});

double min_separation(std::span<const cplx> pts);

}  // namespace tavg
