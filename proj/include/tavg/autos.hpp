#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tavg/poly.hpp"

namespace tavg {

using Monomial = std::vector<int>;

// Sparse polynomial in `vars` variables: exponent tuple -> coefficient.
struct MultiPoly {
  int vars = 0;
  std::map<Monomial, cplx> terms;

  MultiPoly() = default;
  explicit MultiPoly(int nvars) : vars(nvars) {}

  static MultiPoly constant(int nvars, cplx c);
  static MultiPoly variable(int nvars, int j);

  int degree() const;  // total degree, 0 for the zero polynomial
  bool is_zero() const { return terms.empty(); }
  double max_coeff() const;
  cplx operator()(const std::vector<cplx>& x) const;
  // Drops coefficients with |c| <= tol.
  void prune(double tol = 1e-13);

  MultiPoly& operator+=(const MultiPoly& o);
  MultiPoly& operator*=(cplx s);

  friend bool operator==(const MultiPoly&, const MultiPoly&) = default;
};

MultiPoly operator+(MultiPoly a, const MultiPoly& b);
MultiPoly operator-(MultiPoly a, const MultiPoly& b);
MultiPoly operator*(cplx s, MultiPoly a);
// Throws budget_exceeded when the product would exceed `cap` terms.
MultiPoly multiply(const MultiPoly& a, const MultiPoly& b, std::size_t cap = 200000);

// Polynomial map C^k -> C^k.
struct MultiPolyMap {
  int dim = 0;
  std::vector<MultiPoly> components;

  MultiPolyMap() = default;
  MultiPolyMap(int k, std::vector<MultiPoly> comps);

  static MultiPolyMap identity(int k);

  int degree() const;  // algebraic degree: max component degree
  std::size_t term_count() const;
  std::vector<cplx> operator()(const std::vector<cplx>& x) const;

  friend bool operator==(const MultiPolyMap&, const MultiPolyMap&) = default;
};

// F o G, i.e. x -> F(G(x)). Throws budget_exceeded past `cap` terms per component.
MultiPolyMap compose(const MultiPolyMap& F, const MultiPolyMap& G, std::size_t cap = 200000);

// Largest coefficient of F - G relative to max(1, largest coefficient of F, G).
double relative_difference(const MultiPolyMap& F, const MultiPolyMap& G);

struct DegreeGrowth {
  std::vector<int> degrees;  // deg F^1 .. deg F^n
  bool truncated = false;    // stopped early at the term cap
};

DegreeGrowth degree_growth(const MultiPolyMap& F, int n_max, std::size_t cap = 200000);

// exp of the least-squares slope of log(deg F^n) against n.
double fitted_growth_rate(const std::vector<int>& degrees);

struct FinitenessOptions {
  bool include_identity = false;  // let f^0 join the relation
  double rank_tol = 1e-8;         // relative to the largest singular value
  double verify_tol = 1e-9;       // relative coefficient residual of the recomposed relation
  std::size_t cap = 200000;
};

struct FinitenessReport {
  enum class Verdict { locally_finite, degree_growth, undetermined };
  Verdict verdict = Verdict::undetermined;
  std::vector<int> degrees;
  std::vector<cplx> relation;  // coefficients of f^1..f^D (f^0..f^D with include_identity)
  bool includes_identity = false;
  double residual = 0.0;       // relative residual of the symbolic check
  double rate = 1.0;           // fitted growth rate of the degrees
  std::string note;
};

std::string to_string(FinitenessReport::Verdict v);

// Smallest D <= D_max for which the coefficient vectors of f^1..f^D have a
// kernel vector that survives exact recomposition.
FinitenessReport locally_finite_relation(const MultiPolyMap& F, int D_max, const FinitenessOptions& opt = {});

// Evaluates sum a_i F^i symbolically (a_0 multiplies the identity when
// include_identity is set).
MultiPolyMap relation_map(const MultiPolyMap& F, const std::vector<cplx>& a, bool include_identity,
                          std::size_t cap = 200000);

enum class C2Class { affine, elementary_like, henon_like, undetermined };
std::string to_string(C2Class c);

struct EscapeOrbit {
  std::vector<cplx> start;
  std::vector<double> norms;  // sup norms of the orbit points, starting point first
  double rate = 0.0;          // min ratio of consecutive norms
};

struct HenonWitnesses {
  EscapeOrbit forward;          // forward orbit escaping geometrically
  EscapeOrbit backward;         // backward orbit of w escaping geometrically
  std::vector<double> bounded;  // forward norms of w
};

struct C2Report {
  C2Class cls = C2Class::undetermined;
  DegreeGrowth growth;
  double rate = 1.0;
  std::optional<bool> global_average;  // conclusion paired with the class
  std::optional<HenonWitnesses> witnesses;
  std::string note;
};

struct WitnessOptions {
  int max_steps = 60;         // forward/backward escape budget
  int bounded_steps = 30;     // reported bounded steps; the search demands twice as many
  double escape_norm = 1e100; // stop once an orbit passes this norm
  double bounded_norm = 100.0;
  int samples = 400;
  std::uint64_t seed = 1;
};

struct ClassifyOptions {
  int n_max = 8;
  std::size_t cap = 20000;
  WitnessOptions witness{};
};

// Degree 1 -> Affine; no new degree growth in the second half of n <= n_max
// -> ElementaryLike; strictly growing degrees at geometric rate >= 1.5 ->
// HenonLike. Witnesses are attached for HenonLike maps when an inverse is
// supplied.
C2Report classify_c2(const MultiPolyMap& F, const std::optional<MultiPolyMap>& inverse = std::nullopt,
                     const ClassifyOptions& opt = {});

// Forward-escaping point, and a point with bounded forward orbit whose
// backward orbit escapes. Throws invalid_input unless F is a degree >= 2
// map of C^2 with the given inverse, budget_exceeded when the search fails.
HenonWitnesses henon_escape_witnesses(const MultiPolyMap& F, const MultiPolyMap& inverse, const WitnessOptions& opt = {});

// (z, w) -> (delta w + p(z), z) and its inverse (z, w) -> (w, (z - p(w)) / delta).
MultiPolyMap henon_map(const ComplexPoly& p, cplx delta = 1.0);
MultiPolyMap henon_inverse(const ComplexPoly& p, cplx delta = 1.0);

}  // namespace tavg
