#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tavg/dynamics.hpp"
#include "tavg/monodromy.hpp"
#include "tavg/permgroup.hpp"
#include "tavg/poly.hpp"

namespace tavg {

// Concentric rings on a closed disk; ring `rings` is the boundary circle.
struct SampleGrid {
  cplx center{};
  double radius = 0.0;
  int rings = 8;
  int per_ring = 32;

  std::vector<cplx> points() const;
};

struct WeightEntry {
  long long index = 0;
  cplx weight{};
};

// Sparse weights a_n with strictly increasing n. group_end[k] is one past
// the last entry of group k; group 0 is the leading a_N = 1.
struct WeightSequence {
  std::vector<WeightEntry> entries;
  std::vector<std::size_t> group_end;
  SampleGrid region;

  std::size_t groups() const { return group_end.size(); }
};

struct NormTraceEntry {
  long long index = 0;        // last index of the prefix
  double sup_norm = 0.0;      // sup |F| on the samples (limit normalized to 0)
  double centered_norm = 0.0; // sup |F - median|
  cplx median{};              // empirical constant
};

struct NormTrace {
  std::vector<NormTraceEntry> entries;
  SampleGrid grid;
};

struct SiegelOptions {
  long long horizon = 100000;  // scan limit for near-returns
  int chart_resolution = 400;
  int chart_max_iter = 2000;
  int max_preperiod = 64;
};

struct SiegelResult {
  WeightSequence weights;
  NormTrace trace;
  int preperiod = 0;                 // the leading index N
  std::vector<double> targets;       // 2^-k
  std::vector<double> tolerances;    // per-group near-return tolerance
  struct Return {
    long long target = 0;    // index a whose iterate was approximated
    long long selected = 0;  // first later index within tolerance
  };
  std::vector<Return> returns;       // in selection order
};

// Greedy pair-splitting construction: group 1 picks n_1 with
// ||f^N - f^{n_1}|| < 1/2; afterwards every pair c (f^a - f^b) of the
// current error is split by adding (c/2)(f^{b'} - f^{a'}) with a' and b'
// the first new indices returning close to a and b. The sup-norm after
// group k is at most 2^-k by the triangle inequality on the samples.
// Throws invalid_input unless the disk sits in a rotation domain (degree 1
// maps with |a_1| = 1 qualify everywhere) and budget_exceeded when no
// near-return is found within the horizon.
SiegelResult build_siegel_weights(const ComplexPoly& f, cplx center, double radius, int groups,
                                  const SampleGrid& grid_shape = {}, const SiegelOptions& opt = {});

// Norms of the partial sums at every group boundary. Throws
// numerical_failure when a sample orbit leaves the escape radius.
NormTrace evaluate_partial_sums(const ComplexPoly& f, const WeightSequence& w, const SampleGrid& grid);

enum class Verdict { no_time_average, time_average_exists, inconclusive };
enum class Rule { none, global, escaping, julia, monodromy_block, siegel_construction };

std::string to_string(Verdict v);
std::string to_string(Rule r);
Verdict verdict_from_string(const std::string& s);
Rule rule_from_string(const std::string& s);

struct ChainWitness {
  std::vector<int> word;
  std::vector<int> set;
};

struct Certificate {
  Verdict verdict = Verdict::inconclusive;
  Rule rule = Rule::none;
  std::string reason;
  ComplexPoly f;
  cplx point{};
  int N = 0;
  int forced_zero_prefix = 0;  // a_0 = ... = a_{prefix-1} = 0

  // witnesses
  std::optional<cplx> base;
  std::vector<cplx> fiber;
  std::vector<std::vector<int>> generators;
  std::vector<int> S0;
  std::vector<ChainWitness> chain;
  std::vector<int> block;
  bool block_fallback = false;
  std::optional<WeightSequence> weights;
  NormTrace norm_trace;
  double green = 0.0;
  int vandermonde_rank = -1;
  int vandermonde_columns = 0;
  std::string component_class;
  bool enlargement_assumed = false;  // S0 taken from the whole Fatou component

  std::map<std::string, double> tolerances;
  std::map<std::string, double> budgets;
  std::uint64_t seed = 0;
};

struct RefuteOptions {
  int trials = 20;
  std::uint64_t seed = 1;
  double rank_tol = 1e-9;  // relative to the largest singular value
};

// Rank of the monomial matrix [w^j], j <= d^{N-1}, on the level-N fiber of
// a random simple base point. Full column rank d^{N-1}+1 forces any
// polynomial of degree <= d^{N-1} that is constant on the fiber to be
// constant. Throws invalid_input for d < 2, numerical_failure when no simple
// fiber is found in `trials` attempts.
Certificate refute_global(const ComplexPoly& f, int N, const RefuteOptions& opt = {});

// Numerical column rank by SVD after scaling each column to unit max-norm.
int vandermonde_rank(const std::vector<cplx>& pts, int max_power, double rel_tol, std::vector<double>* singular = nullptr);

struct CertifyOptions {
  int chart_resolution = 400;
  int chart_max_iter = 1000;
  int siegel_groups = 5;
  SiegelOptions siegel{};
  std::size_t closure_cap = 100000;
  int guard_pixels = 2;
  std::uint64_t seed = 1;
  double green_tol = 1e-12;
  int green_max_iter = 10000;
};

// Decision tree: escaping point -> NoTimeAverage (Escaping); pixel near the
// Julia set -> Inconclusive; rotation-class limit -> Siegel weights;
// attracting, superattracting or parabolic limit -> monodromy block of the
// fiber points in the component of z. Failures end in Inconclusive.
Certificate certify(const ComplexPoly& f, cplx z, int N, const CertifyOptions& opt = {});

// Recomputes every witness; true when all replay within tolerance.
bool replay(const Certificate& c, const CertifyOptions& opt = {});

}  // namespace tavg
