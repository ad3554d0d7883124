#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tavg/exec.hpp"
#include "tavg/poly.hpp"

namespace tavg {

// R >= 1 with |z| > R  =>  |f(z)| >= 2|z|. Requires degree >= 2.
double escape_radius(const ComplexPoly& f);

struct GreensEstimate {
  double value = 0.0;
  int iterations_used = 0;
  double error_bound = 0.0;
};

// G(z) = lim d^-n log+|f^n(z)|. The orbit is followed until the tail
// correction log|w| + log|a_d|/(d-1) is within tol; 0 if it never escapes
// within max_iter.
GreensEstimate green_value(const ComplexPoly& f, cplx z, double tol = 1e-12, int max_iter = 10000);

// Batch kernel; out.size() must equal zs.size().
void green_values(const ComplexPoly& f, std::span<const cplx> zs, std::span<GreensEstimate> out,
                  double tol = 1e-12, int max_iter = 10000, exec_policy policy = exec_policy::parallel);

enum class CycleClass { superattracting, attracting, parabolic, rotation, repelling };

std::string to_string(CycleClass c);

struct CycleInfo {
  int period = 0;
  std::vector<cplx> points;
  cplx multiplier{};
  CycleClass cls = CycleClass::repelling;
};

// Thresholds: |l| < 1e-8 super, |l| < 1 - 1e-6 attracting, |l| > 1 + 1e-6
// repelling; on the unit circle, parabolic when l^q = 1 within 1e-6 for
// some q <= 64, rotation otherwise.
CycleClass classify_multiplier(cplx multiplier);

// All cycles of period <= max_period from the roots of f^m(z) - z,
// deduplicated up to rotation of the cycle.
std::vector<CycleInfo> find_cycles(const ComplexPoly& f, int max_period, std::size_t degree_cap = 4096);

struct Box {
  cplx lo;  // lower-left corner
  cplx hi;  // upper-right corner
};

// Square box [-R, R]^2 with R the escape radius; contains the filled Julia set.
Box default_box(const ComplexPoly& f);

struct ChartOptions {
  int max_iter = 1000;
  int cycle_max_period = 6;
  int orbit_iters = 4000;
  exec_policy policy = exec_policy::parallel;
};

// Pixel grid over a box. Non-escaping pixels are grouped into 4-connected
// components; pixels whose orbits settle on different attracting cycle
// points (or the same cycle at a different phase) are never joined, which
// keeps touching Fatou components apart at pinch points.
struct ComponentChart {
  struct Component {
    int id = -1;
    cplx sample{};                 // pixel center deepest inside the component
    int limit_cycle = -1;          // index into cycles, -1 if undetected
    std::size_t pixel_count = 0;
    int signature = -1;            // attracting cycle/phase tag, -1 if none
  };

  Box box{};
  int width = 0;
  int height = 0;
  int max_iter = 0;
  std::vector<int> escape_time;      // per pixel, -1 when bounded
  std::vector<int> label;            // per pixel component id, -1 when escaping
  std::vector<int> escape_distance;  // 4-neighbour pixel distance to nearest escaping pixel
  std::vector<Component> components;
  std::vector<CycleInfo> cycles;

  double pixel_size() const;
  cplx center(int ix, int iy) const;
  std::optional<std::pair<int, int>> pixel_of(cplx z) const;
  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * static_cast<std::size_t>(width) + static_cast<std::size_t>(ix); }
  // Component id at z, -1 if escaping or outside the box.
  int component_at(cplx z) const;
  // Pixel distance from z's pixel to the nearest escaping pixel (0 if escaping).
  int escape_distance_at(cplx z) const;
};

// Escape-time kernel used by the chart: iterations until |f^n(z)| > radius,
// -1 if still bounded after max_iter.
void escape_times(const ComplexPoly& f, std::span<const cplx> zs, std::span<int> out, double radius, int max_iter,
                  exec_policy policy);

// Box must contain the filled Julia set (all four corners must escape).
ComponentChart component_chart(const ComplexPoly& f, const Box& box, int resolution, const ChartOptions& opt = {});

struct PointClass {
  enum class Kind { escaping, bounded, near_julia };
  Kind kind = Kind::near_julia;
  double green = 0.0;
  int component = -1;
};

std::string to_string(PointClass::Kind k);

// Escaping iff G > 0; Bounded when the pixel and its 8 neighbours share one
// component label; NearJulia otherwise.
PointClass classify_point(const ComplexPoly& f, cplx z, const ComponentChart& chart);

}  // namespace tavg
