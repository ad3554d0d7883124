#include "tavg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "tavg/errors.hpp"

namespace tavg {

double escape_radius(const ComplexPoly& f) {
  const int d = f.degree();
  if (d < 2) throw invalid_input("escape_radius: degree must be >= 2");
  double lower = 0.0;
  for (int i = 0; i < d; ++i) lower += std::abs(f[static_cast<std::size_t>(i)]);
  return std::max(1.0, (2.0 + lower) / std::abs(f.leading()));
}

GreensEstimate green_value(const ComplexPoly& f, cplx z, double tol, int max_iter) {
  if (!(tol > 0.0)) throw invalid_input("green_value: tol must be positive");
  const int d = f.degree();
  const double R = escape_radius(f);
  const double lead = std::abs(f.leading());
  double lower = 0.0;
  for (int i = 0; i < d; ++i) lower += std::abs(f[static_cast<std::size_t>(i)]);
  const double B = lower / lead;
  const double log_lead = std::log(lead) / (d - 1);

  cplx w = z;
  double scale = 1.0;
  for (int n = 0; n <= max_iter; ++n) {
    const double r = std::abs(w);
    if (r > R && r >= 2.0 * B) {
      // |G(w) - log|w| - log|a_d|/(d-1)| <= 2B / ((d-1)|w|) once B/|w| <= 1/2.
      const double err = scale * 2.0 * B / (r * (d - 1));
      if (err <= tol || r > 1e100) return {scale * (std::log(r) + log_lead), n, err};
    }
    if (n == max_iter) break;
    w = f(w);
    scale /= d;
  }
  return {0.0, max_iter, 0.0};
}

void green_values(const ComplexPoly& f, std::span<const cplx> zs, std::span<GreensEstimate> out, double tol,
                  int max_iter, exec_policy policy) {
  if (zs.size() != out.size()) throw invalid_input("green_values: size mismatch");
  const auto n = static_cast<std::ptrdiff_t>(zs.size());
  if (policy == exec_policy::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = green_value(f, zs[static_cast<std::size_t>(i)], tol, max_iter);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = green_value(f, zs[static_cast<std::size_t>(i)], tol, max_iter);
  }
}

std::string to_string(CycleClass c) {
  switch (c) {
    case CycleClass::superattracting: return "superattracting";
    case CycleClass::attracting: return "attracting";
    case CycleClass::parabolic: return "parabolic";
    case CycleClass::rotation: return "rotation";
    case CycleClass::repelling: return "repelling";
  }
  return "unknown";
}

CycleClass classify_multiplier(cplx lambda) {
  const double a = std::abs(lambda);
  if (a < 1e-8) return CycleClass::superattracting;
  if (a < 1.0 - 1e-6) return CycleClass::attracting;
  if (a > 1.0 + 1e-6) return CycleClass::repelling;
  const cplx unit = lambda / a;
  cplx pw = 1.0;
  for (int q = 1; q <= 64; ++q) {
    pw *= unit;
    if (std::abs(pw - 1.0) <= 1e-6) return CycleClass::parabolic;
  }
  return CycleClass::rotation;
}

std::vector<CycleInfo> find_cycles(const ComplexPoly& f, int max_period, std::size_t degree_cap) {
  if (f.degree() < 2) throw invalid_input("find_cycles: degree must be >= 2");
  std::vector<CycleInfo> out;
  auto known = [&](cplx z) {
    for (const auto& c : out)
      for (const auto& p : c.points)
        if (std::abs(p - z) <= 1e-7 * (1.0 + std::abs(z))) return true;
    return false;
  };
  for (int m = 1; m <= max_period; ++m) {
    const ComplexPoly g = iterate(f, m, degree_cap) - ComplexPoly::identity();
    for (cplx r : roots(g)) {
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        cplx v, dv;
        eval_iterate(f, m, r, v, dv);
        if (!std::isfinite(std::abs(v)) || !std::isfinite(std::abs(dv))) break;
        if (std::abs(v - r) <= 1e-12 * (1.0 + std::abs(r))) {
          ok = true;
          break;
        }
        if (dv == cplx{1.0}) break;
        r -= (v - r) / (dv - 1.0);
      }
      if (!ok && !(std::abs(eval_iterate(f, m, r) - r) <= 1e-8 * (1.0 + std::abs(r)))) continue;
      bool shorter = false;
      for (int q = 1; q < m && !shorter; ++q)
        if (m % q == 0 && std::abs(eval_iterate(f, q, r) - r) <= 1e-8 * (1.0 + std::abs(r))) shorter = true;
      if (shorter || known(r)) continue;
      CycleInfo c;
      c.period = m;
      cplx w = r;
      cplx lambda = 1.0;
      for (int k = 0; k < m; ++k) {
        c.points.push_back(w);
        cplx v, dv;
        f.eval_with_derivative(w, v, dv);
        lambda *= dv;
        w = v;
      }
      if (!std::isfinite(std::abs(lambda))) continue;
      c.multiplier = lambda;
      c.cls = classify_multiplier(lambda);
      out.push_back(std::move(c));
    }
  }
  return out;
}

Box default_box(const ComplexPoly& f) {
  const double R = escape_radius(f);
  return {{-R, -R}, {R, R}};
}

double ComponentChart::pixel_size() const { return (box.hi.real() - box.lo.real()) / width; }

cplx ComponentChart::center(int ix, int iy) const {
  const double ps = pixel_size();
  return box.lo + cplx{(ix + 0.5) * ps, (iy + 0.5) * ps};
}

std::optional<std::pair<int, int>> ComponentChart::pixel_of(cplx z) const {
  const double ps = pixel_size();
  const double fx = (z.real() - box.lo.real()) / ps;
  const double fy = (z.imag() - box.lo.imag()) / ps;
  if (!(fx >= 0.0 && fy >= 0.0 && fx < width && fy < height)) return std::nullopt;
  return std::make_pair(std::min(static_cast<int>(fx), width - 1), std::min(static_cast<int>(fy), height - 1));
}

int ComponentChart::component_at(cplx z) const {
  const auto px = pixel_of(z);
  if (!px) return -1;
  return label[index(px->first, px->second)];
}

int ComponentChart::escape_distance_at(cplx z) const {
  const auto px = pixel_of(z);
  if (!px) return 0;
  return escape_distance[index(px->first, px->second)];
}

void escape_times(const ComplexPoly& f, std::span<const cplx> zs, std::span<int> out, double radius, int max_iter,
                  exec_policy policy) {
  if (zs.size() != out.size()) throw invalid_input("escape_times: size mismatch");
  auto one = [&](cplx w) {
    for (int n = 0; n <= max_iter; ++n) {
      if (std::abs(w) > radius) return n;
      w = f(w);
    }
    return -1;
  };
  const auto n = static_cast<std::ptrdiff_t>(zs.size());
  if (policy == exec_policy::parallel) {
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = one(zs[static_cast<std::size_t>(i)]);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = one(zs[static_cast<std::size_t>(i)]);
  }
}

namespace {

struct Attractor {
  std::vector<cplx> points;
  double radius;
  int cycle_index;
  int signature_base;
};

struct PixelResult {
  int escape;
  int signature;
};

PixelResult pixel_orbit(const ComplexPoly& f, cplx w, double R, int max_iter, const std::vector<Attractor>& atts) {
  for (int n = 0; n <= max_iter; ++n) {
    if (std::abs(w) > R) return {n, -1};
    for (const auto& a : atts) {
      const int m = static_cast<int>(a.points.size());
      for (int j = 0; j < m; ++j)
        if (std::abs(w - a.points[static_cast<std::size_t>(j)]) < a.radius) return {-1, a.signature_base + (((j - n) % m) + m) % m};
    }
    w = f(w);
  }
  return {-1, -1};
}

}  // namespace

ComponentChart component_chart(const ComplexPoly& f, const Box& box, int resolution, const ChartOptions& opt) {
  if (resolution < 8) throw invalid_input("component_chart: resolution too small");
  const double R = escape_radius(f);
  ComponentChart ch;
  ch.box = box;
  ch.width = resolution;
  const double w = box.hi.real() - box.lo.real();
  const double h = box.hi.imag() - box.lo.imag();
  if (!(w > 0.0 && h > 0.0)) throw invalid_input("component_chart: empty box");
  ch.height = std::max(1, static_cast<int>(std::lround(resolution * h / w)));
  ch.box.hi = box.lo + cplx{w, ch.height * (w / resolution)};
  ch.max_iter = opt.max_iter;

  for (const cplx corner : {box.lo, box.hi, cplx{box.lo.real(), box.hi.imag()}, cplx{box.hi.real(), box.lo.imag()}})
    if (green_value(f, corner).value <= 0.0) throw invalid_input("component_chart: box corners must escape");

  int period = 1;
  while (period < opt.cycle_max_period && std::pow(f.degree(), period + 1) <= 64.0) ++period;
  ch.cycles = find_cycles(f, period);

  std::vector<Attractor> atts;
  int sig = 0;
  for (std::size_t c = 0; c < ch.cycles.size(); ++c) {
    const auto& cy = ch.cycles[c];
    if (cy.cls == CycleClass::repelling || cy.cls == CycleClass::rotation) continue;
    const double rad = cy.cls == CycleClass::parabolic ? 1e-2 : 1e-4;
    atts.push_back({cy.points, rad * (1.0 + std::abs(cy.points[0])), static_cast<int>(c), sig});
    sig += cy.period;
  }

  const std::size_t npix = static_cast<std::size_t>(ch.width) * static_cast<std::size_t>(ch.height);
  ch.escape_time.assign(npix, -1);
  std::vector<int> signature(npix, -1);
  const auto total = static_cast<std::ptrdiff_t>(npix);
  auto run_pixel = [&](std::ptrdiff_t i) {
    const int ix = static_cast<int>(i % ch.width);
    const int iy = static_cast<int>(i / ch.width);
    const auto r = pixel_orbit(f, ch.center(ix, iy), R, opt.max_iter, atts);
    ch.escape_time[static_cast<std::size_t>(i)] = r.escape;
    signature[static_cast<std::size_t>(i)] = r.signature;
  };
  if (opt.policy == exec_policy::parallel) {
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t i = 0; i < total; ++i) run_pixel(i);
  } else {
    for (std::ptrdiff_t i = 0; i < total; ++i) run_pixel(i);
  }

  // 4-connected flood fill over bounded pixels with equal signature.
  ch.label.assign(npix, -1);
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < npix; ++s) {
    if (ch.escape_time[s] >= 0 || ch.label[s] >= 0) continue;
    const int id = static_cast<int>(ch.components.size());
    ComponentChart::Component comp;
    comp.id = id;
    comp.signature = signature[s];
    ch.label[s] = id;
    queue.push_back(s);
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      ++comp.pixel_count;
      const int px = static_cast<int>(p % static_cast<std::size_t>(ch.width));
      const int py = static_cast<int>(p / static_cast<std::size_t>(ch.width));
      for (int k = 0; k < 4; ++k) {
        const int qx = px + dx[k], qy = py + dy[k];
        if (qx < 0 || qy < 0 || qx >= ch.width || qy >= ch.height) continue;
        const std::size_t q = ch.index(qx, qy);
        if (ch.escape_time[q] >= 0 || ch.label[q] >= 0 || signature[q] != comp.signature) continue;
        ch.label[q] = id;
        queue.push_back(q);
      }
    }
    ch.components.push_back(comp);
  }

  // Distance to the escaping set, and depth inside each component.
  auto bfs = [&](std::vector<int>& dist, auto&& is_source, bool same_label_only) {
    dist.assign(npix, -1);
    for (std::size_t p = 0; p < npix; ++p)
      if (is_source(p)) {
        dist[p] = 0;
        queue.push_back(p);
      }
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      const int px = static_cast<int>(p % static_cast<std::size_t>(ch.width));
      const int py = static_cast<int>(p / static_cast<std::size_t>(ch.width));
      for (int k = 0; k < 4; ++k) {
        const int qx = px + dx[k], qy = py + dy[k];
        if (qx < 0 || qy < 0 || qx >= ch.width || qy >= ch.height) continue;
        const std::size_t q = ch.index(qx, qy);
        if (dist[q] >= 0) continue;
        if (same_label_only && ch.label[q] != ch.label[p]) continue;
        dist[q] = dist[p] + 1;
        queue.push_back(q);
      }
    }
  };
  bfs(ch.escape_distance, [&](std::size_t p) { return ch.escape_time[p] >= 0; }, false);

  std::vector<int> depth;
  bfs(depth,
      [&](std::size_t p) {
        if (ch.label[p] < 0) return true;
        const int px = static_cast<int>(p % static_cast<std::size_t>(ch.width));
        const int py = static_cast<int>(p / static_cast<std::size_t>(ch.width));
        for (int k = 0; k < 4; ++k) {
          const int qx = px + dx[k], qy = py + dy[k];
          if (qx < 0 || qy < 0 || qx >= ch.width || qy >= ch.height) return true;
          if (ch.label[ch.index(qx, qy)] != ch.label[p]) return true;
        }
        return false;
      },
      true);
  std::vector<int> best(ch.components.size(), -1);
  for (std::size_t p = 0; p < npix; ++p) {
    const int l = ch.label[p];
    if (l < 0) continue;
    auto& c = ch.components[static_cast<std::size_t>(l)];
    if (depth[p] > best[static_cast<std::size_t>(l)]) {
      best[static_cast<std::size_t>(l)] = depth[p];
      c.sample = ch.center(static_cast<int>(p % static_cast<std::size_t>(ch.width)),
                           static_cast<int>(p / static_cast<std::size_t>(ch.width)));
    }
  }

  // Limit cycles: attracting ones from the signature, rotation ones by
  // following the sample orbit into a component that holds a rotation cycle.
  std::vector<int> rotation_of(ch.components.size(), -1);
  for (std::size_t c = 0; c < ch.cycles.size(); ++c) {
    if (ch.cycles[c].cls != CycleClass::rotation) continue;
    for (const auto& p : ch.cycles[c].points) {
      const int l = ch.component_at(p);
      if (l >= 0) rotation_of[static_cast<std::size_t>(l)] = static_cast<int>(c);
    }
  }
  for (auto& comp : ch.components) {
    if (comp.signature >= 0) {
      for (const auto& a : atts)
        if (comp.signature >= a.signature_base &&
            comp.signature < a.signature_base + static_cast<int>(a.points.size()))
          comp.limit_cycle = a.cycle_index;
      continue;
    }
    cplx z = comp.sample;
    for (int n = 0; n < opt.orbit_iters && std::abs(z) <= R; ++n) {
      const int l = ch.component_at(z);
      if (l >= 0 && rotation_of[static_cast<std::size_t>(l)] >= 0) {
        comp.limit_cycle = rotation_of[static_cast<std::size_t>(l)];
        break;
      }
      z = f(z);
    }
  }
  return ch;
}

std::string to_string(PointClass::Kind k) {
  switch (k) {
    case PointClass::Kind::escaping: return "escaping";
    case PointClass::Kind::bounded: return "bounded";
    case PointClass::Kind::near_julia: return "near_julia";
  }
  return "unknown";
}

PointClass classify_point(const ComplexPoly& f, cplx z, const ComponentChart& chart) {
  PointClass out;
  const auto g = green_value(f, z);
  if (g.value > 0.0) {
    out.kind = PointClass::Kind::escaping;
    out.green = g.value;
    return out;
  }
  const auto px = chart.pixel_of(z);
  if (!px) throw invalid_input("classify_point: bounded point outside the chart box");
  const int l = chart.label[chart.index(px->first, px->second)];
  out.kind = PointClass::Kind::near_julia;
  if (l < 0) return out;
  for (int oy = -1; oy <= 1; ++oy)
    for (int ox = -1; ox <= 1; ++ox) {
      const int qx = px->first + ox, qy = px->second + oy;
      if (qx < 0 || qy < 0 || qx >= chart.width || qy >= chart.height) return out;
      if (chart.label[chart.index(qx, qy)] != l) return out;
    }
  out.kind = PointClass::Kind::bounded;
  out.component = l;
  return out;
}

}  // namespace tavg
