#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "tavg/dynamics.hpp"
#include "tavg/exec.hpp"
#include "tavg/monodromy.hpp"
#include "tavg/poly.hpp"

using namespace tavg;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const std::string& name, double serial, double parallel, bool agree) {
  std::printf("%-16s %10.4f %10.4f %8.2fx  %s\n", name.c_str(), serial, parallel, serial / parallel,
              agree ? "outputs agree" : "OUTPUTS DIFFER");
}

std::vector<cplx> grid(double r, int n) {
  std::vector<cplx> zs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) zs.emplace_back(-r + 2.0 * r * i / (n - 1), -r + 2.0 * r * j / (n - 1));
  return zs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial reference kernels against their OpenMP versions"};
  int reps = 3, n = 400, level = 6;
  app.add_option("--reps", reps, "repetitions, best time kept");
  app.add_option("--grid", n, "grid side for the pixel kernels");
  app.add_option("--level", level, "tree depth for fibers and lifting");
  CLI11_PARSE(app, argc, argv);

  std::printf("threads: %d\n", max_threads());
  std::printf("%-16s %10s %10s %9s\n", "kernel", "serial s", "omp s", "speedup");

  const ComplexPoly basilica({-1.0, 0.0, 1.0});
  const ComplexPoly z2p1({1.0, 0.0, 1.0});
  const ComplexPoly cubic({cplx{0.3, 0.1}, cplx{-0.5, 0.2}, 0.0, 1.0});

  {
    const auto zs = grid(2.0, n);
    std::vector<GreensEstimate> a(zs.size()), b(zs.size());
    const double ts = best_of(reps, [&] { green_values(z2p1, zs, a, 1e-12, 10000, exec_policy::serial); });
    const double tp = best_of(reps, [&] { green_values(z2p1, zs, b, 1e-12, 10000, exec_policy::parallel); });
    bool agree = true;
    for (std::size_t i = 0; i < zs.size(); ++i) agree = agree && a[i].value == b[i].value;
    report("green_values", ts, tp, agree);
  }
  {
    const auto zs = grid(escape_radius(basilica), n);
    std::vector<int> a(zs.size()), b(zs.size());
    const double R = escape_radius(basilica);
    const double ts = best_of(reps, [&] { escape_times(basilica, zs, a, R, 1000, exec_policy::serial); });
    const double tp = best_of(reps, [&] { escape_times(basilica, zs, b, R, 1000, exec_policy::parallel); });
    report("escape_times", ts, tp, a == b);
  }
  {
    ChartOptions so, po;
    so.policy = exec_policy::serial;
    ComponentChart a, b;
    const auto box = default_box(basilica);
    const double ts = best_of(reps, [&] { a = component_chart(basilica, box, n / 2, so); });
    const double tp = best_of(reps, [&] { b = component_chart(basilica, box, n / 2, po); });
    report("component_chart", ts, tp, a.label == b.label && a.escape_time == b.escape_time);
  }
  {
    FiberOptions so, po;
    so.policy = exec_policy::serial;
    std::vector<Fiber> a, b;
    const double ts = best_of(reps, [&] { a = fiber_levels(cubic, 2.0, level, so); });
    const double tp = best_of(reps, [&] { b = fiber_levels(cubic, 2.0, level, po); });
    report("fiber_levels", ts, tp, a.back().points == b.back().points);
  }
  {
    const auto tree = preimage_tree(basilica, cplx{0.2, 0.1}, level);
    const auto loop = infinity_loop(basilica, level, cplx{0.2, 0.1});
    LiftOptions so, po;
    so.policy = exec_policy::serial;
    TreePermutation a, b;
    const double ts = best_of(reps, [&] { a = lift_loop(tree, loop, -1, so); });
    const double tp = best_of(reps, [&] { b = lift_loop(tree, loop, -1, po); });
    report("lift_loop", ts, tp, a == b);
  }
  return 0;
}
