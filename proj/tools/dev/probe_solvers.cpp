#include <chrono>
#include <cstdio>
#include "evopde/solvers.hpp"
using namespace evopde;
using Clock = std::chrono::steady_clock;
static double secs(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int main() {
  // Wave: paper scale, refinement comparisons
  {
    auto spec = ProblemSpec::defaults(ProblemKind::kWave);
    auto t0 = Clock::now();
    Field base = solve_reference_problem(spec);
    std::printf("wave solve: %.2fs (%zux%zu)\n", secs(t0), base.x_nodes.size(), base.t_nodes.size());
    Field fine = solve_refined(spec, 4);
    double md = (base.values - fine.values).cwiseAbs().maxCoeff();
    std::printf("wave refine both dx,dt x4: max abs diff = %.3e\n", md);
    // dt-only refinement for comparison: mimic by N*4
    ProblemSpec dtonly = spec; dtonly.time_nodes *= 4;
    Field ft = solve_reference_problem(dtonly);
    double md2 = 0;
    for (int i = 0; i <= spec.space_nodes; ++i)
      for (int j = 0; j <= spec.time_nodes; ++j)
        md2 = std::max(md2, std::abs(base.values(i, j) - ft.values(i, j * 4)));
    std::printf("wave refine dt-only x4:    max abs diff = %.3e\n", md2);
  }
  // Chaffee
  {
    auto spec = ProblemSpec::defaults(ProblemKind::kChaffeeInfante);
    auto t0 = Clock::now();
    Field base = solve_reference_problem(spec);
    std::printf("chaffee solve: %.2fs (%zux%zu) t0=%g t_last=%g\n", secs(t0), base.x_nodes.size(), base.t_nodes.size(), base.t_nodes.front(), base.t_nodes.back());
    t0 = Clock::now();
    Field fine = solve_refined(spec, 4);
    double md = (base.values - fine.values).cwiseAbs().maxCoeff();
    std::printf("chaffee refine x4: %.2fs, max abs diff = %.3e\n", secs(t0), md);
  }
  // Burgers paper scale
  {
    auto spec = ProblemSpec::defaults(ProblemKind::kBurgers);
    auto t0 = Clock::now();
    Field base = solve_reference_problem(spec);
    std::printf("burgers solve: %.2fs (%zux%zu) total=%zu umax=%.3f\n", secs(t0), base.x_nodes.size(), base.t_nodes.size(), base.point_count(), base.values.cwiseAbs().maxCoeff());
  }
  // KdV small scale for refinement test design
  {
    auto spec = ProblemSpec::defaults(ProblemKind::kKdv);
    spec.modes = 128; spec.inner_dt = 2e-5; spec.t_end = 0.25; spec.record_dt = 0.005;
    auto t0 = Clock::now();
    Field base = solve_reference_problem(spec);
    std::printf("kdv-small solve: %.2fs (%zux%zu) umax=%.3f\n", secs(t0), base.x_nodes.size(), base.t_nodes.size(), base.values.cwiseAbs().maxCoeff());
    t0 = Clock::now();
    Field fine = solve_refined(spec, 4);
    double md = (base.values - fine.values).cwiseAbs().maxCoeff();
    std::printf("kdv-small refine x4: %.2fs, max abs diff = %.3e\n", secs(t0), md);
  }
  return 0;
}
