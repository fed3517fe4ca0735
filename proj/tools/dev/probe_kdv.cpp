#include <chrono>
#include <cstdio>
#include "evopde/solvers.hpp"
using namespace evopde;
int main() {
  auto t0 = std::chrono::steady_clock::now();
  auto spec = ProblemSpec::defaults(ProblemKind::kKdv);
  Field f = solve_reference_problem(spec);
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("kdv paper solve: %.1fs dims %zux%zu total=%zu umax=%.4f\n", s,
              f.x_nodes.size(), f.t_nodes.size(), f.point_count(), f.values.cwiseAbs().maxCoeff());
  save_field(f, spec, "/tmp/kdv_paper.bin");
  return 0;
}
