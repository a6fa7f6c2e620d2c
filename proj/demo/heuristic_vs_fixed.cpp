// Compare the adaptive controller with fixed-degree schemes on 1D Poisson.
#include <cstdio>
#include <string>

#include "srj/problems.hpp"
#include "srj/solver.hpp"

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::stoul(argv[1]) : 100;
  const auto problem = srj::poisson_1d(n);
  const srj::StoppingRule rule{srj::StoppingNorm::absolute_l2, 1e-7, 200000};

  const auto adaptive = srj::solve(problem, srj::Controller::heuristic(), rule);
  std::printf("N=%zu heuristic: %zu iterations, levels", n, adaptive.total_iterations);
  for (int level : adaptive.level_trace()) std::printf(" %d", level);
  std::printf("\n");

  for (int m : {35, 47, 63, 84}) {
    const auto r = srj::solve(problem, srj::Controller::fixed(m), rule);
    std::printf("N=%zu fixed M=%-3d: %zu iterations\n", n, m, r.total_iterations);
  }
  const auto jac = srj::solve(problem, srj::Controller::jacobi(), rule);
  std::printf("N=%zu jacobi: %zu iterations%s\n", n, jac.total_iterations, jac.converged ? "" : " (not converged)");
}
