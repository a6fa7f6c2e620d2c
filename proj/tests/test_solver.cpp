#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "srj/csv.hpp"
#include "srj/problems.hpp"
#include "srj/rng.hpp"
#include "srj/solver.hpp"
#include "srj/spectral.hpp"

using srj::Controller;
using srj::StoppingNorm;
using srj::StoppingRule;
using srj::Vector;

namespace {

Vector random_vector(std::size_t n, std::uint64_t seed) {
  srj::SplitMix64 rng(seed);
  Vector v(n);
  for (auto& x : v) x = rng.uniform() - 0.5;
  return v;
}

}  // namespace

TEST(Heuristic, NextLevelRule) {
  EXPECT_EQ(srj::heuristic_next_level(0.5, 3), 4);
  EXPECT_EQ(srj::heuristic_next_level(0.3, 5), 4);
  EXPECT_EQ(srj::heuristic_next_level(0.1, 5), 5);
  EXPECT_EQ(srj::heuristic_next_level(0.3, 0), 0);
  EXPECT_EQ(srj::heuristic_next_level(0.4, 7), 7);
  EXPECT_EQ(srj::heuristic_next_level(0.2, 7), 7);
  EXPECT_EQ(srj::heuristic_next_level(0.9, 24), 24);
  EXPECT_EQ(srj::heuristic_next_level(0.0, 0), 0);
  EXPECT_EQ(srj::heuristic_next_level(0.35, 7, {0.3, 0.1}), 8);
  EXPECT_THROW(srj::heuristic_next_level(0.5, 25), std::out_of_range);
}

TEST(Rates, AverageConvergenceRate) {
  EXPECT_NEAR(srj::average_convergence_rate(1, std::exp(-1.0), 1), 1.0, 1e-15);
  EXPECT_EQ(srj::average_convergence_rate(1, 1, 7), 0.0);
  EXPECT_NEAR(srj::average_convergence_rate(2, 1, 2), std::log(2.0) / 2, 1e-15);
  EXPECT_THROW(srj::average_convergence_rate(0, 1, 1), std::domain_error);
  EXPECT_THROW(srj::average_convergence_rate(1, -1, 1), std::domain_error);
}

TEST(Rates, AsymptoticRate) {
  EXPECT_NEAR(srj::asymptotic_rate({0.0}, 1), std::log(3.0), 1e-14);
  const auto roots = srj::chebyshev_roots(4);
  std::vector<double> eigs;
  for (double x : roots) eigs.push_back(srj::affine_g(srj::lambda_star(4), x));
  EXPECT_NEAR(srj::asymptotic_rate({0.0, 0.5}, 1), -std::log(2.0 / 3.0), 1e-14);
  EXPECT_GT(srj::asymptotic_rate({srj::affine_g(srj::lambda_star(1), 0.0)}, 1), 30.0);
  EXPECT_GT(srj::asymptotic_rate(eigs, 4), 5.0);
  EXPECT_THROW(srj::asymptotic_rate({}, 3), std::invalid_argument);
  EXPECT_THROW(srj::asymptotic_rate({1.5}, 3), std::domain_error);
}

TEST(Rates, BestFixedDegreeOnPoisson100) {
  std::vector<double> eigs;
  for (int j = 1; j <= 100; ++j) eigs.push_back(std::cos(j * std::numbers::pi / 101));
  double best = -1;
  int best_m = 0;
  for (int m : {35, 47, 63, 84}) {
    const double r = srj::asymptotic_rate(eigs, m);
    if (r > best) {
      best = r;
      best_m = m;
    }
  }
  EXPECT_EQ(best_m, 63);
}

TEST(RunCycle, SingleFactorIsOneSweep) {
  const auto p = srj::poisson_1d(12);
  srj::ResidualMeter meter(p.A, p.b, StoppingNorm::absolute_l2);
  srj::SolverState st;
  st.x = random_vector(12, 1);
  st.residual = meter.initial(st.x);
  const double w = srj::scheme_for_level(0).omegas.at(0);
  EXPECT_NEAR(w, 2.0 / 3.0, 1e-15);
  const Vector want = srj::weighted_jacobi_sweep(p.A, st.x, p.b, w);
  const auto c = srj::run_cycle(p.A, p.b, st, srj::scheme_for_level(0), meter);
  EXPECT_EQ(c.sweeps, 1u);
  EXPECT_EQ(st.x, want);
  EXPECT_EQ(st.total_iterations, 1u);
  EXPECT_EQ(st.cycle_index, 1u);
  ASSERT_TRUE(st.prev_residual_ratio);
  EXPECT_DOUBLE_EQ(*st.prev_residual_ratio, c.residual_after / c.residual_before);
}

TEST(RunCycle, ErrorMatchesDenseProduct) {
  const auto p = srj::poisson_1d(30);
  const auto& s = srj::scheme_for_level(5);
  ASSERT_EQ(s.M, 10);
  const Eigen::Map<const Eigen::VectorXd> b(p.b.data(), 30);
  const Eigen::VectorXd exact = srj::to_dense(p.A).ldlt().solve(b);
  srj::ResidualMeter meter(p.A, p.b, StoppingNorm::absolute_l2);
  srj::SolverState st;
  st.x = random_vector(30, 2);
  const Eigen::VectorXd e0 = Eigen::Map<const Eigen::VectorXd>(st.x.data(), 30) - exact;
  st.residual = meter.initial(st.x);
  srj::run_cycle(p.A, p.b, st, s, meter);
  const Eigen::VectorXd want = srj::dense_srj_cycle_matrix(p.A, s.ordered_omegas()) * e0;
  const Eigen::VectorXd got = Eigen::Map<const Eigen::VectorXd>(st.x.data(), 30) - exact;
  EXPECT_LE((got - want).norm(), 1e-9 * want.norm());
}

TEST(RunCycle, DivergenceIsReported) {
  const auto p = srj::poisson_1d(5);
  srj::ResidualMeter meter(p.A, p.b, StoppingNorm::absolute_l2);
  srj::SolverState st;
  st.x = Vector(5, 1.0);
  st.residual = meter.initial(st.x);
  srj::SrjScheme bad;
  bad.M = 3;
  bad.omegas = {1e200, 1e200, 1e200};
  bad.order = {0, 1, 2};
  try {
    srj::run_cycle(p.A, p.b, st, bad, meter);
    FAIL() << "expected divergence";
  } catch (const srj::DivergenceError& e) {
    EXPECT_EQ(e.M, 3);
    EXPECT_EQ(e.omega, 1e200);
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
  }
}

TEST(Solve, FixedDegreeRatioApproachesSpectralRadius) {
  // Run until the residual has dropped ~1e-9 so the slowest mode dominates.
  for (std::size_t n : {10, 20, 30}) {
    const auto p = srj::poisson_1d(n);
    const auto eigs = srj::dense_jacobi_eigenvalues(p.A);
    for (int m : {1, 2, 3, 5, 7, 10, 14, 19, 26}) {
      const srj::AmplificationPolynomial g(m);
      double rho = 0;
      for (double l : eigs) rho = std::max(rho, std::abs(g(l)));
      const double cycles = std::min(400.0, std::floor(std::log(1e-9) / std::log(rho)));
      const auto r = srj::solve(p.A, p.b, random_vector(n, 40 + m), Controller::fixed(m),
                                {StoppingNorm::absolute_l2, 1e-300, static_cast<std::size_t>(cycles) * m});
      const auto& last = r.cycles.back();
      EXPECT_NEAR(last.residual_after / last.residual_before, rho, 0.05 * rho) << "n=" << n << " M=" << m;
    }
  }
}

TEST(Solve, TinySystems) {
  const srj::SparseMatrix a(1, {{0, 0, 4.0}});
  const auto jac = srj::solve(a, Vector{2.0}, Vector{0.0}, Controller::jacobi(), {StoppingNorm::absolute_l2, 1e-12, 10});
  EXPECT_TRUE(jac.converged);
  EXPECT_EQ(jac.total_iterations, 1u);
  // Level 0 shrinks a 1x1 residual by exactly G_1(0) = 1/3 per sweep.
  const auto h = srj::solve(a, Vector{2.0}, Vector{0.0}, Controller::heuristic(), {StoppingNorm::absolute_l2, 1e-12, 200});
  EXPECT_TRUE(h.converged);
  EXPECT_NEAR(h.cycles.front().residual_after / h.cycles.front().residual_before, 1.0 / 3.0, 1e-12);
  for (const auto& c : h.cycles) EXPECT_EQ(c.level, 0);
  // Already exact: no cycles run.
  const auto done = srj::solve(a, Vector{2.0}, Vector{0.5}, Controller::heuristic(), {StoppingNorm::absolute_l2, 1e-12, 10});
  EXPECT_TRUE(done.converged);
  EXPECT_TRUE(done.cycles.empty());
  EXPECT_EQ(done.total_iterations, 0u);
}

TEST(Solve, HeuristicOnPoisson100) {
  const auto p = srj::poisson_1d(100);
  const StoppingRule rule{StoppingNorm::absolute_l2, 1e-7, 100000};
  const auto h = srj::solve(p, Controller::heuristic(), rule);
  const auto inc = srj::solve(p, Controller::increasing(), rule);
  ASSERT_TRUE(h.converged);
  ASSERT_TRUE(inc.converged);
  EXPECT_LE(h.total_iterations, 1500u);
  EXPECT_LT(h.total_iterations, inc.total_iterations);
  EXPECT_LT(h.final_residual, 1e-7);
  const auto trace = h.level_trace();
  ASSERT_GE(trace.size(), 6u);
  for (std::size_t k = trace.size() - 6; k < trace.size(); ++k) {
    EXPECT_TRUE(trace[k] == 10 || trace[k] == 11) << "cycle " << k << " level " << trace[k];
  }
  // Determinism.
  const auto again = srj::solve(p, Controller::heuristic(), rule);
  EXPECT_EQ(again.total_iterations, h.total_iterations);
  EXPECT_EQ(again.x, h.x);
}

TEST(Solve, StoppingIsPerSweepAndCountsAreConsistent) {
  const auto p = srj::poisson_1d(60);
  const auto r = srj::solve(p, Controller::fixed(84), {StoppingNorm::absolute_l2, 1e-7, 100000});
  ASSERT_TRUE(r.converged);
  std::size_t sum = 0;
  for (const auto& c : r.cycles) sum += c.sweeps;
  EXPECT_EQ(sum, r.total_iterations);
  EXPECT_LT(r.final_residual, 1e-7);
  // The sample just before the last one was still above tolerance.
  ASSERT_GE(r.residual_history.size(), 2u);
  EXPECT_GE(r.residual_history[r.residual_history.size() - 2].residual, 1e-7);
  EXPECT_EQ(r.residual_history.size(), r.total_iterations + 1);
}

TEST(RunCycle, StopsMidCycle) {
  const auto p = srj::poisson_1d(20);
  srj::ResidualMeter meter(p.A, p.b, StoppingNorm::absolute_l2);
  srj::SolverState st;
  st.x = p.x0;
  st.residual = meter.initial(st.x);
  const auto c = srj::run_cycle(p.A, p.b, st, srj::scheme_for_level(6), meter, 1e300);
  EXPECT_EQ(c.sweeps, 1u);
  EXPECT_TRUE(c.reached_tolerance);
  EXPECT_TRUE(st.converged);
  srj::SolverState capped;
  capped.x = p.x0;
  capped.residual = meter.initial(capped.x);
  EXPECT_EQ(srj::run_cycle(p.A, p.b, capped, srj::scheme_for_level(6), meter, std::nullopt, 5).sweeps, 5u);
  EXPECT_FALSE(capped.converged);
}

TEST(Solve, MaxIterationsCapsWork) {
  const auto p = srj::poisson_1d(100);
  const auto r = srj::solve(p, Controller::jacobi(), {StoppingNorm::absolute_l2, 1e-7, 1000});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.total_iterations, 1000u);
  const auto f = srj::solve(p, Controller::fixed(63), {StoppingNorm::absolute_l2, 1e-30, 100});
  EXPECT_EQ(f.total_iterations, 100u);
}

TEST(Solve, JacobiMonotoneAfterTransient) {
  const auto p = srj::poisson_1d(40);
  const auto r = srj::solve(p, Controller::jacobi(), {StoppingNorm::absolute_l2, 1e-6, 100000});
  ASSERT_TRUE(r.converged);
  // Odd/even sweeps contract separately; compare every other sample after a short transient.
  for (std::size_t k = 52; k < r.residual_history.size(); ++k) {
    EXPECT_LE(r.residual_history[k].residual, r.residual_history[k - 2].residual * (1 + 1e-12));
  }
}

TEST(Solve, NormsAndDiffFirstCycle) {
  const auto p = srj::laplace_2d_neumann(8, 3);
  const auto r = srj::solve(p, Controller::heuristic(), {StoppingNorm::solution_diff_inf, 1e-10, 100000});
  ASSERT_TRUE(r.converged);
  EXPECT_DOUBLE_EQ(r.initial_residual, srj::jacobi_correction_inf<double>(p.A, p.x0, p.b));
  const auto q = srj::poisson_3d(4);
  const auto rel = srj::solve(q, Controller::heuristic(), {StoppingNorm::relative_l2, 1e-8, 100000});
  ASSERT_TRUE(rel.converged);
  EXPECT_EQ(rel.initial_residual, 1.0);
  EXPECT_LT(srj::relative_residual_l2(q.A, rel.x, q.b, q.x0), 1e-8);
}

TEST(Solve, RejectsBadArguments) {
  const auto p = srj::poisson_1d(4);
  EXPECT_THROW(srj::solve(p, Controller::heuristic(), {StoppingNorm::absolute_l2, 0.0, 10}), std::invalid_argument);
  EXPECT_THROW(srj::solve(p, Controller::heuristic(), {StoppingNorm::absolute_l2, 1e-6, 0}), std::invalid_argument);
  EXPECT_THROW(srj::solve(p, Controller::fixed(0), {StoppingNorm::absolute_l2, 1e-6, 10}), std::invalid_argument);
  Controller c;
  c.kind = srj::ControllerKind::cjm;
  EXPECT_THROW(srj::solve(p, c, {StoppingNorm::absolute_l2, 1e-6, 10}), std::invalid_argument);
}

TEST(Solve, CjmComparatorConverges) {
  const auto p = srj::poisson_1d(100);
  const auto& b = p.cjm_bounds.at(0);
  const auto r = srj::solve(p, Controller::cjm(srj::generate_cjm_scheme(64, b.lo, b.hi)),
                            {StoppingNorm::absolute_l2, 1e-7, 100000});
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.total_iterations, 3000u);
}

TEST(Report, CsvLayout) {
  const auto p = srj::poisson_1d(20);
  const auto r = srj::solve(p, Controller::heuristic(), {StoppingNorm::absolute_l2, 1e-7, 100000});
  std::stringstream ss;
  srj::write_report_csv(ss, r);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "# schema=1");
  std::getline(ss, line);
  EXPECT_EQ(line, "cycle,level,M,res_before,res_after,avg_rate,cum_iters");
  std::size_t rows = 0;
  std::string last;
  while (std::getline(ss, line) && line[0] != '#') {
    ++rows;
    last = line;
    EXPECT_EQ(srj::csv::split(line).size(), 7u);
  }
  EXPECT_EQ(rows, r.cycles.size() + 1);
  EXPECT_EQ(last.rfind("total,", 0), 0u);
  EXPECT_EQ(srj::csv::split(last).back(), std::to_string(r.total_iterations));
  EXPECT_NE(line.find("converged=1"), std::string::npos);

  std::stringstream tr;
  srj::write_trace_csv(tr, r);
  std::size_t n = 0;
  while (srj::csv::next_record(tr, line)) ++n;
  EXPECT_EQ(n, r.residual_history.size() + 1);
}

TEST(Report, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 2.2250738585072014e-308, -2.5}) EXPECT_EQ(std::stod(srj::csv::real(v)), v);
}
