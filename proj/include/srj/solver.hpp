#pragma once

/// \file solver.hpp
/// \brief SRJ cycles, scheme-level controllers, and convergence-rate metrics.
///
/// A solve runs cycles of weighted Jacobi sweeps. Between cycles a controller
/// picks the next scheme:
///
///   heuristic   start at level 0; after each cycle move by heuristic_next_level
///   increasing  start at level 0; +1 per cycle, clamped at the top level
///   fixed(M)    repeat the degree-M scheme
///   jacobi      unit-weight sweeps
///   cjm         repeat a caller-supplied scheme
///
/// Stopping is tested after every sweep, so a cycle may end early.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srj/chebyshev.hpp"
#include "srj/csv.hpp"
#include "srj/problems.hpp"
#include "srj/schemes.hpp"
#include "srj/sparse_matrix.hpp"

namespace srj {

struct StoppingRule {
  StoppingNorm norm = StoppingNorm::absolute_l2;
  double tolerance = 1e-7;
  std::size_t max_iterations = 1'000'000;
};

/// Residual-ratio boundaries of the level heuristic.
struct HeuristicThresholds {
  double increase_above = 0.4;
  double decrease_above = 0.2;
};

/// ratio > hi: up one level; lo < ratio < hi: down one; otherwise stay. Clamped to the ladder.
inline int heuristic_next_level(double ratio, int level, HeuristicThresholds t = {}) {
  if (level < 0 || level > kMaxLevel) throw std::out_of_range("heuristic_next_level: level outside ladder");
  int next = level;
  if (ratio > t.increase_above) {
    next = level + 1;
  } else if (ratio < t.increase_above && ratio > t.decrease_above) {
    next = level - 1;
  }
  return std::clamp(next, 0, kMaxLevel);
}

/// -log(r_after / r_before) / M.
inline double average_convergence_rate(double r_before, double r_after, int m) {
  if (!(r_before > 0.0) || !(r_after > 0.0)) throw std::domain_error("average_convergence_rate: residuals must be positive");
  if (m < 1) throw std::invalid_argument("average_convergence_rate: M must be >= 1");
  return -std::log(r_after / r_before) / static_cast<double>(m);
}

/// Returned by asymptotic_rate when the scheme annihilates every given mode (rho = 0).
inline constexpr double kExactAnnihilation = std::numeric_limits<double>::infinity();

/// -log(max |G_M(lambda_J)|) / M over the given Jacobi eigenvalues.
inline double asymptotic_rate(const std::vector<double>& jacobi_eigs, int m) {
  if (jacobi_eigs.empty()) throw std::invalid_argument("asymptotic_rate: no eigenvalues");
  const AmplificationPolynomial g(m);
  double rho = 0.0;
  for (double lam : jacobi_eigs) {
    if (lam < -1.0 - 1e-12 || lam > 1.0 + 1e-12) throw std::domain_error("asymptotic_rate: eigenvalue outside [-1, 1]");
    rho = std::max(rho, std::abs(g(lam)));
  }
  if (rho == 0.0) return kExactAnnihilation;
  return -std::log(rho) / static_cast<double>(m);
}

/// Measures progress in one of the three supported norms.
class ResidualMeter {
 public:
  ResidualMeter(const SparseMatrix& a, const Vector& b, StoppingNorm norm) : a_(&a), b_(&b), norm_(norm) {}

  StoppingNorm norm() const noexcept { return norm_; }

  /// Value before any sweep. For solution_diff_inf this is ||D^{-1}(b - A x0)||_inf,
  /// the change a unit Jacobi sweep would make.
  double initial(const Vector& x0) {
    switch (norm_) {
      case StoppingNorm::absolute_l2: return residual_l2(*a_, x0, *b_);
      case StoppingNorm::relative_l2:
        reference_ = residual_l2(*a_, x0, *b_);
        return reference_ > 0.0 ? 1.0 : 0.0;
      case StoppingNorm::solution_diff_inf:
        return jacobi_correction_inf<double>(*a_, x0, *b_);
    }
    return 0.0;
  }

  double after_sweep(const Vector& x_new, const Vector& x_old) const {
    switch (norm_) {
      case StoppingNorm::absolute_l2: return residual_l2(*a_, x_new, *b_);
      case StoppingNorm::relative_l2: return reference_ > 0.0 ? residual_l2(*a_, x_new, *b_) / reference_ : 0.0;
      case StoppingNorm::solution_diff_inf: return diff_inf(x_new, x_old);
    }
    return 0.0;
  }

 private:
  const SparseMatrix* a_;
  const Vector* b_;
  StoppingNorm norm_;
  double reference_ = 1.0;
};

struct ResidualSample {
  std::size_t iteration = 0;
  double residual = 0.0;
};

struct SolverState {
  Vector x;
  int level = 0;
  std::optional<double> prev_residual_ratio;
  std::size_t cycle_index = 0;
  std::size_t total_iterations = 0;
  double residual = 0.0;  ///< current value in the configured norm
  bool converged = false;
  std::vector<ResidualSample> residual_history;
};

struct CycleStats {
  std::size_t cycle = 0;
  int level = -1;  ///< -1 for schemes outside the ladder
  int M = 0;
  std::size_t sweeps = 0;  ///< sweeps executed, < M when the cycle stopped early
  double residual_before = 0.0;
  double residual_after = 0.0;
  double average_rate = 0.0;
  std::size_t cumulative_iterations = 0;
  bool reached_tolerance = false;
};

/// A sweep produced a non-finite iterate.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t cycle, std::size_t sweep, double omega, int m)
      : std::runtime_error(what), cycle(cycle), sweep(sweep), omega(omega), M(m) {}
  std::size_t cycle;
  std::size_t sweep;
  double omega;
  int M;
};

/// Applies one cycle of `scheme` in its application order.
///
/// Stops early once the meter drops below `stop_below` or `max_sweeps` is
/// used up. Updates x, residual, prev_residual_ratio and the counters.
inline CycleStats run_cycle(const SparseMatrix& a, const Vector& b, SolverState& state, const SrjScheme& scheme,
                            const ResidualMeter& meter, std::optional<double> stop_below = std::nullopt,
                            std::size_t max_sweeps = std::numeric_limits<std::size_t>::max()) {
  CycleStats stats;
  stats.cycle = state.cycle_index;
  stats.level = scheme.level.value_or(-1);
  stats.M = scheme.M;
  stats.residual_before = state.residual;

  Vector next(state.x.size());
  for (std::size_t pos = 0; pos < scheme.order.size() && stats.sweeps < max_sweeps; ++pos) {
    const double omega = scheme.omegas[scheme.order[pos]];
    weighted_jacobi_sweep_into<double>(a, state.x, b, omega, next);
    if (!std::all_of(next.begin(), next.end(), [](double v) { return std::isfinite(v); })) {
      throw DivergenceError("run_cycle: non-finite iterate in cycle " + std::to_string(state.cycle_index) + ", sweep " +
                                std::to_string(pos) + " (omega=" + csv::real(omega) + ", M=" + std::to_string(scheme.M) +
                                ")",
                            state.cycle_index, pos, omega, scheme.M);
    }
    state.residual = meter.after_sweep(next, state.x);
    state.x.swap(next);
    ++stats.sweeps;
    ++state.total_iterations;
    state.residual_history.push_back({state.total_iterations, state.residual});
    if (stop_below && state.residual < *stop_below) {
      stats.reached_tolerance = true;
      state.converged = true;
      break;
    }
  }
  stats.residual_after = state.residual;
  stats.cumulative_iterations = state.total_iterations;
  const double ratio = stats.residual_before > 0.0 ? stats.residual_after / stats.residual_before : 0.0;
  state.prev_residual_ratio = ratio;
  if (stats.sweeps == 0) {
    stats.average_rate = 0.0;
  } else if (stats.residual_before > 0.0 && stats.residual_after > 0.0) {
    stats.average_rate = average_convergence_rate(stats.residual_before, stats.residual_after, static_cast<int>(stats.sweeps));
  } else {
    stats.average_rate = std::numeric_limits<double>::infinity();
  }
  ++state.cycle_index;
  return stats;
}

enum class ControllerKind { heuristic, increasing, fixed, jacobi, cjm };

struct Controller {
  ControllerKind kind = ControllerKind::heuristic;
  int fixed_m = 0;
  std::optional<SrjScheme> scheme;  ///< cjm only
  HeuristicThresholds thresholds;

  static Controller heuristic(HeuristicThresholds t = {}) { return {ControllerKind::heuristic, 0, std::nullopt, t}; }
  static Controller increasing() { return {ControllerKind::increasing, 0, std::nullopt, {}}; }
  static Controller fixed(int m) { return {ControllerKind::fixed, m, std::nullopt, {}}; }
  static Controller jacobi() { return {ControllerKind::jacobi, 0, std::nullopt, {}}; }
  static Controller cjm(SrjScheme s) { return {ControllerKind::cjm, 0, std::move(s), {}}; }

  std::string name() const {
    switch (kind) {
      case ControllerKind::heuristic: return "heuristic";
      case ControllerKind::increasing: return "increasing";
      case ControllerKind::fixed: return "fixed:" + std::to_string(fixed_m);
      case ControllerKind::jacobi: return "jacobi";
      case ControllerKind::cjm: return "cjm:" + std::to_string(scheme ? scheme->M : 0);
    }
    return "unknown";
  }
};

struct SolveReport {
  bool converged = false;
  std::size_t total_iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::vector<CycleStats> cycles;
  std::vector<ResidualSample> residual_history;
  Vector x;
  double wall_time = 0.0;  ///< seconds
  StoppingRule stopping;
  std::string controller;

  std::vector<int> level_trace() const {
    std::vector<int> out;
    out.reserve(cycles.size());
    for (const auto& c : cycles) out.push_back(c.level);
    return out;
  }
};

inline SrjScheme jacobi_scheme() {
  SrjScheme s;
  s.M = 1;
  s.omegas = {1.0};
  s.order = {0};
  return s;
}

inline SolveReport solve(const SparseMatrix& a, const Vector& b, const Vector& x0, const Controller& controller,
                         const StoppingRule& stopping) {
  if (!(stopping.tolerance > 0.0)) throw std::invalid_argument("solve: tolerance must be positive");
  if (stopping.max_iterations == 0) throw std::invalid_argument("solve: max_iterations must be positive");
  detail::require_size(a.size(), b.size(), "solve");
  detail::require_size(a.size(), x0.size(), "solve");
  if (controller.kind == ControllerKind::cjm && !controller.scheme) throw std::invalid_argument("solve: cjm needs a scheme");
  if (controller.kind == ControllerKind::fixed && (controller.fixed_m < 1)) {
    throw std::invalid_argument("solve: fixed controller needs M >= 1");
  }

  const auto start = std::chrono::steady_clock::now();
  ResidualMeter meter(a, b, stopping.norm);
  SolverState state;
  state.x = x0;
  state.residual = meter.initial(x0);
  state.residual_history.push_back({0, state.residual});

  SolveReport report;
  report.stopping = stopping;
  report.controller = controller.name();
  report.initial_residual = state.residual;

  std::optional<SrjScheme> repeated;
  switch (controller.kind) {
    case ControllerKind::fixed: repeated = generate_srj_scheme(controller.fixed_m); break;
    case ControllerKind::jacobi: repeated = jacobi_scheme(); break;
    case ControllerKind::cjm: repeated = controller.scheme; break;
    default: break;
  }
  if (repeated && controller.kind == ControllerKind::fixed) {
    const auto it = std::find(kLevelTable.begin(), kLevelTable.end(), controller.fixed_m);
    if (it != kLevelTable.end()) repeated->level = static_cast<int>(it - kLevelTable.begin());
  }

  state.converged = state.residual < stopping.tolerance;
  while (!state.converged && state.total_iterations < stopping.max_iterations) {
    const SrjScheme& scheme = repeated ? *repeated : scheme_for_level(state.level);
    const std::size_t budget = stopping.max_iterations - state.total_iterations;
    report.cycles.push_back(run_cycle(a, b, state, scheme, meter, stopping.tolerance, budget));
    if (state.converged) break;
    if (controller.kind == ControllerKind::heuristic) {
      state.level = heuristic_next_level(*state.prev_residual_ratio, state.level, controller.thresholds);
    } else if (controller.kind == ControllerKind::increasing) {
      state.level = std::min(state.level + 1, kMaxLevel);
    }
  }

  report.converged = state.converged;
  report.total_iterations = state.total_iterations;
  report.final_residual = state.residual;
  report.residual_history = std::move(state.residual_history);
  report.x = std::move(state.x);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

inline SolveReport solve(const ProblemInstance& problem, const Controller& controller, const StoppingRule& stopping) {
  return solve(problem.A, problem.b, problem.x0, controller, stopping);
}

/// Per-cycle CSV plus a `total` trailer row and a `# converged=...` comment.
inline void write_report_csv(std::ostream& os, const SolveReport& report) {
  using csv::real;
  os << csv::kSchemaLine << '\n';
  os << "cycle,level,M,res_before,res_after,avg_rate,cum_iters\n";
  for (const auto& c : report.cycles) {
    os << c.cycle << ',' << c.level << ',' << c.M << ',' << real(c.residual_before) << ',' << real(c.residual_after)
       << ',' << real(c.average_rate) << ',' << c.cumulative_iterations << '\n';
  }
  const double overall = (report.initial_residual > 0.0 && report.final_residual > 0.0 && report.total_iterations > 0)
                             ? average_convergence_rate(report.initial_residual, report.final_residual,
                                                        static_cast<int>(report.total_iterations))
                             : 0.0;
  const int last_level = report.cycles.empty() ? -1 : report.cycles.back().level;
  os << "total," << last_level << ',' << report.total_iterations << ',' << real(report.initial_residual) << ','
     << real(report.final_residual) << ',' << real(overall) << ',' << report.total_iterations << '\n';
  os << "# converged=" << (report.converged ? 1 : 0) << " controller=" << report.controller
     << " norm=" << to_string(report.stopping.norm) << " tol=" << real(report.stopping.tolerance)
     << " wall_time_s=" << real(report.wall_time) << '\n';
}

/// One row per sweep (iteration 0 is the initial residual).
inline void write_trace_csv(std::ostream& os, const SolveReport& report) {
  os << csv::kSchemaLine << '\n' << "iteration,residual\n";
  for (const auto& s : report.residual_history) os << s.iteration << ',' << csv::real(s.residual) << '\n';
}

}  // namespace srj
