#pragma once

/// \file address.hpp
/// \brief `family:size` problem addresses and controller names.
///
/// Problems:    poisson1d:N  tridiag:N  laplace2d:n  poisson3d:n  mesh:path  mtx:path
/// Controllers: heuristic  increasing  jacobi  fixed:M  cjm:M[:bound]

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "srj/matrix_market.hpp"
#include "srj/mesh.hpp"
#include "srj/problems.hpp"
#include "srj/solver.hpp"

namespace srj {

namespace detail {
inline std::size_t parse_count(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || v <= 0) throw std::invalid_argument(what + ": expected a positive integer, got '" + text + "'");
  return static_cast<std::size_t>(v);
}
}  // namespace detail

/// The seed is used by the random families only.
inline ProblemInstance make_problem(const std::string& address, std::uint64_t seed = 0) {
  const auto colon = address.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("problem address '" + address + "' needs family:size");
  const std::string family = address.substr(0, colon);
  const std::string arg = address.substr(colon + 1);
  if (family == "poisson1d") return poisson_1d(detail::parse_count(arg, address));
  if (family == "tridiag") return random_tridiagonal(detail::parse_count(arg, address), seed);
  if (family == "laplace2d") return laplace_2d_neumann(detail::parse_count(arg, address), seed);
  if (family == "poisson3d") return poisson_3d(detail::parse_count(arg, address));
  if (family == "mesh") return assemble_fem_poisson(read_mesh(arg), address);
  if (family == "mtx") {
    std::ifstream in(arg);
    if (!in) throw std::runtime_error("cannot open '" + arg + "'");
    ProblemInstance p;
    p.A = read_matrix_market(in);
    p.b = Vector(p.A.size(), 1.0);
    p.x0 = Vector(p.A.size(), 0.0);
    p.label = address;
    return p;
  }
  throw std::invalid_argument("unknown problem family '" + family + "'");
}

/// cjm needs the problem for its eigenvalue bounds; `bound` picks one by name, default the first.
inline Controller make_controller(const std::string& name, const ProblemInstance& problem,
                                  HeuristicThresholds thresholds = {}) {
  if (name == "heuristic") return Controller::heuristic(thresholds);
  if (name == "increasing") return Controller::increasing();
  if (name == "jacobi") return Controller::jacobi();
  if (name.rfind("fixed:", 0) == 0) {
    const auto m = detail::parse_count(name.substr(6), name);
    if (m > 10000) throw std::invalid_argument(name + ": M must be <= 10000");
    return Controller::fixed(static_cast<int>(m));
  }
  if (name.rfind("cjm:", 0) == 0) {
    const std::string rest = name.substr(4);
    const auto colon = rest.find(':');
    const auto m = detail::parse_count(rest.substr(0, colon), name);
    if (m > 10000) throw std::invalid_argument(name + ": M must be <= 10000");
    if (problem.cjm_bounds.empty()) throw std::invalid_argument(name + ": problem '" + problem.label + "' has no CJM bounds");
    const CjmBounds* pick = &problem.cjm_bounds.front();
    if (colon != std::string::npos) {
      const std::string bound = rest.substr(colon + 1);
      pick = nullptr;
      for (const auto& b : problem.cjm_bounds) {
        if (b.name == bound) pick = &b;
      }
      if (!pick) throw std::invalid_argument(name + ": no bound named '" + bound + "'");
    }
    return Controller::cjm(generate_cjm_scheme(static_cast<int>(m), pick->lo, pick->hi));
  }
  throw std::invalid_argument("unknown controller '" + name + "'");
}

/// Default tolerance for a stopping norm.
inline double default_tolerance(StoppingNorm norm) {
  switch (norm) {
    case StoppingNorm::absolute_l2: return 1e-7;
    case StoppingNorm::relative_l2: return 1e-8;
    case StoppingNorm::solution_diff_inf: return 1e-10;
  }
  return 1e-7;
}

}  // namespace srj
