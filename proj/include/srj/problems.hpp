#pragma once

/// \file problems.hpp
/// \brief Finite-difference test systems and the problem bundle shared by the solvers.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "srj/rng.hpp"
#include "srj/sparse_matrix.hpp"

namespace srj {

enum class StoppingNorm { absolute_l2, relative_l2, solution_diff_inf };

inline std::string to_string(StoppingNorm norm) {
  switch (norm) {
    case StoppingNorm::absolute_l2: return "absolute_l2";
    case StoppingNorm::relative_l2: return "relative_l2";
    case StoppingNorm::solution_diff_inf: return "solution_diff_inf";
  }
  return "unknown";
}

inline StoppingNorm parse_stopping_norm(const std::string& text) {
  if (text == "absolute_l2" || text == "abs") return StoppingNorm::absolute_l2;
  if (text == "relative_l2" || text == "rel") return StoppingNorm::relative_l2;
  if (text == "solution_diff_inf" || text == "diff") return StoppingNorm::solution_diff_inf;
  throw std::invalid_argument("unknown stopping norm '" + text + "'");
}

/// Jacobi eigenvalue bounds handed to a Chebyshev-Jacobi comparator.
struct CjmBounds {
  double lo = -1.0;
  double hi = 0.0;
  std::string name;
};

struct ProblemInstance {
  SparseMatrix A;
  Vector b;
  Vector x0;
  StoppingNorm stopping_norm = StoppingNorm::absolute_l2;
  std::vector<CjmBounds> cjm_bounds;  ///< empty when no comparator applies
  std::string label;

  std::size_t size() const noexcept { return A.size(); }
};

/// Tridiagonal (-1, 2, -1)/dx^2, dx = 1/(N+1); b = 1, x0 = 0.
inline ProblemInstance poisson_1d(std::size_t n) {
  if (n < 1) throw std::invalid_argument("poisson_1d: N must be >= 1");
  const double dx = 1.0 / static_cast<double>(n + 1);
  const double s = 1.0 / (dx * dx);
  std::vector<Triplet<double>> t;
  t.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) t.push_back({i, i - 1, -s});
    t.push_back({i, i, 2.0 * s});
    if (i + 1 < n) t.push_back({i, i + 1, -s});
  }
  const double mu = std::cos(std::numbers::pi * dx);
  return {SparseMatrix(n, std::move(t)), Vector(n, 1.0), Vector(n, 0.0), StoppingNorm::absolute_l2,
          {{-mu, mu, "grid"}}, "poisson1d:" + std::to_string(n)};
}

/// Random symmetric, weakly diagonally dominant tridiagonal system.
///
/// Draw order from SplitMix64(seed): N-1 off-diagonal values, then N diagonal
/// values, all uniform [0, 1). Rows that are not dominant get their diagonal
/// raised to the off-diagonal sum; the first and last diagonals are then set
/// to twice their single neighbour.
inline ProblemInstance random_tridiagonal(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random_tridiagonal: N must be >= 2");
  SplitMix64 rng(seed);
  std::vector<double> off(n - 1);
  std::vector<double> diag(n);
  for (auto& v : off) v = rng.uniform();
  for (auto& v : diag) v = rng.uniform();
  for (std::size_t i = 0; i < n; ++i) {
    const double sum = (i > 0 ? off[i - 1] : 0.0) + (i + 1 < n ? off[i] : 0.0);
    if (std::abs(diag[i]) < sum) diag[i] = sum;
  }
  diag.front() = 2.0 * off.front();
  diag.back() = 2.0 * off.back();
  std::vector<Triplet<double>> t;
  t.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) t.push_back({i, i - 1, off[i - 1]});
    t.push_back({i, i, diag[i]});
    if (i + 1 < n) t.push_back({i, i + 1, off[i]});
  }
  return {SparseMatrix(n, std::move(t)), Vector(n, 1.0), Vector(n, 0.0), StoppingNorm::absolute_l2,
          {}, "tridiag:" + std::to_string(n) + ":seed=" + std::to_string(seed)};
}

/// Row weight applied to the ghost-node Neumann stencil at grid node k.
///
/// Eliminating a ghost node doubles the inward coupling, which makes the raw
/// stencil unsymmetric. Scaling a row by 1/2 per missing neighbour direction
/// restores symmetry without changing Jacobi iterates (row scaling cancels in
/// D^{-1}(b - (L + U) x)). Raw row = stored row / weight.
inline double neumann_row_weight(std::size_t n, std::size_t k) {
  const std::size_t i = k / n;
  const std::size_t j = k % n;
  double w = 1.0;
  if (i == 0 || i + 1 == n) w *= 0.5;
  if (j == 0 || j + 1 == n) w *= 0.5;
  return w;
}

/// 2D Laplace, homogeneous Neumann on the unit square, n x n unknowns, A x = 0.
inline ProblemInstance laplace_2d_neumann(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("laplace_2d_neumann: n must be >= 2");
  const double dx = 1.0 / static_cast<double>(n + 1);
  const double s = 1.0 / (dx * dx);
  const std::size_t total = n * n;
  std::vector<Triplet<double>> t;
  t.reserve(5 * total);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = i * n + j;
      const double w = neumann_row_weight(n, k) * s;
      t.push_back({k, k, 4.0 * w});
      // Each direction couples to its neighbour, or through the ghost node to the opposite one.
      const std::size_t up = (i + 1 < n) ? k + n : k - n;
      const std::size_t down = (i > 0) ? k - n : k + n;
      const std::size_t right = (j + 1 < n) ? k + 1 : k - 1;
      const std::size_t left = (j > 0) ? k - 1 : k + 1;
      for (std::size_t nb : {up, down, right, left}) t.push_back({k, nb, -w});
    }
  }
  SplitMix64 rng(seed);
  Vector x0(total);
  for (auto& v : x0) v = rng.uniform();
  const double mu = (std::cos(std::numbers::pi * dx) + 1.0) / 2.0;
  return {SparseMatrix(total, std::move(t)), Vector(total, 0.0), std::move(x0), StoppingNorm::solution_diff_inf,
          {{-mu, mu, "grid"}}, "laplace2d:" + std::to_string(n) + ":seed=" + std::to_string(seed)};
}

/// 3D Poisson, Dirichlet on all faces, n^3 unknowns, f = 1, 7-point stencil.
inline ProblemInstance poisson_3d(std::size_t n) {
  if (n < 2) throw std::invalid_argument("poisson_3d: n must be >= 2");
  const double dx = 1.0 / static_cast<double>(n + 1);
  const double s = 1.0 / (dx * dx);
  const std::size_t total = n * n * n;
  std::vector<Triplet<double>> t;
  t.reserve(7 * total);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t l = 0; l < n; ++l) {
        const std::size_t k = (i * n + j) * n + l;
        t.push_back({k, k, 6.0 * s});
        if (i > 0) t.push_back({k, k - n * n, -s});
        if (i + 1 < n) t.push_back({k, k + n * n, -s});
        if (j > 0) t.push_back({k, k - n, -s});
        if (j + 1 < n) t.push_back({k, k + n, -s});
        if (l > 0) t.push_back({k, k - 1, -s});
        if (l + 1 < n) t.push_back({k, k + 1, -s});
      }
    }
  }
  const double mu = std::cos(std::numbers::pi * dx);
  return {SparseMatrix(total, std::move(t)), Vector(total, 1.0), Vector(total, 0.0), StoppingNorm::relative_l2,
          {{-mu, mu, "grid"}}, "poisson3d:" + std::to_string(n)};
}

}  // namespace srj
