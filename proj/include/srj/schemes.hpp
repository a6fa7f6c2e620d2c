#pragma once

/// \file schemes.hpp
/// \brief SRJ relaxation schedules: generation, the level ladder, and application order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "srj/chebyshev.hpp"

namespace srj {

/// Relaxation factors for one cycle.
///
/// `omegas[j]` belongs to the j-th Chebyshev root (descending), so omegas are
/// stored largest first. `order` is the sequence in which a cycle applies them.
struct SrjScheme {
  int M = 0;
  std::vector<double> omegas;
  std::vector<std::size_t> order;
  std::optional<int> level;

  /// Factors in application order.
  std::vector<double> ordered_omegas() const {
    std::vector<double> out;
    out.reserve(order.size());
    for (std::size_t idx : order) out.push_back(omegas[idx]);
    return out;
  }
};

/// M for scheme levels 0..24.
inline constexpr std::array<int, 25> kLevelTable = {1,   2,   3,   5,   7,   10,  14,   19,   26,   35,   47,   63,  84,
                                                    111, 147, 194, 256, 338, 446, 589, 778, 1027, 1356, 1790, 2362};
inline constexpr int kMaxLevel = static_cast<int>(kLevelTable.size()) - 1;

inline int level_to_m(int level) {
  if (level < 0 || level > kMaxLevel) {
    throw std::out_of_range("scheme level " + std::to_string(level) + " outside 0.." + std::to_string(kMaxLevel));
  }
  return kLevelTable[static_cast<std::size_t>(level)];
}

/// Leja ordering of the amplification roots, starting from the largest factor.
///
/// Each subsequent factor is the one whose root lambda_r = 1 - 1/omega sits
/// where the running product of the already-chosen factors is largest, i.e.
/// the factor that removes the currently dominant error component. Both the
/// partial products and the remaining-tail products stay moderate, which keeps
/// roundoff from being amplified within a cycle. Distances are accumulated in
/// log space because raw products underflow for M in the thousands.
inline std::vector<std::size_t> order_for_stability(const std::vector<double>& omegas) {
  const std::size_t m = omegas.size();
  std::vector<std::size_t> order;
  if (m == 0) return order;
  order.reserve(m);

  std::vector<double> roots(m);
  for (std::size_t j = 0; j < m; ++j) roots[j] = 1.0 - 1.0 / omegas[j];

  std::size_t first = 0;
  for (std::size_t j = 1; j < m; ++j) {
    if (omegas[j] > omegas[first]) first = j;
  }
  std::vector<bool> used(m, false);
  std::vector<double> log_distance(m, 0.0);
  std::size_t current = first;
  for (std::size_t step = 0; step < m; ++step) {
    used[current] = true;
    order.push_back(current);
    if (step + 1 == m) break;
    std::size_t best = m;
    for (std::size_t j = 0; j < m; ++j) {
      if (used[j]) continue;
      log_distance[j] += std::log(std::abs(roots[j] - roots[current]));
      // Strict comparison: ties keep the earlier index, which carries the larger omega.
      if (best == m || log_distance[j] > log_distance[best] ||
          (log_distance[j] == log_distance[best] && omegas[j] > omegas[best])) {
        best = j;
      }
    }
    current = best;
  }
  return order;
}

/// The degree-M scheme: omega_j = (s + 1) / (2 (s - x_j)), s = lambda*(M).
inline SrjScheme generate_srj_scheme(int m) {
  if (m < 1 || m > 10000) throw std::invalid_argument("generate_srj_scheme: M must be in 1..10000");
  const double s = lambda_star(m);
  const std::vector<double> roots = chebyshev_roots(m);
  SrjScheme scheme;
  scheme.M = m;
  scheme.omegas.reserve(roots.size());
  for (double x : roots) scheme.omegas.push_back((s + 1.0) / (2.0 * (s - x)));
  scheme.order = order_for_stability(scheme.omegas);
  return scheme;
}

/// Chebyshev roots mapped onto the Jacobi eigenvalue bounds [lam_lo, lam_hi]; omega = 1/(1 - lambda_r).
inline SrjScheme generate_cjm_scheme(int m, double lam_lo, double lam_hi) {
  if (m < 1) throw std::invalid_argument("generate_cjm_scheme: M must be >= 1");
  if (!(lam_lo >= -1.0 && lam_lo < lam_hi && lam_hi < 1.0)) {
    throw std::invalid_argument("generate_cjm_scheme: need -1 <= lam_lo < lam_hi < 1");
  }
  const double mid = 0.5 * (lam_lo + lam_hi);
  const double half = 0.5 * (lam_hi - lam_lo);
  SrjScheme scheme;
  scheme.M = m;
  for (double x : chebyshev_roots(m)) scheme.omegas.push_back(1.0 / (1.0 - (mid + half * x)));
  scheme.order = order_for_stability(scheme.omegas);
  return scheme;
}

/// G_M'(1), the stiffness measure used to space the level ladder.
inline double stiffness_slope(int m) { return AmplificationPolynomial(m).slope_at_one(); }

struct LevelEntry {
  int level = 0;
  int M = 0;
};

struct SchemeLevelTable {
  std::vector<LevelEntry> levels;
};

/// Greedy ladder: from M = 1, admit the smallest M whose slope is at least
/// `growth` times the slope of the last admitted M.
inline SchemeLevelTable build_level_table(int max_level, double growth = 1.5) {
  if (max_level < 0 || max_level > 30) throw std::invalid_argument("build_level_table: max_level must be in 0..30");
  if (!(growth > 1.0)) throw std::invalid_argument("build_level_table: growth must exceed 1");
  SchemeLevelTable table;
  table.levels.push_back({0, 1});
  double last_slope = stiffness_slope(1);
  for (int m = 2; static_cast<int>(table.levels.size()) <= max_level; ++m) {
    const double slope = stiffness_slope(m);
    if (slope >= growth * last_slope) {
      table.levels.push_back({static_cast<int>(table.levels.size()), m});
      last_slope = slope;
    }
  }
  return table;
}

/// The pinned ladder as a SchemeLevelTable.
inline SchemeLevelTable pinned_level_table() {
  SchemeLevelTable table;
  for (int level = 0; level <= kMaxLevel; ++level) table.levels.push_back({level, level_to_m(level)});
  return table;
}

/// Scheme for a ladder level; generated once per process and shared.
inline const SrjScheme& scheme_for_level(int level) {
  const int m = level_to_m(level);
  static std::array<std::optional<SrjScheme>, kLevelTable.size()> cache;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  auto& slot = cache[static_cast<std::size_t>(level)];
  if (!slot) {
    slot = generate_srj_scheme(m);
    slot->level = level;
  }
  return *slot;
}

/// log10 of the worst growth seen on a uniform grid while a cycle runs.
struct OrderingPeaks {
  double log10_partial = 0.0;  ///< max over k, lambda of prod_{i<=k} |1 - w_i + w_i lambda|
  double log10_tail = 0.0;     ///< max over k, lambda of prod_{i>=k} |1 - w_i + w_i lambda|
};

/// Growth of partial and tail products of `omegas` (taken in `order`) on [lo, hi].
inline OrderingPeaks ordering_peaks(const std::vector<double>& omegas, const std::vector<std::size_t>& order, double lo,
                                    double hi, std::size_t grid_size) {
  if (grid_size < 64) throw std::invalid_argument("ordering_peaks: grid_size must be >= 64");
  if (order.size() != omegas.size()) throw std::invalid_argument("ordering_peaks: order/omegas size mismatch");
  const std::size_t m = order.size();
  OrderingPeaks peaks{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  std::vector<double> log_factor(m);
  for (std::size_t g = 0; g < grid_size; ++g) {
    const double lam = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_size - 1);
    for (std::size_t k = 0; k < m; ++k) {
      const double w = omegas[order[k]];
      log_factor[k] = std::log10(std::abs(1.0 - w + w * lam));
    }
    double running = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      running += log_factor[k];
      peaks.log10_partial = std::max(peaks.log10_partial, running);
    }
    running = 0.0;
    for (std::size_t k = m; k-- > 0;) {
      running += log_factor[k];
      peaks.log10_tail = std::max(peaks.log10_tail, running);
    }
  }
  return peaks;
}

inline OrderingPeaks ordering_peaks(const SrjScheme& scheme, std::size_t grid_size) {
  return ordering_peaks(scheme.omegas, scheme.order, -1.0, lambda_max(scheme.M), grid_size);
}

}  // namespace srj
