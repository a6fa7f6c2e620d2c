#pragma once

/// \file sparse_matrix.hpp
/// \brief CSR matrices, Jacobi sweeps and residual norms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace srj {

using Vector = std::vector<double>;

/// One (row, col, value) contribution. Duplicates are summed on assembly.
template <class Real>
struct Triplet {
  std::size_t row;
  std::size_t col;
  Real value;
};

enum class SymmetryCheck { require, skip };

/// Square compressed-sparse-row matrix with a structurally present, nonzero diagonal.
///
/// Column indices are strictly ascending within each row. Values are
/// immutable after construction.
template <class Real = double>
class CsrMatrix {
 public:
  using value_type = Real;

  CsrMatrix() = default;

  /// Assemble from triplets; duplicates are summed, exact zeros off the diagonal are kept.
  CsrMatrix(std::size_t n, std::vector<Triplet<Real>> entries, SymmetryCheck symmetry = SymmetryCheck::require,
            Real symmetry_tol = Real(1e-12))
      : n_(n) {
    for (const auto& t : entries) {
      if (t.row >= n || t.col >= n) throw std::out_of_range("CsrMatrix: entry index outside matrix dimension");
    }
    std::stable_sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    row_ptr_.assign(n + 1, 0);
    for (std::size_t k = 0; k < entries.size();) {
      const std::size_t r = entries[k].row;
      const std::size_t c = entries[k].col;
      Real sum = 0;
      while (k < entries.size() && entries[k].row == r && entries[k].col == c) sum += entries[k++].value;
      col_idx_.push_back(c);
      vals_.push_back(sum);
      ++row_ptr_[r + 1];
    }
    for (std::size_t i = 0; i < n; ++i) row_ptr_[i + 1] += row_ptr_[i];
    locate_diagonal();
    if (symmetry == SymmetryCheck::require) check_symmetry(symmetry_tol);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return vals_.size(); }
  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
  std::span<const Real> values() const noexcept { return vals_; }

  Real diagonal(std::size_t i) const { return vals_[diag_pos_[i]]; }
  std::vector<Real> diagonal() const {
    std::vector<Real> d(n_);
    for (std::size_t i = 0; i < n_; ++i) d[i] = vals_[diag_pos_[i]];
    return d;
  }

  /// Entry (i, j) or zero when structurally absent.
  Real at(std::size_t i, std::size_t j) const {
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return Real(0);
    return vals_[static_cast<std::size_t>(it - col_idx_.begin())];
  }

  std::vector<Triplet<Real>> triplets() const {
    std::vector<Triplet<Real>> out;
    out.reserve(vals_.size());
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out.push_back({i, col_idx_[k], vals_[k]});
    }
    return out;
  }

  bool is_symmetric(Real tol = Real(1e-12)) const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const Real a = vals_[k];
        const Real b = at(col_idx_[k], i);
        const Real scale = std::max<Real>(std::max(std::abs(a), std::abs(b)), Real(1));
        if (std::abs(a - b) > tol * scale) return false;
      }
    }
    return true;
  }

 private:
  void locate_diagonal() {
    diag_pos_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
      const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
      const auto it = std::lower_bound(first, last, i);
      if (it == last || *it != i) {
        throw std::invalid_argument("CsrMatrix: row " + std::to_string(i) + " has no diagonal entry");
      }
      diag_pos_[i] = static_cast<std::size_t>(it - col_idx_.begin());
      if (vals_[diag_pos_[i]] == Real(0)) {
        throw std::invalid_argument("CsrMatrix: row " + std::to_string(i) + " has a zero diagonal");
      }
    }
  }

  void check_symmetry(Real tol) const {
    if (!is_symmetric(tol)) throw std::invalid_argument("CsrMatrix: matrix is not symmetric");
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<Real> vals_;
  std::vector<std::size_t> diag_pos_;
};

using SparseMatrix = CsrMatrix<double>;

namespace detail {
inline void require_size(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(expected) + " vs " +
                                std::to_string(got) + ")");
  }
}
}  // namespace detail

/// y = A x.
template <class Real>
void matvec_into(const CsrMatrix<Real>& a, std::span<const Real> x, std::span<Real> y) {
  detail::require_size(a.size(), x.size(), "matvec");
  detail::require_size(a.size(), y.size(), "matvec");
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    Real sum = 0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) sum += v[k] * x[ci[k]];
    y[i] = sum;
  }
}

template <class Real>
std::vector<Real> matvec(const CsrMatrix<Real>& a, const std::vector<Real>& x) {
  std::vector<Real> y(a.size());
  matvec_into<Real>(a, x, y);
  return y;
}

/// out = (1 - w) x + w D^{-1} (b - (L + U) x). `out` must not alias `x`.
template <class Real>
void weighted_jacobi_sweep_into(const CsrMatrix<Real>& a, std::span<const Real> x, std::span<const Real> b, Real omega,
                                std::span<Real> out) {
  detail::require_size(a.size(), x.size(), "weighted_jacobi_sweep");
  detail::require_size(a.size(), b.size(), "weighted_jacobi_sweep");
  detail::require_size(a.size(), out.size(), "weighted_jacobi_sweep");
  if (!std::isfinite(omega)) throw std::invalid_argument("weighted_jacobi_sweep: omega must be finite");
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    Real off = 0;
    Real diag = 0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      if (ci[k] == i) {
        diag = v[k];
      } else {
        off += v[k] * x[ci[k]];
      }
    }
    out[i] = (Real(1) - omega) * x[i] + omega * (b[i] - off) / diag;
  }
}

template <class Real>
std::vector<Real> weighted_jacobi_sweep(const CsrMatrix<Real>& a, const std::vector<Real>& x,
                                        const std::vector<Real>& b, Real omega) {
  std::vector<Real> out(a.size());
  weighted_jacobi_sweep_into<Real>(a, x, b, omega, out);
  return out;
}

/// ||b - A x||_2, accumulated in long double.
template <class Real>
Real residual_l2(const CsrMatrix<Real>& a, std::span<const Real> x, std::span<const Real> b) {
  detail::require_size(a.size(), x.size(), "residual_l2");
  detail::require_size(a.size(), b.size(), "residual_l2");
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  long double sum_sq = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    long double ax = 0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) ax += static_cast<long double>(v[k]) * x[ci[k]];
    const long double r = static_cast<long double>(b[i]) - ax;
    sum_sq += r * r;
  }
  return static_cast<Real>(std::sqrt(sum_sq));
}

template <class Real>
Real residual_l2(const CsrMatrix<Real>& a, const std::vector<Real>& x, const std::vector<Real>& b) {
  return residual_l2<Real>(a, std::span<const Real>(x), std::span<const Real>(b));
}

/// ||b - A x||_2 / ||b - A x0||_2.
template <class Real>
Real relative_residual_l2(const CsrMatrix<Real>& a, const std::vector<Real>& x, const std::vector<Real>& b,
                          const std::vector<Real>& x0) {
  const Real r0 = residual_l2(a, x0, b);
  if (r0 == Real(0)) throw std::domain_error("relative_residual_l2: initial residual is zero");
  return residual_l2(a, x, b) / r0;
}

/// ||x_new - x_old||_inf.
template <class Real>
Real diff_inf(std::span<const Real> x_new, std::span<const Real> x_old) {
  detail::require_size(x_new.size(), x_old.size(), "diff_inf");
  Real m = 0;
  for (std::size_t i = 0; i < x_new.size(); ++i) m = std::max(m, std::abs(x_new[i] - x_old[i]));
  return m;
}

template <class Real>
Real diff_inf(const std::vector<Real>& x_new, const std::vector<Real>& x_old) {
  return diff_inf<Real>(std::span<const Real>(x_new), std::span<const Real>(x_old));
}

/// ||D^{-1} (b - A x)||_inf: the change a unit-weight Jacobi sweep would make.
template <class Real>
Real jacobi_correction_inf(const CsrMatrix<Real>& a, std::span<const Real> x, std::span<const Real> b) {
  detail::require_size(a.size(), x.size(), "jacobi_correction_inf");
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  Real m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Real ax = 0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) ax += v[k] * x[ci[k]];
    m = std::max(m, std::abs((b[i] - ax) / a.diagonal(i)));
  }
  return m;
}

}  // namespace srj
