#pragma once

/// \file spectral.hpp
/// \brief Dense spectral oracle for small systems (Eigen backed).
///
/// Nothing here is used by the solver; it exists to check sweeps and
/// schemes against the matrix form of the error propagation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "srj/sparse_matrix.hpp"

namespace srj {

inline constexpr std::size_t kDenseOracleLimit = 2000;

inline Eigen::MatrixXd to_dense(const SparseMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a.size()));
  for (const auto& t : a.triplets()) d(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
  return d;
}

/// B_J = -D^{-1} (L + U).
inline Eigen::MatrixXd dense_jacobi_matrix(const SparseMatrix& a) {
  Eigen::MatrixXd b = to_dense(a);
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    const double d = b(i, i);
    b.row(i) /= -d;
    b(i, i) = 0.0;
  }
  return b;
}

/// Eigenvalues of B_J, ascending.
///
/// With a positive diagonal the symmetric similar matrix
/// D^{-1/2} (-(L + U)) D^{-1/2} is diagonalised; otherwise a general
/// eigensolver is used and the spectrum must come out real.
inline std::vector<double> dense_jacobi_eigenvalues(const SparseMatrix& a) {
  if (a.size() > kDenseOracleLimit) throw std::invalid_argument("dense_jacobi_eigenvalues: matrix too large for dense oracle");
  const auto diag = a.diagonal();
  const bool positive = std::all_of(diag.begin(), diag.end(), [](double d) { return d > 0.0; });
  std::vector<double> out;
  if (positive && a.is_symmetric()) {
    Eigen::MatrixXd s = -to_dense(a);
    const auto n = s.rows();
    Eigen::VectorXd inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(diag[static_cast<std::size_t>(i)]);
    s = inv_sqrt.asDiagonal() * s * inv_sqrt.asDiagonal();
    s.diagonal().setZero();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("dense_jacobi_eigenvalues: eigensolver failed");
    out.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(dense_jacobi_matrix(a), false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("dense_jacobi_eigenvalues: eigensolver failed");
    for (const auto& z : solver.eigenvalues()) {
      if (std::abs(z.imag()) >= 1e-10) throw std::runtime_error("dense_jacobi_eigenvalues: complex eigenvalue");
      out.push_back(z.real());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// prod_i [(1 - w_i) I + w_i B_J], applied left to right in the given order.
inline Eigen::MatrixXd dense_srj_cycle_matrix(const SparseMatrix& a, const std::vector<double>& omegas) {
  const Eigen::MatrixXd bj = dense_jacobi_matrix(a);
  const auto n = bj.rows();
  Eigen::MatrixXd product = Eigen::MatrixXd::Identity(n, n);
  for (double w : omegas) {
    Eigen::MatrixXd step = w * bj;
    step.diagonal().array() += 1.0 - w;
    product = step * product;
  }
  return product;
}

/// Largest |eigenvalue| of a dense matrix.
inline double dense_spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("dense_spectral_radius: eigensolver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace srj
