#pragma once

/// \file matrix_market.hpp
/// \brief Matrix Market coordinate I/O for CsrMatrix and dense vectors.

#include <cctype>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "srj/sparse_matrix.hpp"

namespace srj {

/// Writes `real symmetric` (lower triangle) when `symmetric`, else `real general`.
template <class Real>
void write_matrix_market(std::ostream& os, const CsrMatrix<Real>& a, bool symmetric = true) {
  std::vector<Triplet<Real>> entries;
  for (const auto& t : a.triplets()) {
    if (!symmetric || t.col <= t.row) entries.push_back(t);
  }
  os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
  os << a.size() << ' ' << a.size() << ' ' << entries.size() << '\n';
  os << std::setprecision(std::numeric_limits<Real>::max_digits10);
  for (const auto& t : entries) os << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value << '\n';
}

/// Reads coordinate `real`/`integer` matrices, `general` or `symmetric`.
inline SparseMatrix read_matrix_market(std::istream& is, SymmetryCheck symmetry = SymmetryCheck::require) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("matrix market: empty input");
  std::istringstream banner(line);
  std::string tag, object, format, field, kind;
  banner >> tag >> object >> format >> field >> kind;
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate") {
    throw std::runtime_error("matrix market: expected '%%MatrixMarket matrix coordinate' banner");
  }
  field = lower(field);
  kind = lower(kind);
  if (field != "real" && field != "integer") throw std::runtime_error("matrix market: unsupported field '" + field + "'");
  if (kind != "general" && kind != "symmetric") throw std::runtime_error("matrix market: unsupported symmetry '" + kind + "'");

  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream header(line);
  std::size_t rows = 0, cols = 0, nnz = 0;
  if (!(header >> rows >> cols >> nnz)) throw std::runtime_error("matrix market: bad size line");
  if (rows != cols) throw std::runtime_error("matrix market: matrix must be square");

  std::vector<Triplet<double>> entries;
  entries.reserve(kind == "symmetric" ? 2 * nnz : nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t i = 0, j = 0;
    double v = 0;
    if (!(is >> i >> j >> v)) throw std::runtime_error("matrix market: truncated entry list");
    if (i == 0 || j == 0 || i > rows || j > cols) throw std::runtime_error("matrix market: index out of range");
    entries.push_back({i - 1, j - 1, v});
    if (kind == "symmetric" && i != j) entries.push_back({j - 1, i - 1, v});
  }
  return SparseMatrix(rows, std::move(entries), symmetry);
}

/// Dense `array real general` column vector.
inline void write_matrix_market_vector(std::ostream& os, const Vector& v) {
  os << "%%MatrixMarket matrix array real general\n" << v.size() << " 1\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (double x : v) os << x << '\n';
}

}  // namespace srj
