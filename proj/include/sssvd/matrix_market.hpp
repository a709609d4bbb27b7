#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sssvd/core.hpp"
#include "sssvd/problem.hpp"

namespace sssvd {

class MatrixMarketError : public std::runtime_error {
 public:
  MatrixMarketError(const std::string& path, Index line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what) {}
};

namespace detail {
inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace detail

/// Matrix Market reader: real `array` and `coordinate` formats, general
/// and (skew-)symmetric storage. Duplicate coordinate entries are summed
/// per the format convention; `complex` and `pattern` fields are
/// rejected.
template <typename Scalar = double>
ProblemMatrix<Scalar> read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_market: cannot open " + path);

  Index line_no = 1;
  std::string header;
  if (!std::getline(in, header)) throw MatrixMarketError(path, 1, "empty file");
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || detail::lower(object) != "matrix")
    throw MatrixMarketError(path, 1, "not a MatrixMarket matrix header");
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (field == "complex" || field == "pattern")
    throw MatrixMarketError(path, 1, "unsupported field '" + field + "' (real data required)");
  if (field != "real" && field != "integer" && field != "double")
    throw MatrixMarketError(path, 1, "unknown field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
    throw MatrixMarketError(path, 1, "unsupported symmetry '" + symmetry + "'");

  auto next_data_line = [&](std::string& out_line) {
    while (std::getline(in, out_line)) {
      ++line_no;
      const auto first = out_line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (out_line[first] == '%') continue;
      return true;
    }
    return false;
  };

  std::string line;
  if (!next_data_line(line)) throw MatrixMarketError(path, line_no, "missing size line");

  std::istringstream ls(line);
  if (format == "array") {
    Index rows, cols;
    if (!(ls >> rows >> cols) || rows < 1 || cols < 1)
      throw MatrixMarketError(path, line_no, "bad array size line");
    Matrix<Scalar> a(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      const Index imin = symmetry == "general" ? 0 : j;
      for (Index i = imin; i < rows; ++i) {
        if (!next_data_line(line))
          throw MatrixMarketError(path, line_no, "unexpected end of array data");
        std::istringstream vs(line);
        Scalar value;
        if (!(vs >> value)) throw MatrixMarketError(path, line_no, "bad array value");
        a(i, j) = value;
        if (symmetry == "symmetric") a(j, i) = value;
        if (symmetry == "skew-symmetric") a(j, i) = -value;
      }
    }
    return ProblemMatrix<Scalar>::from_dense(std::move(a));
  }

  if (format != "coordinate")
    throw MatrixMarketError(path, 1, "unknown format '" + format + "'");

  Index rows, cols, nnz;
  if (!(ls >> rows >> cols >> nnz) || rows < 1 || cols < 1 || nnz < 0)
    throw MatrixMarketError(path, line_no, "bad coordinate size line");
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<size_t>(nnz));
  for (Index k = 0; k < nnz; ++k) {
    if (!next_data_line(line))
      throw MatrixMarketError(path, line_no, "unexpected end of coordinate data");
    std::istringstream vs(line);
    Index i, j;
    Scalar value;
    if (!(vs >> i >> j >> value))
      throw MatrixMarketError(path, line_no, "bad coordinate entry");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw MatrixMarketError(path, line_no, "index out of range");
    triplets.emplace_back(i - 1, j - 1, value);
    if (symmetry != "general" && i != j) {
      triplets.emplace_back(j - 1, i - 1, symmetry == "symmetric" ? value : -value);
    }
  }
  SparseMatrix<Scalar> a(rows, cols);
  a.setFromTriplets(triplets.begin(), triplets.end());  // duplicates are summed
  return ProblemMatrix<Scalar>::from_sparse(std::move(a));
}

/// Writes dense matrices in array format, sparse in coordinate format,
/// with 17 significant digits so values round-trip.
template <typename Scalar>
void write_matrix_market(const std::string& path, const ProblemMatrix<Scalar>& a,
                         const std::string& comment = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
  out << std::setprecision(17);
  // emit the caller's original orientation, undoing the internal
  // rows >= cols normalization
  const bool flip = a.transposed();
  if (!a.is_sparse()) {
    out << "%%MatrixMarket matrix array real general\n";
    if (!comment.empty()) out << "% " << comment << "\n";
    Matrix<Scalar> d = flip ? Matrix<Scalar>(a.dense().transpose()) : a.dense();
    out << d.rows() << " " << d.cols() << "\n";
    for (Index j = 0; j < d.cols(); ++j)
      for (Index i = 0; i < d.rows(); ++i) out << d(i, j) << "\n";
  } else {
    out << "%%MatrixMarket matrix coordinate real general\n";
    if (!comment.empty()) out << "% " << comment << "\n";
    SparseMatrix<Scalar> s = flip ? SparseMatrix<Scalar>(a.sparse().transpose()) : a.sparse();
    out << s.rows() << " " << s.cols() << " " << s.nonZeros() << "\n";
    for (int k = 0; k < s.outerSize(); ++k)
      for (typename SparseMatrix<Scalar>::InnerIterator it(s, k); it; ++it)
        out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
  }
  if (!out) throw std::runtime_error("write_matrix_market: write failed for " + path);
}

}  // namespace sssvd
