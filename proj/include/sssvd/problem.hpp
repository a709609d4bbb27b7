#pragma once

#include <stdexcept>
#include <utility>
#include <variant>

#include "sssvd/core.hpp"

namespace sssvd {

/// Rectangular operator A, dense or sparse. Normalized so rows >= cols:
/// inputs with m < n are stored transposed and flagged, and the driver
/// swaps the left/right singular vectors back on output.
template <typename Scalar = double>
class ProblemMatrix {
 public:
  using Dense = Matrix<Scalar>;
  using Sparse = SparseMatrix<Scalar>;

  static ProblemMatrix from_dense(Dense a) {
    bool transposed = a.rows() < a.cols();
    if (transposed) a = Dense(a.transpose());
    check_finite(a);
    return ProblemMatrix(std::move(a), transposed);
  }

  static ProblemMatrix from_sparse(Sparse a) {
    bool transposed = a.rows() < a.cols();
    if (transposed) a = Sparse(a.transpose());
    for (int k = 0; k < a.outerSize(); ++k)
      for (typename Sparse::InnerIterator it(a, k); it; ++it)
        if (!std::isfinite(it.value()))
          throw std::invalid_argument("ProblemMatrix: NaN/Inf entry");
    return ProblemMatrix(std::move(a), transposed);
  }

  Index rows() const {
    return std::visit([](const auto& a) { return a.rows(); }, storage_);
  }
  Index cols() const {
    return std::visit([](const auto& a) { return a.cols(); }, storage_);
  }
  bool transposed() const { return transposed_; }
  bool is_sparse() const { return std::holds_alternative<Sparse>(storage_); }

  const Dense& dense() const { return std::get<Dense>(storage_); }
  const Sparse& sparse() const { return std::get<Sparse>(storage_); }

  Matrix<Scalar> apply(const Eigen::Ref<const Matrix<Scalar>>& x) const {
    return std::visit([&](const auto& a) -> Matrix<Scalar> { return a * x; }, storage_);
  }
  Matrix<Scalar> apply_adjoint(const Eigen::Ref<const Matrix<Scalar>>& x) const {
    return std::visit([&](const auto& a) -> Matrix<Scalar> { return a.transpose() * x; },
                      storage_);
  }

  /// Densified copy regardless of storage (oracle and tests only).
  Dense to_dense() const {
    if (is_sparse()) return Dense(sparse());
    return dense();
  }

  void scale(Scalar factor) {
    std::visit([&](auto& a) { a *= factor; }, storage_);
  }

 private:
  ProblemMatrix(Dense a, bool transposed) : storage_(std::move(a)), transposed_(transposed) {}
  ProblemMatrix(Sparse a, bool transposed) : storage_(std::move(a)), transposed_(transposed) {}

  static void check_finite(const Dense& a) {
    if (!a.allFinite()) throw std::invalid_argument("ProblemMatrix: NaN/Inf entry");
  }

  std::variant<Dense, Sparse> storage_;
  bool transposed_ = false;
};

/// G = A^T A, symmetrized. The Gram operator whose resolvent the
/// quadrature samples.
template <typename Scalar>
Matrix<Scalar> form_gram(const ProblemMatrix<Scalar>& a, Index size_cap = 8192) {
  const Index n = a.cols();
  if (n > size_cap)
    throw std::length_error("form_gram: column count exceeds the dense Gram cap");
  Matrix<Scalar> g;
  if (a.is_sparse()) {
    SparseMatrix<Scalar> gs = a.sparse().transpose() * a.sparse();
    g = Matrix<Scalar>(gs);
  } else {
    g.noalias() = a.dense().transpose() * a.dense();
  }
  g = ((g + g.transpose()) / Scalar(2)).eval();
  return g;
}

}  // namespace sssvd
