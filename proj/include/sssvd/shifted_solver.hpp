#pragma once

#include <Eigen/LU>

#include <complex>
#include <stdexcept>

#include "sssvd/core.hpp"

namespace sssvd {

/// LU factors of (z I - G) for one complex shift, reusable across blocks
/// of right-hand sides. G symmetric real keeps every shift with Im z != 0
/// safely off the spectrum.
template <typename Scalar = double>
class ShiftedFactorization {
 public:
  using Complex = std::complex<Scalar>;

  ShiftedFactorization(const Matrix<Scalar>& gram, Complex shift)
      : shift_(shift), n_(gram.rows()) {
    if (gram.rows() != gram.cols())
      throw std::invalid_argument("ShiftedFactorization: Gram matrix must be square");
    ComplexMatrix<Scalar> shifted = (-gram).template cast<Complex>();
    shifted.diagonal().array() += shift;
    lu_.compute(shifted);
    const Scalar scale = gram.cwiseAbs().maxCoeff() + std::abs(shift);
    const Scalar floor = Scalar(1e-30) * scale;
    if (lu_.matrixLU().diagonal().cwiseAbs().minCoeff() <= floor)
      throw NumericalError("ShiftedFactorization: shift numerically on the spectrum");
  }

  Complex shift() const { return shift_; }
  Index size() const { return n_; }

  ComplexMatrix<Scalar> solve(const ComplexMatrix<Scalar>& rhs) const {
    if (rhs.rows() != n_)
      throw std::invalid_argument("ShiftedFactorization: right-hand side dimension mismatch");
    return lu_.solve(rhs);
  }
  ComplexMatrix<Scalar> solve_real(const Matrix<Scalar>& rhs) const {
    return solve(rhs.template cast<Complex>());
  }

 private:
  Complex shift_;
  Index n_;
  Eigen::PartialPivLU<ComplexMatrix<Scalar>> lu_;
};

/// Backend shared by the moment accumulation. Dense direct factorization
/// matching the desk-scale regime; a sparse or iterative backend can slot
/// in behind the same two calls without touching the moment code.
template <typename Scalar = double>
class DenseShiftedSolver {
 public:
  using Complex = std::complex<Scalar>;
  using Factorization = ShiftedFactorization<Scalar>;

  explicit DenseShiftedSolver(Matrix<Scalar> gram) : gram_(std::move(gram)) {}

  const Matrix<Scalar>& gram() const { return gram_; }
  Index size() const { return gram_.rows(); }

  Factorization factor(Complex shift) const { return Factorization(gram_, shift); }

  /// Bytes one factorization keeps alive; used by the cache policy.
  std::size_t factor_bytes() const {
    const std::size_t n = static_cast<std::size_t>(gram_.rows());
    return n * n * sizeof(Complex);
  }

 private:
  Matrix<Scalar> gram_;
};

template <typename Scalar>
ShiftedFactorization<Scalar> factor_shift(const Matrix<Scalar>& gram,
                                          std::complex<Scalar> shift) {
  return ShiftedFactorization<Scalar>(gram, shift);
}

template <typename Scalar>
ComplexMatrix<Scalar> solve_block(const ShiftedFactorization<Scalar>& fact,
                                  const ComplexMatrix<Scalar>& rhs) {
  return fact.solve(rhs);
}

}  // namespace sssvd
