#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <stdexcept>
#include <string>

namespace sssvd {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar>;

/// Numerical failure inside the solver pipeline (singular factorization,
/// non-convergence, ...). CLI maps these to exit code 3; configuration
/// errors are reported through std::invalid_argument / std::domain_error
/// and map to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// The stacked moment matrix vanished: the filter annihilated the whole
/// starting block, i.e. no spectrum inside the target interval.
class EmptySubspaceError : public NumericalError {
 public:
  explicit EmptySubspaceError(const std::string& what) : NumericalError(what) {}
};

}  // namespace sssvd
