#pragma once

#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "sssvd/core.hpp"
#include "sssvd/problem.hpp"

namespace sssvd {

enum class ModelKind { Model1, Model2 };

/// Synthetic benchmark problems: A = U Sigma V^T with random orthogonal
/// factors. Model 1 spaces the singular values uniformly
/// (0.005, 0.015, ...), model 2 uniformly on the log scale
/// (10^-10, 10^-9.95, ...). The reference size is 1000 x 200; other
/// sizes extend the same spacing rules.
template <typename Scalar = double>
struct ModelSpec {
  ModelKind which = ModelKind::Model1;
  Index rows = 1000;
  Index cols = 200;
  std::uint64_t seed = 7;
};

template <typename Scalar = double>
struct ModelProblem {
  ProblemMatrix<Scalar> matrix;
  Matrix<Scalar> left;    // exact U, rows x cols
  Vector<Scalar> sigma;   // exact singular values, ascending as constructed
  Matrix<Scalar> right;   // exact V, cols x cols
};

template <typename Scalar>
Vector<Scalar> model_spectrum(ModelKind which, Index n) {
  Vector<Scalar> s(n);
  for (Index i = 0; i < n; ++i) {
    if (which == ModelKind::Model1)
      s(i) = Scalar(0.005) + Scalar(0.01) * Scalar(i);
    else
      s(i) = std::pow(Scalar(10), Scalar(-10) + Scalar(0.05) * Scalar(i));
  }
  return s;
}

template <typename Scalar>
ModelProblem<Scalar> build_model(const ModelSpec<Scalar>& spec) {
  if (spec.rows < spec.cols) throw std::invalid_argument("build_model: needs rows >= cols");
  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<Scalar> dist(Scalar(0), Scalar(1));
  Matrix<Scalar> gu(spec.rows, spec.cols), gv(spec.cols, spec.cols);
  for (Index j = 0; j < spec.cols; ++j)
    for (Index i = 0; i < spec.rows; ++i) gu(i, j) = dist(gen);
  for (Index j = 0; j < spec.cols; ++j)
    for (Index i = 0; i < spec.cols; ++i) gv(i, j) = dist(gen);

  Eigen::HouseholderQR<Matrix<Scalar>> qru(gu);
  Matrix<Scalar> u = qru.householderQ() * Matrix<Scalar>::Identity(spec.rows, spec.cols);
  Eigen::HouseholderQR<Matrix<Scalar>> qrv(gv);
  Matrix<Scalar> v = qrv.householderQ() * Matrix<Scalar>::Identity(spec.cols, spec.cols);

  Vector<Scalar> sigma = model_spectrum<Scalar>(spec.which, spec.cols);
  Matrix<Scalar> a = u * sigma.asDiagonal() * v.transpose();
  return {ProblemMatrix<Scalar>::from_dense(std::move(a)), std::move(u), std::move(sigma),
          std::move(v)};
}

template <typename Scalar = double>
struct NormalizedProblem {
  ProblemMatrix<Scalar> matrix;
  Scalar scale;  // estimated sigma_max of the input
};

/// Rescales A so the largest singular value is ~1. sigma_max comes from
/// power iteration on A^T A, stopped when the Rayleigh residual
/// ||Gv - lambda v|| <= tol * lambda, which bounds the eigenvalue error
/// by tol * lambda for the symmetric G.
template <typename Scalar>
NormalizedProblem<Scalar> normalize_spectrum(ProblemMatrix<Scalar> a,
                                             Scalar tol = Scalar(1e-6),
                                             Index max_iterations = 20000) {
  const Index n = a.cols();
  Vector<Scalar> v = Vector<Scalar>::Constant(n, Scalar(1) / std::sqrt(Scalar(n)));
  // deterministic perturbation so v is not orthogonal to the top eigenvector
  for (Index i = 0; i < n; ++i) v(i) += Scalar(0.01) * std::sin(Scalar(i + 1));
  v /= v.norm();

  Scalar lambda = Scalar(0);
  for (Index it = 0; it < max_iterations; ++it) {
    Vector<Scalar> gv = a.apply_adjoint(a.apply(v));
    lambda = v.dot(gv);
    if ((gv - lambda * v).norm() <= tol * lambda) break;
    const Scalar norm = gv.norm();
    if (norm == Scalar(0)) throw std::invalid_argument("normalize_spectrum: zero matrix");
    v = gv / norm;
  }
  const Scalar scale = std::sqrt(lambda);
  a.scale(Scalar(1) / scale);
  return {std::move(a), scale};
}

}  // namespace sssvd
