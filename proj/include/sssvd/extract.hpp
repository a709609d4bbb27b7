#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sssvd/core.hpp"
#include "sssvd/moments.hpp"
#include "sssvd/problem.hpp"

namespace sssvd {

/// Approximate singular triplets in ascending sigma order. `q` keeps the
/// coordinates of each right vector in the reduced basis; the spurious
/// index tau and the cheap residual estimates are computed from it.
template <typename Scalar = double>
struct TripletSet {
  Vector<Scalar> sigma;
  Matrix<Scalar> left;   // m x t
  Matrix<Scalar> right;  // n x t
  Matrix<Scalar> q;      // r x t
  std::vector<bool> in_interval;
  std::vector<bool> invalid;  // nonpositive Ritz values et al., spurious by fiat

  Index count() const { return sigma.size(); }
};

template <typename Scalar = double>
struct ProjectedFactor {
  Matrix<Scalar> orthonormal;  // m x r, basis of R(A U_S1)
  Matrix<Scalar> triangular;   // r x r upper-triangular B
  bool rank_deficient = false;
};

/// Economy QR of A U_S1. A diagonal of B collapsing below
/// 1e-14 |B_11| signals basis directions in the numerical null space
/// of A (possible when the interval grazes 0).
template <typename Scalar>
ProjectedFactor<Scalar> project_qr(const ProblemMatrix<Scalar>& a,
                                   const ReducedBasis<Scalar>& basis) {
  const Matrix<Scalar> au = a.apply(basis.left);
  const Index r = au.cols();
  Eigen::HouseholderQR<Matrix<Scalar>> qr(au);
  ProjectedFactor<Scalar> out;
  out.orthonormal = qr.householderQ() * Matrix<Scalar>::Identity(au.rows(), r);
  out.triangular =
      qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
  const Scalar lead = std::abs(out.triangular(0, 0));
  for (Index i = 0; i < r; ++i)
    if (std::abs(out.triangular(i, i)) <= Scalar(1e-14) * lead) out.rank_deficient = true;
  return out;
}

template <typename Scalar = double>
struct SmallSvd {
  Matrix<Scalar> p;    // r x r orthogonal
  Vector<Scalar> phi;  // nonnegative, nonincreasing
  Matrix<Scalar> q;    // r x r orthogonal
};

template <typename Scalar>
SmallSvd<Scalar> svd_small(const Matrix<Scalar>& b) {
  Eigen::JacobiSVD<Matrix<Scalar>> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// (sigma_i, U~ p_i, V~ q_i) sorted ascending in sigma (stable, so exact
/// ties keep a deterministic order), each candidate flagged against the
/// closed target interval. Every candidate is kept; out-of-interval ones
/// are reported rather than dropped.
template <typename Scalar>
TripletSet<Scalar> assemble_triplets(const ProjectedFactor<Scalar>& projected,
                                     const ReducedBasis<Scalar>& basis,
                                     const SmallSvd<Scalar>& small, Scalar a, Scalar b) {
  const Index t = small.phi.size();
  std::vector<Index> order(t);
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return small.phi(i) < small.phi(j); });

  TripletSet<Scalar> set;
  set.sigma.resize(t);
  set.left.resize(projected.orthonormal.rows(), t);
  set.right.resize(basis.left.rows(), t);
  set.q.resize(small.q.rows(), t);
  set.in_interval.resize(t);
  set.invalid.assign(t, false);
  for (Index i = 0; i < t; ++i) {
    const Index src = order[i];
    set.sigma(i) = small.phi(src);
    set.left.col(i) = projected.orthonormal * small.p.col(src);
    set.right.col(i) = basis.left * small.q.col(src);
    set.q.col(i) = small.q.col(src);
    set.in_interval[i] = set.sigma(i) >= a && set.sigma(i) <= b;
  }
  return set;
}

/// Comparator route: Rayleigh-Ritz on the Gram operator within the same
/// reduced basis, sigma = sqrt(theta), u = A v / sigma. Squares the
/// spectrum before extraction, which is exactly the contrast the
/// two-sided route is designed to avoid.
template <typename Scalar>
TripletSet<Scalar> naive_eigen_route(const ProblemMatrix<Scalar>& a,
                                     const Matrix<Scalar>& gram,
                                     const ReducedBasis<Scalar>& basis, Scalar lo, Scalar hi) {
  Matrix<Scalar> h = basis.left.transpose() * gram * basis.left;
  h = ((h + h.transpose()) / Scalar(2)).eval();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(h);
  const Index t = eig.eigenvalues().size();

  TripletSet<Scalar> set;
  set.sigma.resize(t);
  set.left.resize(a.rows(), t);
  set.right.resize(basis.left.rows(), t);
  set.q.resize(basis.rank(), t);
  set.in_interval.resize(t);
  set.invalid.assign(t, false);
  for (Index i = 0; i < t; ++i) {
    const Scalar theta = eig.eigenvalues()(i);  // ascending
    const Scalar sigma = std::sqrt(std::max(theta, Scalar(0)));
    set.sigma(i) = sigma;
    set.q.col(i) = eig.eigenvectors().col(i);
    set.right.col(i) = basis.left * eig.eigenvectors().col(i);
    if (theta > Scalar(0)) {
      set.left.col(i) = a.apply(set.right.col(i)) / sigma;
    } else {
      set.left.col(i).setZero();
      set.invalid[i] = true;
    }
    set.in_interval[i] = sigma >= lo && sigma <= hi;
  }
  return set;
}

}  // namespace sssvd
