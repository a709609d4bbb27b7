#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sssvd/core.hpp"
#include "sssvd/extract.hpp"
#include "sssvd/moments.hpp"
#include "sssvd/problem.hpp"
#include "sssvd/transform.hpp"

namespace sssvd {

template <typename Scalar = double>
struct SpuriousVerdict {
  Vector<Scalar> tau;
  Scalar threshold = 0;  // epsilon * max(Sigma_S1)
  std::vector<bool> spurious;
};

template <typename Scalar = double>
struct ResidualReport {
  std::optional<Vector<Scalar>> exact;
  Vector<Scalar> estimated;
  std::optional<Index> calibration_index;  // i'
  std::optional<Scalar> mu;
};

/// ||A^T u_i - sigma_i v_i||_2 per triplet (one adjoint product for the
/// whole set).
template <typename Scalar>
Vector<Scalar> exact_residual(const ProblemMatrix<Scalar>& a, const TripletSet<Scalar>& set) {
  const Matrix<Scalar> atu = a.apply_adjoint(set.left);
  Vector<Scalar> out(set.count());
  for (Index i = 0; i < set.count(); ++i)
    out(i) = (atu.col(i) - set.sigma(i) * set.right.col(i)).norm();
  return out;
}

/// tau_i = ||q_i||^2 / ||q_i||^2_{Sigma^{-1}}; small tau means the Ritz
/// direction lives in the noise tail of the low-rank basis. Spurious
/// iff tau_i < epsilon * max(Sigma_S1) (relative rule: tau carries the
/// scale of Sigma_S1).
template <typename Scalar>
SpuriousVerdict<Scalar> detect_spurious(const TripletSet<Scalar>& set,
                                        const Vector<Scalar>& sigma_s1, Scalar epsilon) {
  if ((sigma_s1.array() <= Scalar(0)).any())
    throw std::invalid_argument("detect_spurious: Sigma_S1 must be positive");
  SpuriousVerdict<Scalar> verdict;
  verdict.tau.resize(set.count());
  verdict.threshold = epsilon * sigma_s1.maxCoeff();
  verdict.spurious.assign(set.count(), false);
  for (Index i = 0; i < set.count(); ++i) {
    const auto q = set.q.col(i);
    verdict.tau(i) = q.squaredNorm() / (q.array().square() / sigma_s1.array()).sum();
    verdict.spurious[i] = verdict.tau(i) < verdict.threshold || set.invalid[i];
  }
  return verdict;
}

namespace detail {

// Sigma_S1^{-1} with singular values below rcond * max zeroed. The
// retained basis keeps every direction above delta (1e-20 in the
// reference setup), so the inverse would otherwise amplify pure-roundoff
// directions into the estimate.
template <typename Scalar>
Vector<Scalar> stabilized_inverse(const Vector<Scalar>& sigma, Scalar rcond) {
  const Scalar cutoff = rcond * sigma.maxCoeff();
  return (sigma.array() >= cutoff).select(sigma.array().inverse(), Scalar(0)).matrix();
}

template <typename Scalar>
Vector<Scalar> transformed_residual_norms(const MomentBlocks<Scalar>& blocks,
                                          const ReducedBasis<Scalar>& basis,
                                          const TripletSet<Scalar>& set,
                                          const std::vector<Scalar>& eigenvalue_images,
                                          Scalar rcond, std::vector<bool>* overflow) {
  const Matrix<Scalar> splus = blocks.stacked_plus();
  const Vector<Scalar> inv = stabilized_inverse(basis.singular_values, rcond);
  Vector<Scalar> out(set.count());
  for (Index i = 0; i < set.count(); ++i) {
    if (set.sigma(i) <= Scalar(1e-30)) {
      out(i) = std::numeric_limits<Scalar>::infinity();
      if (overflow) (*overflow)[i] = true;
      continue;
    }
    const Vector<Scalar> coeff = basis.right * (inv.asDiagonal() * set.q.col(i));
    const Vector<Scalar> res =
        splus * coeff - eigenvalue_images[i] * (basis.left * set.q.col(i));
    out(i) = res.norm() / set.sigma(i);
  }
  return out;
}

}  // namespace detail

inline constexpr double kEstimatorRcondIdentity = 2e-15;
inline constexpr double kEstimatorRcondExp = 1e-14;

/// Cheap residual estimate for the Identity transform,
///   (1/sigma_i) || S_+ W_S1 Sigma_S1^{-1} q_i - sigma_i^2 U_S1 q_i ||,
/// computed entirely from the moment pass; A never enters.
template <typename Scalar>
Vector<Scalar> estimate_residual_linear(const MomentBlocks<Scalar>& blocks,
                                        const ReducedBasis<Scalar>& basis,
                                        const TripletSet<Scalar>& set,
                                        Scalar rcond = Scalar(kEstimatorRcondIdentity)) {
  std::vector<Scalar> images(set.count());
  for (Index i = 0; i < set.count(); ++i) images[i] = set.sigma(i) * set.sigma(i);
  return detail::transformed_residual_norms(blocks, basis, set, images, rcond, nullptr);
}

/// Nonlinear-transform estimate: the same formula with g^{-1}(sigma^2)
/// in place of sigma^2 gives residuals of the transformed problem; one
/// exact residual at the calibration triplet i' rescales them back.
/// i' is the non-spurious in-interval triplet with the largest tau.
template <typename Scalar>
ResidualReport<Scalar> estimate_residual_nonlinear(const MomentBlocks<Scalar>& blocks,
                                                   const ReducedBasis<Scalar>& basis,
                                                   const TripletSet<Scalar>& set,
                                                   const ProblemMatrix<Scalar>& a,
                                                   const SpectralTransform<Scalar>& transform,
                                                   const SpuriousVerdict<Scalar>& verdict,
                                                   Scalar rcond = Scalar(kEstimatorRcondExp)) {
  std::vector<Scalar> images(set.count());
  for (Index i = 0; i < set.count(); ++i)
    images[i] = set.sigma(i) > Scalar(1e-30)
                    ? transform.g_inverse(set.sigma(i) * set.sigma(i))
                    : Scalar(0);
  Vector<Scalar> tilde =
      detail::transformed_residual_norms(blocks, basis, set, images, rcond, nullptr);

  Index best = -1;
  for (Index i = 0; i < set.count(); ++i) {
    if (!set.in_interval[i] || verdict.spurious[i]) continue;
    if (best < 0 || verdict.tau(i) > verdict.tau(best)) best = i;
  }
  if (best < 0)
    throw NumericalError(
        "estimate_residual_nonlinear: no non-spurious in-interval triplet to calibrate with");

  const Scalar exact_at_best =
      (a.apply_adjoint(set.left.col(best)) - set.sigma(best) * set.right.col(best)).norm();
  const Scalar mu = exact_at_best / tilde(best);

  ResidualReport<Scalar> report;
  report.estimated = mu * tilde;
  report.estimated(best) = exact_at_best;  // mu cancels at i' exactly
  report.calibration_index = best;
  report.mu = mu;
  return report;
}

}  // namespace sssvd
