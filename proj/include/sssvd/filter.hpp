#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "sssvd/contour.hpp"
#include "sssvd/core.hpp"

namespace sssvd {

/// Rational filter induced by the quadrature rule:
///   f(sigma)   = sum_j w_j / (t_j - sigma^2)        (Identity)
///   f_g(sigma) = sum_j w_j / (g(t_j) - sigma^2)     (Exp)
/// ~1 on the target interval, decaying outside; the decay ratios govern
/// the subspace accuracy.
template <typename Scalar>
std::complex<Scalar> eval_filter(const ContourRule<Scalar>& rule, Scalar sigma) {
  using Complex = std::complex<Scalar>;
  const Complex s2(sigma * sigma, Scalar(0));
  Complex half_sum(0);
  const Index half = rule.count() / 2;
  for (Index j = 0; j < half; ++j)
    half_sum += rule.weights()[j] / (rule.shift(j) - s2);
  // conjugate pairs double the real part and cancel the imaginary part
  return Complex(Scalar(2) * half_sum.real(), Scalar(0));
}

template <typename Scalar = double>
struct FilterProfile {
  std::vector<Scalar> grid;
  std::vector<Scalar> values;  // |f(sigma)|
};

template <typename Scalar>
FilterProfile<Scalar> filter_profile(const ContourRule<Scalar>& rule, Scalar sigma_min,
                                     Scalar sigma_max, Index points, bool log_spacing) {
  if (!(sigma_min > Scalar(0)) || !(sigma_min < sigma_max))
    throw std::invalid_argument("filter_profile: need 0 < sigma_min < sigma_max");
  if (points < 1) throw std::invalid_argument("filter_profile: need at least one point");
  FilterProfile<Scalar> prof;
  prof.grid.reserve(points);
  prof.values.reserve(points);
  for (Index i = 0; i < points; ++i) {
    const Scalar frac = points == 1 ? Scalar(0) : Scalar(i) / Scalar(points - 1);
    const Scalar sigma =
        log_spacing ? std::exp(std::log(sigma_min) + frac * (std::log(sigma_max) - std::log(sigma_min)))
                    : sigma_min + frac * (sigma_max - sigma_min);
    prof.grid.push_back(sigma);
    prof.values.push_back(std::abs(eval_filter(rule, sigma)));
  }
  return prof;
}

/// Contraction factor |f(sigma_reference)/f(sigma_target)|^ell, the
/// per-index error bound factor of the subspace iteration.
template <typename Scalar>
Scalar convergence_ratio(const ContourRule<Scalar>& rule, Scalar sigma_target,
                         Scalar sigma_reference, Index ell) {
  const Scalar ft = std::abs(eval_filter(rule, sigma_target));
  if (ft <= Scalar(1e-30))
    throw std::domain_error("convergence_ratio: |f(sigma_target)| vanishes");
  const Scalar fr = std::abs(eval_filter(rule, sigma_reference));
  return std::pow(fr / ft, Scalar(ell));
}

}  // namespace sssvd
