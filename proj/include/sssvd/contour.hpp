#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sssvd/core.hpp"
#include "sssvd/transform.hpp"

namespace sssvd {

/// N-point trapezoidal quadrature on an ellipse with center `gamma`,
/// real half-axis `rho` and aspect ratio `aspect`, enclosing the target
/// interval [a,b] mapped through the spectral transform.
///
/// Node layout: slots 0..N/2-1 hold the upper-half-plane nodes in
/// increasing angle; slot j+N/2 holds the complex conjugate of slot j.
/// The mirrored half is constructed with std::conj from the same theta
/// evaluations, so the conjugate-pair identities are bit-exact.
template <typename Scalar = double>
class ContourRule {
 public:
  using Complex = std::complex<Scalar>;

  ContourRule(Scalar a, Scalar b, Index count, Scalar aspect,
              SpectralTransform<Scalar> transform)
      : a_(a), b_(b), count_(count), aspect_(aspect), transform_(transform) {
    if (!(a >= Scalar(0)) || !(a < b))
      throw std::invalid_argument("ContourRule: need 0 <= a < b");
    if (count < 4 || count % 2 != 0)
      throw std::invalid_argument("ContourRule: quadrature count must be even and >= 4");
    if (!(aspect > Scalar(0)) || aspect > Scalar(1))
      throw std::invalid_argument("ContourRule: aspect ratio must lie in (0,1]");
    if (transform.kind() == TransformKind::Exp && a == Scalar(0))
      throw std::domain_error("ContourRule: Exp transform requires a > 0 (g^{-1}(0) diverges)");

    if (transform.kind() == TransformKind::Identity) {
      center_ = (a * a + b * b) / Scalar(2);
      radius_ = (b * b - a * a) / Scalar(2);
    } else {
      center_ = std::log(a) + std::log(b);
      radius_ = std::log(b) - std::log(a);
    }

    const Index half = count / 2;
    nodes_.resize(count);
    weights_.resize(count);
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    for (Index j = 0; j < half; ++j) {
      const Scalar theta = (two_pi / Scalar(count)) * (Scalar(j) + Scalar(0.5));
      const Scalar c = std::cos(theta), s = std::sin(theta);
      const Complex t(center_ + radius_ * c, radius_ * aspect_ * s);
      Complex w(radius_ / Scalar(count) * aspect_ * c, radius_ / Scalar(count) * s);
      if (transform.kind() == TransformKind::Exp) w *= std::exp(t);
      nodes_[j] = t;
      weights_[j] = w;
      nodes_[j + half] = std::conj(t);
      weights_[j + half] = std::conj(w);
    }
  }

  Scalar interval_a() const { return a_; }
  Scalar interval_b() const { return b_; }
  Scalar center() const { return center_; }
  Scalar radius() const { return radius_; }
  Scalar aspect() const { return aspect_; }
  Index count() const { return count_; }
  const SpectralTransform<Scalar>& transform() const { return transform_; }

  const std::vector<Complex>& nodes() const { return nodes_; }
  const std::vector<Complex>& weights() const { return weights_; }

  /// Shift applied to the Gram operator at node j: g(t_j).
  Complex shift(Index j) const { return transform_.g(nodes_[j]); }

 private:
  Scalar a_, b_;
  Index count_;
  Scalar aspect_;
  SpectralTransform<Scalar> transform_;
  Scalar center_ = 0, radius_ = 0;
  std::vector<Complex> nodes_;
  std::vector<Complex> weights_;
};

template <typename Scalar = double>
ContourRule<Scalar> build_contour(Scalar a, Scalar b, Index count, Scalar aspect,
                                  SpectralTransform<Scalar> transform) {
  return ContourRule<Scalar>(a, b, count, aspect, transform);
}

/// Upper-half node/weight pairs; sums over these doubled through 2*Re(.)
/// reproduce the full-rule sum on real data.
template <typename Scalar>
struct HalfRule {
  std::vector<std::complex<Scalar>> nodes;
  std::vector<std::complex<Scalar>> weights;
};

template <typename Scalar>
HalfRule<Scalar> half_rule(const ContourRule<Scalar>& rule) {
  const Index half = rule.count() / 2;
  HalfRule<Scalar> out;
  out.nodes.assign(rule.nodes().begin(), rule.nodes().begin() + half);
  out.weights.assign(rule.weights().begin(), rule.weights().begin() + half);
  return out;
}

/// |sum_j w_j t_j^k| for k = 0..kmax. The vanishing of these sums up to
/// k = N-2 is what the moment identities rest on. Accumulates in long
/// double: the node values are exact inputs here and the cancellation in
/// the sum is total, so extra accumulator precision keeps roundoff of the
/// power chain from dominating the result.
template <typename Scalar>
std::vector<Scalar> moment_condition_check(const ContourRule<Scalar>& rule, Index kmax) {
  if (rule.transform().kind() != TransformKind::Identity)
    throw std::invalid_argument("moment_condition_check: defined for Identity rules");
  using LC = std::complex<long double>;
  std::vector<Scalar> out(static_cast<size_t>(kmax) + 1);
  std::vector<LC> power(rule.count(), LC(1));
  std::vector<LC> node(rule.count());
  for (Index j = 0; j < rule.count(); ++j)
    node[j] = LC(rule.nodes()[j].real(), rule.nodes()[j].imag());
  for (Index k = 0; k <= kmax; ++k) {
    LC sum(0);
    for (Index j = 0; j < rule.count(); ++j) {
      const auto& w = rule.weights()[j];
      sum += LC(w.real(), w.imag()) * power[j];
      power[j] *= node[j];
    }
    out[static_cast<size_t>(k)] = static_cast<Scalar>(std::abs(sum));
  }
  return out;
}

}  // namespace sssvd
