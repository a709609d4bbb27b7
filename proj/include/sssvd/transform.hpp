#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "sssvd/core.hpp"

namespace sssvd {

enum class TransformKind { Identity, Exp };

/// Monotone spectral map z = g(t) applied to the squared-singular-value
/// plane. Identity leaves the contour in the z-plane; Exp places it in
/// t = log(z), which spreads out log-clustered spectra.
template <typename Scalar = double>
class SpectralTransform {
 public:
  using Complex = std::complex<Scalar>;

  static SpectralTransform identity() { return SpectralTransform(TransformKind::Identity); }
  static SpectralTransform exponential() { return SpectralTransform(TransformKind::Exp); }

  TransformKind kind() const { return kind_; }

  Scalar g(Scalar t) const {
    return kind_ == TransformKind::Identity ? t : std::exp(t);
  }
  Complex g(const Complex& t) const {
    return kind_ == TransformKind::Identity ? t : std::exp(t);
  }
  Scalar g_inverse(Scalar z) const {
    if (kind_ == TransformKind::Identity) return z;
    if (!(z > Scalar(0)))
      throw std::domain_error("SpectralTransform: g_inverse of non-positive value under Exp");
    return std::log(z);
  }
  Scalar g_prime(Scalar t) const {
    return kind_ == TransformKind::Identity ? Scalar(1) : std::exp(t);
  }

 private:
  explicit SpectralTransform(TransformKind kind) : kind_(kind) {}
  TransformKind kind_;
};

inline const char* to_string(TransformKind kind) {
  return kind == TransformKind::Identity ? "identity" : "exp";
}

}  // namespace sssvd
