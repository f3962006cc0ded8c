#pragma once

#include <cmath>

#include "lube/types.hpp"

namespace lube {

inline Real sigmoid(Real x) { return 1.0 / (1.0 + std::exp(-x)); }
inline Real relu(Real x) { return x > 0.0 ? x : 0.0; }

// Elementwise activations as expression-returning free functions; evaluate
// into a concrete Vector at the call site.
template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& v) {
  return (1.0 / (1.0 + (-v.array()).exp())).matrix();
}

template <typename Derived>
auto tanh(const Eigen::MatrixBase<Derived>& v) {
  return v.array().tanh().matrix();
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& v) {
  return v.array().max(0.0).matrix();
}

// Derivatives from the activation value (sigmoid, tanh) or the
// pre-activation (relu). relu_deriv(0) is 0 by convention.
inline Real sigmoid_deriv(Real s) { return s * (1.0 - s); }
inline Real tanh_deriv(Real t) { return 1.0 - t * t; }
inline Real relu_deriv(Real z) { return z > 0.0 ? 1.0 : 0.0; }

template <typename Derived>
auto sigmoid_deriv(const Eigen::MatrixBase<Derived>& s) {
  return (s.array() * (1.0 - s.array())).matrix();
}

template <typename Derived>
auto tanh_deriv(const Eigen::MatrixBase<Derived>& t) {
  return (1.0 - t.array().square()).matrix();
}

template <typename Derived>
auto relu_deriv(const Eigen::MatrixBase<Derived>& z) {
  return (z.array() > 0.0).template cast<Real>().matrix();
}

// sign with sign(0) = 0; the subgradient convention at every |.| kink.
inline Real sign0(Real x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

} // namespace lube
