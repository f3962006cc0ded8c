#pragma once

#include <algorithm>
#include <cmath>

#include "lube/activations.hpp"
#include "lube/error.hpp"
#include "lube/types.hpp"

namespace lube {

// Two objectives over the raw output pair (u, l), evaluated without ranking:
// both are symmetric under swapping u and l, so training never needs to know
// which output will end up on top.

struct LossConfig {
  Real k1 = 2.0;     // coverage term weight
  Real k2 = 1.0;     // width term weight
  Real lambda = 4.0; // penalty multiplier for points outside the interval

  void validate() const {
    require(k1 > 0.0, "k1 must be > 0, got ", k1);
    require(k2 > 0.0, "k2 must be > 0, got ", k2);
    require(lambda >= 0.0, "lambda must be >= 0, got ", lambda);
  }
};

// 1 when y falls strictly outside [min(u,l), max(u,l)]; boundary counts as
// inside. Constant with respect to u and l when differentiating.
inline Real step_gamma(Real u, Real l, Real y) {
  Real hi = std::max(u, l);
  Real lo = std::min(u, l);
  return (y < lo || y > hi) ? 1.0 : 0.0;
}

// Signed distance from y to the nearest interval edge, measured through the
// midpoint: |y - mid| - halfwidth. Positive outside, negative inside.
inline Real boundary_distance(Real u, Real l, Real y) {
  return std::abs(y - (u + l) / 2.0) - std::abs(u - l) / 2.0;
}

// Coverage loss: distance to the midpoint, plus a lambda-weighted surcharge
// on the edge distance when the point escapes the interval.
inline Real loss_f1(Real u, Real l, Real y, const LossConfig& cfg = {}) {
  Real mid = (u + l) / 2.0;
  Real gamma = step_gamma(u, l, y);
  return cfg.k1 * (std::abs(y - mid) + cfg.lambda * gamma * boundary_distance(u, l, y));
}

// Width loss: proportional to the interval width.
inline Real loss_f2(Real u, Real l, const LossConfig& cfg = {}) {
  return cfg.k2 * std::abs(u - l);
}

struct LossGrad {
  Real du = 0.0;
  Real dl = 0.0;
};

// Subgradients with sign(0) = 0 at the kinks; gamma is held constant at its
// forward value rather than differentiated through the jump.
inline LossGrad loss_f1_grad(Real u, Real l, Real y, const LossConfig& cfg = {}) {
  Real mid = (u + l) / 2.0;
  Real s = sign0(y - mid);       // d|y - mid|/dmid = -s
  Real t = sign0(u - l);         // d|u - l|/du = t
  Real gamma = step_gamma(u, l, y);
  LossGrad g;
  g.du = cfg.k1 * (-s / 2.0 + cfg.lambda * gamma * (-s / 2.0 - t / 2.0));
  g.dl = cfg.k1 * (-s / 2.0 + cfg.lambda * gamma * (-s / 2.0 + t / 2.0));
  return g;
}

inline LossGrad loss_f2_grad(Real u, Real l, const LossConfig& cfg = {}) {
  Real t = sign0(u - l);
  return {cfg.k2 * t, -cfg.k2 * t};
}

} // namespace lube
