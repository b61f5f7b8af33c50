#pragma once

// Geometry of T^3 = R^3 / Z^3.

#include "uulab/linalg.hpp"

namespace uulab {

/// Representative of x mod 1 in [0, 1).
template <class Real>
inline Real wrap_unit(Real x) {
  Real r = x - num::floor(x);
  // x - floor(x) rounds up to 1 for tiny negative x.
  if (r >= Real(1)) r = Real(0);
  return r;
}

/// Representative of x mod 1 in [-1/2, 1/2].
template <class Real>
inline Real wrap_centered(Real x) {
  return x - num::round(x);
}

template <class Real>
inline Vec3<Real> torus_reduce(const Vec3<Real>& p) {
  return {wrap_unit(p.x), wrap_unit(p.y), wrap_unit(p.z)};
}

/// Shortest lattice-translate difference q - p, componentwise in [-1/2, 1/2].
template <class Real>
inline Vec3<Real> torus_delta(const Vec3<Real>& p, const Vec3<Real>& q) {
  return {wrap_centered(q.x - p.x), wrap_centered(q.y - p.y), wrap_centered(q.z - p.z)};
}

/// Euclidean distance on the flat torus: the minimum over lattice translates.
/// The squared distance is separable, so the componentwise minimum equals the
/// minimum over the 27 adjacent translates for reduced inputs.
template <class Real>
inline Real torus_distance(const Vec3<Real>& p, const Vec3<Real>& q) {
  return norm(torus_delta(p, q));
}

}  // namespace uulab
