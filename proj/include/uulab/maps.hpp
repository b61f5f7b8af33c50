#pragma once

// The base automorphism A of T^3 and its two one-parameter unfoldings:
//
//   dissipative:  (2x + y + e s, x + 2y + z,       y + z)
//   conservative: (2x + y + e s, x + 2y + z + e s, y + z)
//
// with s = sin(2 pi x). Both fix the origin and commute with x -> -x.

#include <string>
#include <string_view>

#include "uulab/error.hpp"
#include "uulab/torus.hpp"

namespace uulab {

enum class Family { Linear, Dissipative, Conservative };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::Linear: return "L";
    case Family::Dissipative: return "D";
    case Family::Conservative: return "C";
  }
  return "?";
}

/// Accepts L/D/C or the full lower-case names.
inline Family parse_family(std::string_view s) {
  if (s == "L" || s == "linear") return Family::Linear;
  if (s == "D" || s == "dissipative") return Family::Dissipative;
  if (s == "C" || s == "conservative") return Family::Conservative;
  throw Error(Errc::InvalidArgument, "unknown family '" + std::string(s) + "'");
}

/// Where a point lives: reduced on the torus, or on the universal cover.
enum class Chart { Torus, Cover };

/// Critical perturbation size of the dissipative family: det Df vanishes at
/// x = 1/2 and the map stops being invertible.
inline const Scalar kFoldThreshold = 1 / kTwoPi;

class MapSpec {
 public:
  MapSpec() = default;
  MapSpec(Family family, Scalar epsilon) : family_(family), epsilon_(epsilon) {
    require(num::isfinite(epsilon) && epsilon >= 0, "epsilon must be finite and >= 0");
  }

  static MapSpec linear() { return {Family::Linear, 0}; }
  static MapSpec dissipative(Scalar eps) { return {Family::Dissipative, eps}; }
  static MapSpec conservative(Scalar eps) { return {Family::Conservative, eps}; }

  Family family() const { return family_; }
  Scalar epsilon() const { return epsilon_; }

  /// Perturbation actually applied; the linear family ignores epsilon.
  Scalar effective_epsilon() const { return family_ == Family::Linear ? Scalar(0) : epsilon_; }
  bool conservative() const { return family_ == Family::Conservative; }

  bool is_diffeomorphism() const {
    return family_ != Family::Dissipative || epsilon_ < kFoldThreshold;
  }

 private:
  Family family_ = Family::Linear;
  Scalar epsilon_ = 0;
};

/// Precision-specific evaluation kernel for a MapSpec.
template <class Real>
struct MapKernel {
  Real eps;
  bool conservative;

  explicit MapKernel(const MapSpec& spec)
      : eps(static_cast<Real>(spec.effective_epsilon())), conservative(spec.conservative()) {}

  Vec3<Real> operator()(const Vec3<Real>& p) const {
    const Real s = eps == 0 ? Real(0) : eps * num::sin2pi(p.x);
    return {2 * p.x + p.y + s, p.x + 2 * p.y + p.z + (conservative ? s : Real(0)), p.y + p.z};
  }

  /// Image of p and of the tangent vector t under Df(p), sharing one sincos.
  void step(Vec3<Real>& p, Vec3<Real>& t) const {
    Real s = 0, c = 0;
    if (eps != 0) num::sincos2pi(p.x, s, c);
    const Real ds = eps * s;
    const Real dc = eps * num::two_pi<Real>() * c * t.x;
    const Vec3<Real> np{2 * p.x + p.y + ds, p.x + 2 * p.y + p.z + (conservative ? ds : Real(0)),
                        p.y + p.z};
    const Vec3<Real> nt{2 * t.x + t.y + dc, t.x + 2 * t.y + t.z + (conservative ? dc : Real(0)),
                        t.y + t.z};
    p = np;
    t = nt;
  }
};

template <class Real>
inline Vec3<Real> apply(const MapSpec& spec, const Vec3<Real>& p, Chart chart = Chart::Torus) {
  const Vec3<Real> q = MapKernel<Real>(spec)(p);
  return chart == Chart::Cover ? q : torus_reduce(q);
}

/// n-fold iterate on the torus.
template <class Real>
inline Vec3<Real> apply_n(const MapSpec& spec, Vec3<Real> p, int n, Chart chart = Chart::Torus) {
  const MapKernel<Real> f(spec);
  for (int i = 0; i < n; ++i) {
    p = f(p);
    if (chart == Chart::Torus) p = torus_reduce(p);
  }
  return p;
}

inline Mat3<Scalar> jacobian(const MapSpec& spec, const Vec3<Scalar>& p) {
  Mat3<Scalar> m = base_matrix();
  const Scalar eps = spec.effective_epsilon();
  if (eps != 0) {
    Scalar s, c;
    num::sincos2pi(p.x, s, c);
    const Scalar d = eps * kTwoPi * c;
    m(0, 0) += d;
    if (spec.conservative()) m(1, 0) += d;
  }
  return m;
}

inline constexpr int kInverseMaxIterations = 200;

/// Unique preimage. The first coordinate solves the strictly monotone scalar
/// equation x + e sin(2 pi x) = a - b + c (dissipative) or is explicit
/// (conservative, linear); the rest follows by back-substitution.
inline Vec3<Scalar> apply_inverse(const MapSpec& spec, const Vec3<Scalar>& p,
                                  Chart chart = Chart::Torus) {
  if (!spec.is_diffeomorphism()) {
    throw Error(Errc::NotInvertible, "dissipative family requires epsilon < 1/(2 pi)");
  }
  const Scalar eps = spec.effective_epsilon();
  const Scalar k = p.x - p.y + p.z;
  Scalar x = k;
  if (spec.family() == Family::Dissipative && eps != 0) {
    // Root lies in [k - eps, k + eps]; Newton with bisection safeguard.
    Scalar lo = k - eps, hi = k + eps;
    const Scalar tol = 4 * kEpsilon * num::max(Scalar(1), num::abs(k));
    bool converged = false;
    for (int it = 0; it < kInverseMaxIterations; ++it) {
      Scalar s, c;
      num::sincos2pi(x, s, c);
      const Scalar h = x + eps * s - k;
      if (num::abs(h) <= tol) {
        converged = true;
        break;
      }
      if (h < 0) lo = x; else hi = x;
      if (hi - lo <= tol) {
        converged = true;
        break;
      }
      const Scalar dh = 1 + eps * kTwoPi * c;
      Scalar next = x - h / dh;
      if (!(next > lo && next < hi)) next = (lo + hi) / 2;
      if (next == x) {
        converged = true;
        break;
      }
      x = next;
    }
    if (!converged) throw Error(Errc::NoConvergence, "inverse Newton iteration");
  }
  const Scalar s = eps == 0 ? Scalar(0) : eps * num::sin2pi(x);
  const Scalar y = p.x - 2 * x - s;
  const Scalar z = p.z - y;
  const Vec3<Scalar> out{x, y, z};
  return chart == Chart::Cover ? out : torus_reduce(out);
}

/// The symmetry (x, y, z) -> (-x, -y, -z) on the torus.
template <class Real>
inline Vec3<Real> involution(const Vec3<Real>& p) {
  return torus_reduce(Vec3<Real>{-p.x, -p.y, -p.z});
}

struct FixedPointData {
  Vec3<Scalar> point{};
  EigenTriple eigen;

  Scalar lambda() const { return eigen.dominant(); }
  const Vec3<Scalar>& direction() const { return *eigen.dominant_vector; }
};

/// Eigen data of Df at the origin; throws no-real-dominant when the strong
/// unstable direction is not defined.
inline FixedPointData fixed_point_data(const MapSpec& spec) {
  FixedPointData d;
  d.eigen = mat_eigen(jacobian(spec, d.point));
  if (d.eigen.status != DominantStatus::Ok) {
    throw Error(Errc::NoRealDominant, "dominant eigenvalue at the fixed point is not real and simple");
  }
  return d;
}

}  // namespace uulab
