#pragma once

// Fixed-size 3-vectors, 3x3 matrices and a closed-form 3x3 eigen solver.

#include <algorithm>
#include <array>
#include <optional>

#include "uulab/scalar.hpp"

namespace uulab {

template <class Real>
struct Vec3 {
  Real x{0}, y{0}, z{0};

  constexpr Vec3() = default;
  constexpr Vec3(Real x_, Real y_, Real z_) : x(x_), y(y_), z(z_) {}

  template <class Other>
  constexpr explicit Vec3(const Vec3<Other>& o)
      : x(static_cast<Real>(o.x)), y(static_cast<Real>(o.y)), z(static_cast<Real>(o.z)) {}

  constexpr Real& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr const Real& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(Real s) { x *= s; y *= s; z *= s; return *this; }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(Real s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator*(Vec3 a, Real s) { return a *= s; }
  friend constexpr bool operator==(const Vec3& a, const Vec3& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
  }
};

template <class Real>
constexpr Real dot(const Vec3<Real>& a, const Vec3<Real>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <class Real>
Real norm(const Vec3<Real>& a) {
  return num::sqrt(dot(a, a));
}

template <class Real>
Real norm_inf(const Vec3<Real>& a) {
  return num::max(num::abs(a.x), num::max(num::abs(a.y), num::abs(a.z)));
}

template <class Real>
bool isfinite(const Vec3<Real>& a) {
  return num::isfinite(a.x) && num::isfinite(a.y) && num::isfinite(a.z);
}

/// Row-major 3x3 matrix.
template <class Real>
struct Mat3 {
  std::array<Real, 9> a{};

  static constexpr Mat3 identity() {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = Real(1);
    return m;
  }

  constexpr Real& operator()(int r, int c) { return a[static_cast<std::size_t>(3 * r + c)]; }
  constexpr const Real& operator()(int r, int c) const {
    return a[static_cast<std::size_t>(3 * r + c)];
  }

  constexpr Real trace() const { return a[0] + a[4] + a[8]; }

  constexpr Real det() const {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }

  friend constexpr Vec3<Real> operator*(const Mat3& m, const Vec3<Real>& v) {
    return {m.a[0] * v.x + m.a[1] * v.y + m.a[2] * v.z,
            m.a[3] * v.x + m.a[4] * v.y + m.a[5] * v.z,
            m.a[6] * v.x + m.a[7] * v.y + m.a[8] * v.z};
  }

  friend constexpr Mat3 operator*(const Mat3& l, const Mat3& r) {
    Mat3 out;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Real s = 0;
        for (int k = 0; k < 3; ++k) s += l(i, k) * r(k, j);
        out(i, j) = s;
      }
    return out;
  }

  friend constexpr Mat3 operator-(Mat3 l, const Mat3& r) {
    for (std::size_t i = 0; i < 9; ++i) l.a[i] -= r.a[i];
    return l;
  }
};

/// The integer matrix of the base automorphism.
template <class Real = Scalar>
constexpr Mat3<Real> base_matrix() {
  Mat3<Real> m;
  m.a = {2, 1, 0, 1, 2, 1, 0, 1, 1};
  return m;
}

struct Eigenvalue {
  Scalar re{0};
  Scalar im{0};

  Scalar modulus() const { return num::sqrt(re * re + im * im); }
  bool is_real() const { return im == 0; }
};

enum class DominantStatus {
  Ok,
  /// Largest-modulus eigenvalue is complex or not simple.
  NoRealDominant,
  /// The eigenvector has no y-component and cannot be normalized.
  ZeroYComponent,
};

struct EigenTriple {
  std::array<Eigenvalue, 3> values;  // ascending modulus
  std::optional<Vec3<Scalar>> dominant_vector;  // normalized to y == 1
  DominantStatus status = DominantStatus::NoRealDominant;

  Scalar dominant() const { return values[2].re; }
};

namespace detail {

inline Scalar cubic_eval(Scalar a, Scalar b, Scalar c, Scalar t) {
  return ((t + a) * t + b) * t + c;
}

inline Scalar newton_polish(Scalar a, Scalar b, Scalar c, Scalar t) {
  const Scalar d = (3 * t + 2 * a) * t + b;
  if (d == 0) return t;
  const Scalar next = t - cubic_eval(a, b, c, t) / d;
  return num::isfinite(next) ? next : t;
}

}  // namespace detail

/// Relative gap below which the top two moduli count as a repeated root.
inline constexpr Scalar kSimpleRootGap = 1e-20Q;

/// Eigen-decomposition of a real 3x3 matrix via the closed-form cubic and one
/// Newton polish per real root. The dominant eigenvector is only produced when
/// the largest-modulus eigenvalue is real and simple.
inline EigenTriple mat_eigen(const Mat3<Scalar>& m) {
  // x^3 + a x^2 + b x + c
  const Scalar tr = m.trace();
  const Scalar minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                        m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  const Scalar a = -tr;
  const Scalar b = minors;
  const Scalar c = -m.det();

  const Scalar shift = -a / 3;
  const Scalar p = b - a * a / 3;
  const Scalar q = 2 * a * a * a / 27 - a * b / 3 + c;
  const Scalar disc = q * q / 4 + p * p * p / 27;

  std::array<Eigenvalue, 3> vals;
  if (disc < 0) {
    const Scalar r = num::sqrt(-p / 3);
    Scalar arg = (-q / 2) / (r * r * r);
    arg = num::max(Scalar(-1), num::min(Scalar(1), arg));
    const Scalar phi = num::acos(arg);
    for (int k = 0; k < 3; ++k) {
      const Scalar t = 2 * r * num::cos((phi - kTwoPi * k) / 3) + shift;
      vals[static_cast<std::size_t>(k)] = {detail::newton_polish(a, b, c, t), 0};
    }
  } else {
    const Scalar sq = num::sqrt(disc);
    Scalar t = num::cbrt(-q / 2 + sq) + num::cbrt(-q / 2 - sq) + shift;
    t = detail::newton_polish(a, b, c, t);
    // Deflate: (x - t)(x^2 + s x + u)
    const Scalar s = a + t;
    const Scalar u = b + t * s;
    const Scalar im2 = u - s * s / 4;
    vals[0] = {t, 0};
    if (im2 > 0) {
      const Scalar im = num::sqrt(im2);
      vals[1] = {-s / 2, im};
      vals[2] = {-s / 2, -im};
    } else {
      const Scalar h = num::sqrt(-im2);
      vals[1] = {detail::newton_polish(a, b, c, -s / 2 + h), 0};
      vals[2] = {detail::newton_polish(a, b, c, -s / 2 - h), 0};
    }
  }

  std::stable_sort(vals.begin(), vals.end(), [](const Eigenvalue& l, const Eigenvalue& r) {
    const Scalar ml = l.modulus(), mr = r.modulus();
    if (ml != mr) return ml < mr;
    return l.re < r.re;
  });

  EigenTriple out;
  out.values = vals;
  const Eigenvalue& top = vals[2];
  const Scalar top_mod = top.modulus();
  if (!top.is_real() || top_mod - vals[1].modulus() <= kSimpleRootGap * num::max(Scalar(1), top_mod)) {
    out.status = DominantStatus::NoRealDominant;
    return out;
  }

  // (M - lambda I) v = 0 with v.y = 1: two equations in (vx, vz). Use the
  // row pair with the best-conditioned 2x2 block.
  const Scalar lam = top.re;
  Mat3<Scalar> shifted = m;
  for (int i = 0; i < 3; ++i) shifted(i, i) -= lam;
  int best_r1 = 0, best_r2 = 1;
  Scalar best_det = 0;
  for (int r1 = 0; r1 < 3; ++r1)
    for (int r2 = r1 + 1; r2 < 3; ++r2) {
      const Scalar d = shifted(r1, 0) * shifted(r2, 2) - shifted(r1, 2) * shifted(r2, 0);
      if (num::abs(d) > num::abs(best_det)) {
        best_det = d;
        best_r1 = r1;
        best_r2 = r2;
      }
    }
  Scalar scale = 0;
  for (Scalar e : shifted.a) scale = num::max(scale, num::abs(e));
  if (num::abs(best_det) <= 1e-28Q * scale * scale) {
    out.status = DominantStatus::ZeroYComponent;
    return out;
  }
  const Scalar r1 = -shifted(best_r1, 1), r2 = -shifted(best_r2, 1);
  const Scalar vx = (r1 * shifted(best_r2, 2) - shifted(best_r1, 2) * r2) / best_det;
  const Scalar vz = (shifted(best_r1, 0) * r2 - r1 * shifted(best_r2, 0)) / best_det;
  out.dominant_vector = Vec3<Scalar>{vx, Scalar(1), vz};
  out.status = DominantStatus::Ok;
  return out;
}

}  // namespace uulab
