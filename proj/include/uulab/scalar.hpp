#pragma once

// Extended-precision scalar used throughout the library.
//
// Scalar is IEEE binary128 (__float128, 113-bit significand, epsilon 2^-112
// ~ 1.93e-34). The math shims in uulab::num overload the same names for
// double and Scalar so that map/shooting kernels can be instantiated in
// either precision.

#include <quadmath.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace uulab {

using Scalar = __float128;

inline constexpr Scalar kPi = M_PIq;
inline constexpr Scalar kTwoPi = 2 * M_PIq;
inline constexpr Scalar kEpsilon = FLT128_EPSILON;

namespace num {

// double overloads
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double log(double x) { return std::log(x); }
inline double exp(double x) { return std::exp(x); }
inline double abs(double x) { return std::fabs(x); }
inline double floor(double x) { return std::floor(x); }
inline double round(double x) { return std::round(x); }
inline double cbrt(double x) { return std::cbrt(x); }
inline double acos(double x) { return std::acos(x); }
inline double pow(double x, double y) { return std::pow(x, y); }
inline bool isfinite(double x) { return std::isfinite(x); }
inline void sincos(double x, double& s, double& c) {
  s = std::sin(x);
  c = std::cos(x);
}

// binary128 overloads
inline Scalar sin(Scalar x) { return sinq(x); }
inline Scalar cos(Scalar x) { return cosq(x); }
inline Scalar sqrt(Scalar x) { return sqrtq(x); }
inline Scalar log(Scalar x) { return logq(x); }
inline Scalar exp(Scalar x) { return expq(x); }
inline Scalar abs(Scalar x) { return fabsq(x); }
inline Scalar floor(Scalar x) { return floorq(x); }
inline Scalar round(Scalar x) { return roundq(x); }
inline Scalar cbrt(Scalar x) { return cbrtq(x); }
inline Scalar acos(Scalar x) { return acosq(x); }
inline Scalar pow(Scalar x, Scalar y) { return powq(x, y); }
inline bool isfinite(Scalar x) { return finiteq(x) != 0; }
inline void sincos(Scalar x, Scalar& s, Scalar& c) { sincosq(x, &s, &c); }

template <class Real>
inline constexpr Real two_pi() {
  if constexpr (std::is_same_v<Real, double>) {
    return 6.283185307179586476925286766559;
  } else {
    return kTwoPi;
  }
}

// sin(2*pi*x) with exact reduction to |r| <= 1/2. roundq/std::round are
// symmetric, so the result is exactly odd in x.
template <class Real>
inline Real sin2pi(Real x) {
  const Real r = x - round(x);
  return sin(two_pi<Real>() * r);
}

template <class Real>
inline void sincos2pi(Real x, Real& s, Real& c) {
  const Real r = x - round(x);
  sincos(two_pi<Real>() * r, s, c);
}

template <class T>
inline T max(T a, T b) {
  return a < b ? b : a;
}
template <class T>
inline T min(T a, T b) {
  return b < a ? b : a;
}

}  // namespace num

/// Formats with `digits` significant decimal digits in scientific notation.
inline std::string to_string(Scalar v, int digits = 30) {
  char buf[128];
  const int n = quadmath_snprintf(buf, sizeof buf, "%.*Qe", digits - 1, v);
  if (n < 0 || n >= static_cast<int>(sizeof buf)) {
    throw std::runtime_error("to_string: formatting failed");
  }
  return std::string(buf, static_cast<std::size_t>(n));
}

/// Parses a decimal or hex-float literal. Throws std::invalid_argument on
/// trailing garbage or an empty string.
inline Scalar parse_scalar(std::string_view text) {
  std::string s(text);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
  s = s.substr(start);
  if (s.empty()) throw std::invalid_argument("empty number");
  char* end = nullptr;
  const Scalar v = strtoflt128(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return v;
}

}  // namespace uulab
