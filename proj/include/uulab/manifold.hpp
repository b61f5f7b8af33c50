#pragma once

// Intersections of the lifted strong unstable manifold of the fixed point p
// with the integer levels {y = y0}.
//
// A point of the leaf is parametrized by a seed scale C: the seed
// (C / lambda_p^depth) v_p lies on the local leaf to within rounding, and
// pushing it forward `depth` times on the cover gives a point q(C) far out on
// the leaf. Shooting adjusts C until q(C).y hits the target level.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "uulab/maps.hpp"
#include "uulab/parallel.hpp"

namespace uulab {

enum class ShootSolver {
  /// Double-precision safeguarded Newton, finished by Newton in Scalar.
  Newton,
  /// Multiplicative relaxation C <- C (1 + mix (y0 - y) / y0).
  Mixing,
};

struct ShootConfig {
  int depth = 50;
  Scalar mix = 0.1Q;
  Scalar tol_y = 1e-24Q;
  int max_iter = 2000;
  Scalar delta_q = 1e-10Q;
  ShootSolver solver = ShootSolver::Newton;

  void validate() const {
    require(depth >= 1, "depth must be >= 1");
    require(mix > 0 && mix <= 1, "mix must lie in (0, 1]");
    require(tol_y > 0, "tol_y must be > 0");
    require(max_iter >= 1, "max_iter must be >= 1");
    require(delta_q > 0, "delta_q must be > 0");
  }
};

struct ManifoldSample {
  std::int64_t y0 = 0;
  Scalar x = 0;  // reduced, [0, 1)
  Scalar z = 0;  // reduced, [0, 1)
  Vec3<Scalar> tangent{};  // unit, oriented along v_p
  Scalar rho = 0;  // Jacobian of f^-depth along the leaf, finite-difference estimate
  Scalar angle_weight = 0;  // 1 / |tangent.y|
  Scalar seed_scale = 0;  // converged C
  int iterations = 0;
};

/// A point on the lifted leaf together with its unit tangent and the
/// expansion |Df^depth t0| of the unit seed direction.
template <class Real>
struct LeafPoint {
  Vec3<Real> point{};
  Vec3<Real> tangent{};
  Real growth{1};
};

/// The seed-to-leaf map in a given precision.
template <class Real>
class LeafModel {
 public:
  LeafModel(const MapSpec& spec, const FixedPointData& fixed, int depth)
      : f_(spec), direction_(fixed.direction()), depth_(depth) {
    Scalar lambda_n = 1;
    for (int i = 0; i < depth; ++i) lambda_n *= fixed.lambda();
    inv_lambda_n_ = static_cast<Real>(1 / lambda_n);
    dir_norm_ = norm(direction_);
    unit_dir_ = direction_ * (Real(1) / dir_norm_);
  }

  Vec3<Real> seed(Real c) const { return (c * inv_lambda_n_) * direction_; }

  /// |d seed / dC|.
  Real seed_speed() const { return dir_norm_ * inv_lambda_n_; }

  Vec3<Real> push(Real c) const {
    Vec3<Real> p = seed(c);
    for (int i = 0; i < depth_; ++i) p = f_(p);
    return p;
  }

  /// Tangent is renormalized after every step; growth keeps the product of
  /// the norms.
  LeafPoint<Real> propagate(Real c) const {
    LeafPoint<Real> out;
    out.point = seed(c);
    out.tangent = unit_dir_;
    for (int i = 0; i < depth_; ++i) {
      f_.step(out.point, out.tangent);
      const Real n = norm(out.tangent);
      out.growth *= n;
      out.tangent *= Real(1) / n;
    }
    return out;
  }

  /// dq/dC at a propagated point.
  Vec3<Real> velocity(const LeafPoint<Real>& lp) const {
    return (seed_speed() * lp.growth) * lp.tangent;
  }

  int depth() const { return depth_; }

 private:
  MapKernel<Real> f_;
  Vec3<Real> direction_;
  Vec3<Real> unit_dir_;
  Real dir_norm_{};
  Real inv_lambda_n_{};
  int depth_;
};

/// Result of solving q(C).y == level.
struct LeafSolution {
  Scalar seed_scale = 0;
  LeafPoint<Scalar> at;
  int iterations = 0;
};

namespace detail {

// Safeguarded Newton on g(C) = q(C).y - level. g is increasing with g(0) =
// -level, so 0 brackets the root on one side from the start.
template <class Real>
struct NewtonOutcome {
  Real c;
  LeafPoint<Real> at;
  int evaluations;
  bool converged;
};

template <class Real>
NewtonOutcome<Real> newton_level(const LeafModel<Real>& model, Real level, Real c, Real tol,
                                 int max_evals) {
  constexpr Real inf = std::numeric_limits<double>::infinity();
  Real lo = level > 0 ? Real(0) : -inf;
  Real hi = level > 0 ? inf : Real(0);
  NewtonOutcome<Real> out{c, {}, 0, false};
  for (int it = 0; it < max_evals; ++it) {
    out.at = model.propagate(out.c);
    out.evaluations = it + 1;
    const Real residual = out.at.point.y - level;
    if (!num::isfinite(residual)) break;
    if (num::abs(residual) < tol) {
      out.converged = true;
      return out;
    }
    if (residual < 0) lo = out.c; else hi = out.c;
    const Real slope = model.seed_speed() * out.at.growth * out.at.tangent.y;
    Real next = out.c - residual / slope;
    if (!(slope > 0) || !num::isfinite(next) || !(next > lo && next < hi)) {
      if (num::isfinite(lo) && num::isfinite(hi)) {
        next = (lo + hi) / 2;
      } else {
        next = 2 * out.c;
      }
    }
    if (next == out.c) break;
    out.c = next;
  }
  return out;
}

}  // namespace detail

/// Shoots points of the strong unstable leaf of the fixed point onto
/// prescribed y-levels. Holds the precomputed fixed-point data so a batch
/// pays for the eigen solve once.
class Shooter {
 public:
  Shooter(const MapSpec& spec, const ShootConfig& cfg)
      : spec_(spec), cfg_(validated(cfg)), fixed_(fixed_point_data(spec)),
        quad_(spec, fixed_, cfg.depth), fast_(spec, fixed_, cfg.depth) {
    if (!(fixed_.lambda() > 1)) {
      throw Error(Errc::NoRealDominant, "dominant eigenvalue at p must exceed 1");
    }
  }

  const MapSpec& spec() const { return spec_; }
  const ShootConfig& config() const { return cfg_; }
  const FixedPointData& fixed_point() const { return fixed_; }
  const LeafModel<Scalar>& model() const { return quad_; }

  /// Solves q(C).y == level for any nonzero real level.
  LeafSolution solve_level(Scalar level) const {
    require(level != 0, "target level must be nonzero");
    return cfg_.solver == ShootSolver::Newton ? solve_newton(level) : solve_mixing(level);
  }

  ManifoldSample shoot(std::int64_t y0) const {
    require(y0 != 0, "y0 must be nonzero");
    const LeafSolution sol = solve_level(static_cast<Scalar>(y0));
    ManifoldSample s;
    s.y0 = y0;
    s.x = wrap_unit(sol.at.point.x);
    s.z = wrap_unit(sol.at.point.z);
    s.tangent = sol.at.tangent;
    s.angle_weight = angle_weight_of(s.tangent);
    s.rho = rho_of(sol, cfg_.delta_q);
    s.seed_scale = sol.seed_scale;
    s.iterations = sol.iterations;
    return s;
  }

  /// Finite-difference Jacobian of f^-depth along the leaf at a solved point:
  /// replays seeds C -+ dC chosen so their images sit ~delta_q either side of
  /// q, and divides seed separation by image separation.
  Scalar rho_of(const LeafSolution& sol, Scalar delta_q) const {
    const Scalar speed = quad_.seed_speed() * sol.at.growth;
    const Scalar dc = delta_q / speed;
    const Vec3<Scalar> plus = quad_.push(sol.seed_scale + dc);
    const Vec3<Scalar> minus = quad_.push(sol.seed_scale - dc);
    const Scalar chord = norm(plus - minus);
    const Scalar seed_sep = 2 * dc * quad_.seed_speed();
    if (!(chord > 0) || !num::isfinite(chord) || !(seed_sep > 0)) {
      throw Error(Errc::DegenerateDifference, "leaf displacement underflowed");
    }
    return seed_sep / chord;
  }

  static Scalar angle_weight_of(const Vec3<Scalar>& tangent) {
    const Scalar ty = num::abs(tangent.y);
    if (ty < 1e-6Q) {
      throw Error(Errc::TangentParallelToTransversal, "tangent nearly parallel to {y = 0}");
    }
    return 1 / ty;
  }

 private:
  static ShootConfig validated(const ShootConfig& cfg) {
    cfg.validate();
    return cfg;
  }

  LeafSolution solve_newton(Scalar level) const {
    // Coarse solve in double; it lands within rounding of the root so the
    // Scalar stage needs one or two steps.
    const double dlevel = static_cast<double>(level);
    const auto coarse = detail::newton_level<double>(
        fast_, dlevel, dlevel, 1e-14 * std::max(1.0, std::fabs(dlevel)), 80);
    Scalar start = static_cast<Scalar>(coarse.c);
    if (!num::isfinite(start) || start == 0 || (start > 0) != (level > 0)) start = level;

    const auto fine = detail::newton_level<Scalar>(quad_, level, start, cfg_.tol_y, cfg_.max_iter);
    if (!fine.converged) {
      throw Error(Errc::NoConvergence, "shooting did not reach tol_y at level " + to_string(level, 12));
    }
    return {fine.c, fine.at, fine.evaluations};
  }

  LeafSolution solve_mixing(Scalar level) const {
    Scalar c = level / fixed_.direction().y;
    for (int it = 1; it <= cfg_.max_iter; ++it) {
      const Vec3<Scalar> q = quad_.push(c);
      if (!num::isfinite(q.y)) break;
      if (num::abs(q.y - level) < cfg_.tol_y) {
        return {c, quad_.propagate(c), it};
      }
      c *= 1 + cfg_.mix * (level - q.y) / level;
    }
    throw Error(Errc::NoConvergence, "mixing iteration did not reach tol_y at level " + to_string(level, 12));
  }

  MapSpec spec_;
  ShootConfig cfg_;
  FixedPointData fixed_;
  LeafModel<Scalar> quad_;
  LeafModel<double> fast_;
};

inline ManifoldSample shoot(const MapSpec& spec, std::int64_t y0, const ShootConfig& cfg = {}) {
  return Shooter(spec, cfg).shoot(y0);
}

inline Scalar rho_at(const MapSpec& spec, std::int64_t y0, const ShootConfig& cfg = {}) {
  return shoot(spec, y0, cfg).rho;
}

/// a = 1 / <e_y, v^uu>.
inline Scalar angle_weight(const Vec3<Scalar>& tangent) { return Shooter::angle_weight_of(tangent); }

/// Inclusive range of nonzero y-levels; empty when first > last.
struct Y0Range {
  std::int64_t first = 1;
  std::int64_t last = 0;

  std::int64_t size() const { return last < first ? 0 : last - first + 1; }
  bool contains_zero() const { return size() > 0 && first <= 0 && last >= 0; }
};

/// Parses "a..b" (either may be negative) or a single integer.
inline Y0Range parse_y0_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const std::int64_t v = std::stoll(text);
      return {v, v};
    }
    return {std::stoll(text.substr(0, dots)), std::stoll(text.substr(dots + 2))};
  } catch (const std::logic_error&) {
    throw Error(Errc::InvalidArgument, "bad y0 range '" + text + "', expected a..b");
  }
}

struct SampleFailure {
  std::int64_t y0 = 0;
  Errc code = Errc::NoConvergence;
  std::string message;
};

struct BatchResult {
  std::vector<ManifoldSample> samples;  // ascending y0
  std::vector<SampleFailure> failures;  // ascending y0
};

/// Streams a y0 range in chunks of `chunk` levels; each chunk is computed
/// with `threads` workers and handed to sink(BatchResult&&) in y0 order.
template <class Sink>
void for_each_sample_chunk(const Shooter& shooter, Y0Range range, int threads, std::int64_t chunk,
                           Sink&& sink) {
  require(!range.contains_zero(), "y0 range must not contain 0");
  require(chunk >= 1, "chunk must be >= 1");
  for (std::int64_t begin = range.first; begin <= range.last; begin += chunk) {
    const std::int64_t end = std::min(range.last, begin + chunk - 1);
    const auto n = static_cast<std::size_t>(end - begin + 1);
    std::vector<std::optional<ManifoldSample>> slots(n);
    std::vector<std::optional<SampleFailure>> errors(n);
    parallel_for(n, threads, [&](std::size_t i) {
      const std::int64_t y0 = begin + static_cast<std::int64_t>(i);
      try {
        slots[i] = shooter.shoot(y0);
      } catch (const Error& e) {
        errors[i] = SampleFailure{y0, e.code(), e.what()};
      }
    }, 16);
    BatchResult out;
    out.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (slots[i]) out.samples.push_back(*slots[i]);
      if (errors[i]) out.failures.push_back(*errors[i]);
    }
    sink(std::move(out));
  }
}

inline BatchResult sample_batch(const MapSpec& spec, Y0Range range, const ShootConfig& cfg = {},
                                int threads = 1) {
  BatchResult all;
  if (range.size() == 0) return all;
  const Shooter shooter(spec, cfg);
  for_each_sample_chunk(shooter, range, threads, std::max<std::int64_t>(range.size(), 1),
                        [&](BatchResult&& part) {
                          all.samples = std::move(part.samples);
                          all.failures = std::move(part.failures);
                        });
  return all;
}

}  // namespace uulab
