#pragma once

// Zero-noise sampler for the SRB measure: the Markov chain
//   q_{i+1} = f(q_i) + sigma * xi_i  (mod Z^3)
// with xi_i standard Gaussian vectors from Box-Muller over a linear
// congruential generator.

#include <cstdint>
#include <utility>
#include <vector>

#include "uulab/maps.hpp"
#include "uulab/parallel.hpp"

namespace uulab {

struct LcgParams {
  // Prime modulus 2^64 - 59 with a multiplier from L'Ecuyer's lattice tables.
  std::uint64_t multiplier = 13891176665706064842ULL;
  std::uint64_t increment = 0;
  std::uint64_t modulus = 18446744073709551557ULL;

  void validate() const {
    require(modulus > multiplier && multiplier > 0, "LCG needs modulus > multiplier > 0");
  }
};

/// One LCG step: state <- (a state + c) mod m, uniform = (state + 1) / (m + 1).
inline std::pair<std::uint64_t, Scalar> lcg_next(std::uint64_t state, const LcgParams& p) {
  using u128 = unsigned __int128;
  const auto next = static_cast<std::uint64_t>(
      (static_cast<u128>(p.multiplier) * state + p.increment) % p.modulus);
  const Scalar u = (static_cast<Scalar>(next) + 1) / (static_cast<Scalar>(p.modulus) + 1);
  return {next, u};
}

class Lcg {
 public:
  /// A zero state is a fixed point of a multiplicative generator, so it is
  /// replaced by 1 when the increment is 0.
  Lcg(std::uint64_t seed, const LcgParams& params) : params_(params) {
    params_.validate();
    state_ = seed % params_.modulus;
    if (state_ == 0 && params_.increment == 0) state_ = 1;
  }

  Scalar uniform() {
    auto [s, u] = lcg_next(state_, params_);
    state_ = s;
    return u;
  }

  std::uint64_t state() const { return state_; }

 private:
  LcgParams params_;
  std::uint64_t state_;
};

/// Box-Muller: (sqrt(-2 ln u1) cos 2 pi u2, sqrt(-2 ln u1) sin 2 pi u2).
template <class Real>
inline std::pair<Real, Real> gaussian_pair(Real u1, Real u2) {
  const Real r = num::sqrt(-2 * num::log(u1));
  Real s, c;
  num::sincos(num::two_pi<Real>() * u2, s, c);
  return {r * c, r * s};
}

struct NoiseConfig {
  Scalar sigma = 1e-29Q;
  std::uint64_t seed = 1;
  LcgParams lcg{};
  std::int64_t burn_in = 10000;
  /// Redraw any Gaussian component with |xi| > 6.
  bool truncate = false;

  void validate() const {
    require(num::isfinite(sigma) && sigma >= 1e-31Q,
            "sigma must be >= 1e-31 so noise dominates rounding");
    require(burn_in >= 0, "burn_in must be >= 0");
    lcg.validate();
  }
};

struct SrbSample {
  Vec3<Scalar> point{};
  std::int64_t step_index = 0;
};

/// Standard normal stream; Box-Muller evaluated in double since only the
/// product with sigma enters the chain.
class GaussianSource {
 public:
  GaussianSource(std::uint64_t seed, const LcgParams& p, bool truncate)
      : rng_(seed, p), truncate_(truncate) {}

  double next() {
    for (;;) {
      double g;
      if (has_spare_) {
        has_spare_ = false;
        g = spare_;
      } else {
        const auto u1 = static_cast<double>(rng_.uniform());
        const auto u2 = static_cast<double>(rng_.uniform());
        const auto [a, b] = gaussian_pair<double>(u1, u2);
        spare_ = b;
        has_spare_ = true;
        g = a;
      }
      if (!truncate_ || std::fabs(g) <= 6.0) return g;
    }
  }

  Lcg& rng() { return rng_; }

 private:
  Lcg rng_;
  bool truncate_;
  bool has_spare_ = false;
  double spare_ = 0;
};

/// A single noisy chain. Construction draws q0 uniformly and discards the
/// burn-in; next() yields post-burn-in samples with step_index from 0.
class SrbChain {
 public:
  SrbChain(const MapSpec& spec, const NoiseConfig& noise)
      : f_(spec), noise_(validated(noise)), gauss_(noise.seed, noise.lcg, noise.truncate) {
    q_ = {gauss_.rng().uniform(), gauss_.rng().uniform(), gauss_.rng().uniform()};
    q_ = torus_reduce(q_);
    for (std::int64_t i = 0; i < noise_.burn_in; ++i) advance();
  }

  SrbSample next() {
    advance();
    return {q_, index_++};
  }

 private:
  static const NoiseConfig& validated(const NoiseConfig& n) {
    n.validate();
    return n;
  }

  void advance() {
    Vec3<Scalar> p = f_(q_);
    const Scalar sx = static_cast<Scalar>(gauss_.next());
    const Scalar sy = static_cast<Scalar>(gauss_.next());
    const Scalar sz = static_cast<Scalar>(gauss_.next());
    p.x += noise_.sigma * sx;
    p.y += noise_.sigma * sy;
    p.z += noise_.sigma * sz;
    q_ = torus_reduce(p);
  }

  MapKernel<Scalar> f_;
  NoiseConfig noise_;
  GaussianSource gauss_;
  Vec3<Scalar> q_{};
  std::int64_t index_ = 0;
};

inline std::vector<SrbSample> srb_chain(const MapSpec& spec, const NoiseConfig& noise,
                                        std::int64_t steps) {
  require(steps > 0, "steps must be > 0");
  SrbChain chain(spec, noise);
  std::vector<SrbSample> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (std::int64_t i = 0; i < steps; ++i) out.push_back(chain.next());
  return out;
}

/// Runs `chains` independent chains (chain k seeded with noise.seed + k) and
/// feeds each one's samples to its own copy of `prototype`. Consumers come
/// back in chain order, so merged results do not depend on `threads`.
template <class Consumer>
std::vector<Consumer> run_chains(const MapSpec& spec, const NoiseConfig& noise, std::int64_t steps,
                                 int chains, int threads, const Consumer& prototype) {
  require(steps > 0, "steps must be > 0");
  require(chains >= 1, "chains must be >= 1");
  noise.validate();
  std::vector<Consumer> out(static_cast<std::size_t>(chains), prototype);
  parallel_for(out.size(), threads, [&](std::size_t k) {
    NoiseConfig nk = noise;
    nk.seed = noise.seed + k;
    SrbChain chain(spec, nk);
    for (std::int64_t i = 0; i < steps; ++i) out[k](chain.next());
  }, 1);
  return out;
}

struct SlicePoint {
  Scalar x = 0;
  Scalar z = 0;
};

/// Membership in the slice {-h <= y <= h} of the torus.
inline bool in_slice(Scalar y, Scalar half_width) {
  return y <= half_width || y >= 1 - half_width;
}

inline void validate_half_width(Scalar half_width) {
  require(half_width > 0 && half_width <= Scalar(0.5), "slice half-width must lie in (0, 1/2]");
}

inline std::vector<SlicePoint> slice_samples(const std::vector<SrbSample>& chain,
                                             Scalar half_width = 0.005Q) {
  validate_half_width(half_width);
  std::vector<SlicePoint> out;
  for (const SrbSample& s : chain) {
    if (in_slice(s.point.y, half_width)) out.push_back({s.point.x, s.point.z});
  }
  return out;
}

/// Consumer for run_chains that keeps only slice points.
struct SliceCollector {
  Scalar half_width = 0.005Q;
  std::vector<SlicePoint> points;

  void operator()(const SrbSample& s) {
    if (in_slice(s.point.y, half_width)) points.push_back({s.point.x, s.point.z});
  }
};

}  // namespace uulab
