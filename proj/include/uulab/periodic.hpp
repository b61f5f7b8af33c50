#pragma once

// Period-n orbits: mesh scan of the return distance
//   D(x) = dist_T3(f^n(x), x),
// descent refinement of every captured mesh point, de-duplication by cycle
// rotation, and the spectrum |eig(Df^n)|^(1/n) along each orbit.

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "uulab/maps.hpp"
#include "uulab/parallel.hpp"

namespace uulab {

enum class DescentMethod {
  /// Descent along the Newton direction of the residual f^n(x) - x, with a
  /// central-difference Jacobian.
  Newton,
  /// Steepest descent along the central-difference gradient of D.
  Gradient,
};

struct PeriodicSearchConfig {
  int mesh = 120;
  int period = 3;
  Scalar capture_threshold = 0.1Q;
  Scalar refine_target = 1e-5Q;
  Scalar fd_step = 1e-7Q;
  Scalar descent_step = 1e-2Q;
  /// Accepted orbits are polished below this before their spectrum is taken.
  Scalar polish_target = 1e-20Q;
  int max_steps = 20000;
  /// Consecutive step halvings without decrease before giving up.
  int max_backtracks = 50;
  DescentMethod method = DescentMethod::Newton;
  bool accept_lower_period = true;

  void validate() const {
    require(mesh >= 2, "mesh must be >= 2");
    require(period >= 1, "period must be >= 1");
    require(capture_threshold >= 0, "capture threshold must be >= 0");
    require(refine_target > 0 && fd_step > 0 && descent_step > 0 && polish_target > 0,
            "thresholds must be positive");
    require(refine_target < capture_threshold || capture_threshold == 0,
            "refine_target must be below capture_threshold");
    require(max_steps >= 1 && max_backtracks >= 1, "step limits must be >= 1");
  }

  /// Points closer than this are the same periodic point.
  Scalar dedup_tolerance() const { return 10 * refine_target; }
};

struct Candidate {
  Vec3<Scalar> point{};
  Scalar distance = 0;
  std::size_t mesh_index = 0;
};

struct PeriodicOrbit {
  std::vector<Vec3<Scalar>> points;  // canonical rotation: lexicographically smallest first
  Scalar residual = 0;
  std::array<Scalar, 3> moduli_roots{};  // ascending
  std::optional<std::size_t> involution_partner;

  int period() const { return static_cast<int>(points.size()); }
};

inline Scalar return_distance(const MapSpec& spec, const Vec3<Scalar>& x, int period) {
  return torus_distance(apply_n(spec, x, period), x);
}

/// Mesh points (i, j, k) / mesh whose return distance is below the capture
/// threshold, in mesh-index order.
inline std::vector<Candidate> mesh_search(const MapSpec& spec, const PeriodicSearchConfig& cfg,
                                          int threads = 1) {
  cfg.validate();
  const auto m = static_cast<std::size_t>(cfg.mesh);
  std::vector<std::vector<Candidate>> slabs(m);
  const Scalar h = Scalar(1) / cfg.mesh;
  parallel_for(m, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k) {
        const Vec3<Scalar> p{static_cast<Scalar>(i) * h, static_cast<Scalar>(j) * h,
                             static_cast<Scalar>(k) * h};
        const Scalar d = return_distance(spec, p, cfg.period);
        if (d < cfg.capture_threshold) slabs[i].push_back({p, d, (i * m + j) * m + k});
      }
  }, 1);
  std::vector<Candidate> out;
  for (auto& s : slabs) out.insert(out.end(), s.begin(), s.end());
  return out;
}

namespace detail {

// Residual f^n(x) - x - k on the cover with the lattice shift k frozen at the
// expansion point, so finite differences never straddle a wrap.
class ReturnResidual {
 public:
  ReturnResidual(const MapSpec& spec, int period) : spec_(spec), period_(period) {}

  Vec3<Scalar> raw(const Vec3<Scalar>& x) const {
    return apply_n(spec_, x, period_, Chart::Cover) - x;
  }

  Vec3<Scalar> shift_at(const Vec3<Scalar>& x) const {
    const Vec3<Scalar> r = raw(x);
    return {num::round(r.x), num::round(r.y), num::round(r.z)};
  }

  Mat3<Scalar> jacobian_fd(const Vec3<Scalar>& x, Scalar h) const {
    Mat3<Scalar> j;
    for (int c = 0; c < 3; ++c) {
      Vec3<Scalar> xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const Vec3<Scalar> d = raw(xp) - raw(xm);
      for (int r = 0; r < 3; ++r) j(r, c) = d[r] / (2 * h);
    }
    return j;
  }

 private:
  MapSpec spec_;
  int period_;
};

inline std::optional<Vec3<Scalar>> solve3(const Mat3<Scalar>& m, const Vec3<Scalar>& b) {
  const Scalar det = m.det();
  if (det == 0 || !num::isfinite(det)) return std::nullopt;
  auto column_replaced = [&](int c) {
    Mat3<Scalar> t = m;
    for (int r = 0; r < 3; ++r) t(r, c) = b[r];
    return t.det() / det;
  };
  return Vec3<Scalar>{column_replaced(0), column_replaced(1), column_replaced(2)};
}

struct DescentState {
  Vec3<Scalar> x;
  Scalar d;
};

// One backtracking line search from state along dir, starting at length
// `step`. Returns the number of halvings used or -1 if none decreased D.
inline int backtrack(const MapSpec& spec, int period, DescentState& s, const Vec3<Scalar>& dir,
                     Scalar step, int max_halvings) {
  for (int h = 0; h < max_halvings; ++h, step /= 2) {
    const Vec3<Scalar> trial = torus_reduce(s.x + step * dir);
    const Scalar d = return_distance(spec, trial, period);
    if (d < s.d) {
      s = {trial, d};
      return h;
    }
  }
  return -1;
}

inline DescentState newton_descent(const MapSpec& spec, const PeriodicSearchConfig& cfg,
                                   DescentState s, Scalar target, bool fail_on_stall) {
  const ReturnResidual res(spec, cfg.period);
  for (int it = 0; it < cfg.max_steps && s.d >= target; ++it) {
    const Vec3<Scalar> r = res.raw(s.x) - res.shift_at(s.x);
    const Mat3<Scalar> j = res.jacobian_fd(s.x, cfg.fd_step);
    auto dir = solve3(j, -r);
    if (!dir) {
      // Singular Jacobian: fall back to -J^T r.
      Vec3<Scalar> g{};
      for (int c = 0; c < 3; ++c) g[c] = -(j(0, c) * r.x + j(1, c) * r.y + j(2, c) * r.z);
      dir = g;
    }
    if (backtrack(spec, cfg.period, s, *dir, 1, cfg.max_backtracks) < 0) {
      if (fail_on_stall) throw Error(Errc::Diverged, "no descent along the Newton direction");
      return s;
    }
  }
  if (s.d >= target && fail_on_stall) throw Error(Errc::Diverged, "step limit reached");
  return s;
}

inline DescentState gradient_descent(const MapSpec& spec, const PeriodicSearchConfig& cfg,
                                     DescentState s, Scalar target, bool fail_on_stall) {
  Scalar step = cfg.descent_step;
  int stalls = 0;
  for (int it = 0; it < cfg.max_steps && s.d >= target; ++it) {
    Vec3<Scalar> g{};
    for (int c = 0; c < 3; ++c) {
      Vec3<Scalar> xp = s.x, xm = s.x;
      xp[c] += cfg.fd_step;
      xm[c] -= cfg.fd_step;
      g[c] = (return_distance(spec, xp, cfg.period) - return_distance(spec, xm, cfg.period)) /
             (2 * cfg.fd_step);
    }
    const Scalar gn = norm(g);
    if (!(gn > 0)) break;
    const Vec3<Scalar> dir = (-1 / gn) * g;
    const int used = backtrack(spec, cfg.period, s, dir, step, cfg.max_backtracks - stalls);
    if (used < 0) {
      if (fail_on_stall) throw Error(Errc::Diverged, "D did not decrease over the backtracking budget");
      return s;
    }
    stalls = 0;
    for (int k = 0; k < used; ++k) step /= 2;
    step = num::min(step * 2, cfg.descent_step);
  }
  if (s.d >= target && fail_on_stall) throw Error(Errc::Diverged, "step limit reached");
  return s;
}

inline DescentState descend(const MapSpec& spec, const PeriodicSearchConfig& cfg, DescentState s,
                            Scalar target, bool fail_on_stall) {
  return cfg.method == DescentMethod::Newton ? newton_descent(spec, cfg, s, target, fail_on_stall)
                                             : gradient_descent(spec, cfg, s, target, fail_on_stall);
}

inline bool lex_less(const Vec3<Scalar>& a, const Vec3<Scalar>& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

}  // namespace detail

/// Cube (n-th) roots of the eigenvalue moduli of the ordered product of
/// Jacobians along the cycle, ascending.
inline std::array<Scalar, 3> orbit_spectrum(const MapSpec& spec, const PeriodicOrbit& orbit) {
  require(!orbit.points.empty(), "empty orbit");
  Mat3<Scalar> prod = Mat3<Scalar>::identity();
  for (const auto& p : orbit.points) prod = jacobian(spec, p) * prod;
  const EigenTriple e = mat_eigen(prod);
  const Scalar inv_n = Scalar(1) / orbit.period();
  std::array<Scalar, 3> roots;
  for (std::size_t i = 0; i < 3; ++i) roots[i] = num::pow(e.values[i].modulus(), inv_n);
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Builds the orbit through a converged point: detects the minimal period,
/// rotates to canonical order and fills in the spectrum.
inline PeriodicOrbit make_orbit(const MapSpec& spec, const PeriodicSearchConfig& cfg,
                                const Vec3<Scalar>& x) {
  int period = cfg.period;
  for (int d = 1; d < cfg.period; ++d) {
    if (cfg.period % d == 0 && return_distance(spec, x, d) < cfg.dedup_tolerance()) {
      period = d;
      break;
    }
  }
  if (period < cfg.period && !cfg.accept_lower_period) {
    throw Error(Errc::CollapsedToLowerPeriod, "point has period " + std::to_string(period));
  }
  PeriodicOrbit orbit;
  Vec3<Scalar> p = x;
  for (int i = 0; i < period; ++i) {
    orbit.points.push_back(p);
    p = apply(spec, p);
  }
  const auto first = std::min_element(orbit.points.begin(), orbit.points.end(), detail::lex_less);
  std::rotate(orbit.points.begin(), first, orbit.points.end());
  orbit.residual = return_distance(spec, orbit.points.front(), period);
  orbit.moduli_roots = orbit_spectrum(spec, orbit);
  return orbit;
}

/// Descends from a candidate until D < refine_target, then polishes towards
/// polish_target while D keeps decreasing. Throws diverged when the refine
/// stage stalls.
inline PeriodicOrbit refine(const MapSpec& spec, const Vec3<Scalar>& candidate,
                            const PeriodicSearchConfig& cfg, bool polish = true) {
  cfg.validate();
  detail::DescentState s{torus_reduce(candidate), 0};
  s.d = return_distance(spec, s.x, cfg.period);
  s = detail::descend(spec, cfg, s, cfg.refine_target, true);
  if (polish) s = detail::descend(spec, cfg, s, cfg.polish_target, false);
  return make_orbit(spec, cfg, s.x);
}

/// True when some point of `a` is within tol of the first point of `b`.
inline bool same_orbit(const PeriodicOrbit& a, const PeriodicOrbit& b, Scalar tol) {
  if (a.period() != b.period() || b.points.empty()) return false;
  for (const auto& p : a.points)
    if (torus_distance(p, b.points.front()) < tol) return true;
  return false;
}

struct PairingReport {
  std::size_t pairs = 0;
  std::size_t self_paired = 0;
  std::size_t distinct_spectra = 0;
  Scalar max_pair_spectrum_gap = 0;
};

/// Clusters spectra that agree to `tol` in every root.
inline std::size_t count_distinct_spectra(const std::vector<PeriodicOrbit>& orbits, Scalar tol) {
  std::vector<std::array<Scalar, 3>> reps;
  for (const auto& o : orbits) {
    bool found = false;
    for (const auto& r : reps) {
      bool eq = true;
      for (std::size_t i = 0; i < 3; ++i) eq = eq && num::abs(r[i] - o.moduli_roots[i]) <= tol;
      if (eq) {
        found = true;
        break;
      }
    }
    if (!found) reps.push_back(o.moduli_roots);
  }
  return reps.size();
}

/// Matches every orbit with the orbit through its involution image and sets
/// involution_partner. Throws unpaired-orbit if an image orbit is missing,
/// the matching is not symmetric, or partner spectra differ by more than
/// spectrum_tol.
inline PairingReport pair_by_involution(std::vector<PeriodicOrbit>& orbits, Scalar match_tol = 1e-8Q,
                                        Scalar spectrum_tol = 1e-6Q) {
  PairingReport rep;
  for (std::size_t a = 0; a < orbits.size(); ++a) {
    PeriodicOrbit image;
    image.points.reserve(orbits[a].points.size());
    for (const auto& p : orbits[a].points) image.points.push_back(involution(p));
    std::optional<std::size_t> partner;
    for (std::size_t b = 0; b < orbits.size() && !partner; ++b) {
      if (same_orbit(orbits[b], image, match_tol)) partner = b;
    }
    if (!partner) {
      throw Error(Errc::UnpairedOrbit, "no orbit through the involution image of orbit " + std::to_string(a));
    }
    orbits[a].involution_partner = partner;
  }
  for (std::size_t a = 0; a < orbits.size(); ++a) {
    const std::size_t b = *orbits[a].involution_partner;
    if (*orbits[b].involution_partner != a) {
      throw Error(Errc::UnpairedOrbit, "involution matching is not symmetric");
    }
    for (std::size_t i = 0; i < 3; ++i) {
      rep.max_pair_spectrum_gap =
          num::max(rep.max_pair_spectrum_gap, num::abs(orbits[a].moduli_roots[i] - orbits[b].moduli_roots[i]));
    }
    if (b == a) ++rep.self_paired;
    else if (a < b) ++rep.pairs;
  }
  if (rep.max_pair_spectrum_gap > spectrum_tol) {
    throw Error(Errc::UnpairedOrbit, "paired orbits have different spectra");
  }
  rep.distinct_spectra = count_distinct_spectra(orbits, spectrum_tol);
  return rep;
}

struct OrbitCensus {
  std::vector<PeriodicOrbit> orbits;  // sorted by first point
  std::size_t candidates = 0;
  std::size_t refine_failures = 0;
  std::size_t distinct_points = 0;
};

/// Full search: mesh scan, refinement of every candidate, de-duplication,
/// polishing of one representative per orbit. Candidates are processed in
/// (D, mesh index) order and the representative of each orbit is the first
/// candidate reaching it, so the result is independent of `threads`.
inline OrbitCensus find_orbits(const MapSpec& spec, const PeriodicSearchConfig& cfg, int threads = 1) {
  OrbitCensus census;
  std::vector<Candidate> cands = mesh_search(spec, cfg, threads);
  census.candidates = cands.size();
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.mesh_index < b.mesh_index;
  });

  std::vector<std::optional<PeriodicOrbit>> rough(cands.size());
  parallel_for(cands.size(), threads, [&](std::size_t i) {
    try {
      rough[i] = refine(spec, cands[i].point, cfg, false);
    } catch (const Error&) {
    }
  }, 8);

  const Scalar tol = cfg.dedup_tolerance();
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < rough.size(); ++i) {
    if (!rough[i]) {
      ++census.refine_failures;
      continue;
    }
    bool dup = false;
    for (std::size_t r : reps) dup = dup || same_orbit(*rough[r], *rough[i], tol);
    if (!dup) reps.push_back(i);
  }

  std::vector<std::optional<PeriodicOrbit>> polished(reps.size());
  parallel_for(reps.size(), threads, [&](std::size_t k) {
    try {
      polished[k] = refine(spec, rough[reps[k]]->points.front(), cfg, true);
    } catch (const Error&) {
    }
  }, 1);
  for (auto& p : polished) {
    if (!p) {
      ++census.refine_failures;
      continue;
    }
    bool dup = false;
    for (const auto& o : census.orbits) dup = dup || same_orbit(o, *p, tol);
    if (!dup) census.orbits.push_back(std::move(*p));
  }
  std::sort(census.orbits.begin(), census.orbits.end(),
            [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
              return detail::lex_less(a.points.front(), b.points.front());
            });
  for (const auto& o : census.orbits) census.distinct_points += o.points.size();
  return census;
}

}  // namespace uulab
