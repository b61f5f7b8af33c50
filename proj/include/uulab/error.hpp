#pragma once

#include <stdexcept>
#include <string>

namespace uulab {

enum class Errc {
  InvalidArgument,
  NoRealDominant,
  NotInvertible,
  NoConvergence,
  DegenerateDifference,
  TangentParallelToTransversal,
  Diverged,
  CollapsedToLowerPeriod,
  UnpairedOrbit,
  EmptyInput,
  GridMismatch,
  InsufficientDepths,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "invalid-argument";
    case Errc::NoRealDominant: return "no-real-dominant";
    case Errc::NotInvertible: return "not-invertible";
    case Errc::NoConvergence: return "no-convergence";
    case Errc::DegenerateDifference: return "degenerate-difference";
    case Errc::TangentParallelToTransversal: return "tangent-parallel-to-transversal";
    case Errc::Diverged: return "diverged";
    case Errc::CollapsedToLowerPeriod: return "collapsed-to-lower-period";
    case Errc::UnpairedOrbit: return "unpaired-orbit";
    case Errc::EmptyInput: return "empty-input";
    case Errc::GridMismatch: return "grid-mismatch";
    case Errc::InsufficientDepths: return "insufficient-depths";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(Errc::InvalidArgument, what);
}

}  // namespace uulab
