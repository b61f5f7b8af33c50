// Prints the first points where the strong unstable leaf of the origin
// crosses the integer y-levels, with their density and angle weights.
//   demo_leaf_points [epsilon] [count]

#include <cstdio>
#include <cstdlib>

#include "uulab/manifold.hpp"

int main(int argc, char** argv) {
  using namespace uulab;
  const Scalar eps = argc > 1 ? parse_scalar(argv[1]) : 0.1Q;
  const int count = argc > 2 ? std::atoi(argv[2]) : 10;
  const Shooter shooter(MapSpec::conservative(eps), ShootConfig{});
  std::printf("%4s  %-12s %-12s %-12s %s\n", "y0", "x", "z", "rho", "a");
  for (int y0 = 1; y0 <= count; ++y0) {
    const ManifoldSample s = shooter.shoot(y0);
    std::printf("%4d  %.10f %.10f %.6e %.6f\n", y0, static_cast<double>(s.x), static_cast<double>(s.z),
                static_cast<double>(s.rho), static_cast<double>(s.angle_weight));
  }
}
