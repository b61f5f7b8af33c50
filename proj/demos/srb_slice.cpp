// Runs one noisy chain of the dissipative family and reports how uniform the
// slice points are on a 200 x 200 grid.
//   demo_srb_slice [epsilon] [steps]

#include <cstdio>
#include <cstdlib>

#include "uulab/srb.hpp"
#include "uulab/stats.hpp"

int main(int argc, char** argv) {
  using namespace uulab;
  const Scalar eps = argc > 1 ? parse_scalar(argv[1]) : 0.1Q;
  const long steps = argc > 2 ? std::atol(argv[2]) : 2000000;
  SrbChain chain(MapSpec::dissipative(eps), NoiseConfig{});
  BinGrid grid(200);
  for (long i = 0; i < steps; ++i) {
    const SrbSample s = chain.next();
    if (in_slice(s.point.y, 0.005Q)) grid.add(s.point.x, s.point.z);
  }
  std::printf("%zu slice points of %ld steps\n", grid.count(), steps);
  std::printf("RSD %.4f  KS-to-uniform %.4f\n", static_cast<double>(rsd(grid)),
              static_cast<double>(ks_uniform(DistFunction(grid))));
}
