#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "uulab/srb.hpp"
#include "uulab/stats.hpp"

using namespace uulab;

TEST(Lcg, SmallParameterStep) {
  LcgParams p;
  p.modulus = 101;
  p.multiplier = 100;
  p.increment = 0;
  const auto [s, u] = lcg_next(1, p);
  EXPECT_EQ(s, 100u);
  EXPECT_EQ(u, Scalar(101) / Scalar(102));
}

TEST(Lcg, ReferenceVector) {
  // Default parameters from seed 1, generated once and frozen.
  Lcg r(1, LcgParams{});
  const std::array<std::uint64_t, 3> states{13891176665706064842ULL, 1735893227636088897ULL,
                                            15496482551841746252ULL};
  const std::array<Scalar, 3> uniforms{7.53042195966923066424434825613e-01Q, 9.41029604302960936847530500417e-02Q,
                                       8.40066002429526746552011835448e-01Q};
  for (int i = 0; i < 3; ++i) {
    const Scalar u = r.uniform();
    EXPECT_EQ(r.state(), states[static_cast<std::size_t>(i)]);
    EXPECT_LT(num::abs(u - uniforms[static_cast<std::size_t>(i)]), 1e-30Q);
  }
}

TEST(Lcg, ZeroSeedIsLifted) {
  Lcg r(0, LcgParams{});
  EXPECT_EQ(r.state(), 1u);
  EXPECT_GT(r.uniform(), Scalar(0));
}

TEST(Lcg, RejectsBadParameters) {
  LcgParams p;
  p.multiplier = p.modulus;
  EXPECT_THROW(Lcg(1, p), Error);
}

TEST(Lcg, ChiSquareUniformity) {
  Lcg r(12345, LcgParams{});
  constexpr int kBins = 100;
  constexpr int kDraws = 1000000;
  std::array<int, kBins> counts{};
  for (int i = 0; i < kDraws; ++i) {
    const Scalar u = r.uniform();
    ASSERT_TRUE(u > 0 && u < 1);
    ++counts[static_cast<std::size_t>(u * kBins)];
  }
  const double expect = static_cast<double>(kDraws) / kBins;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
  // 99 degrees of freedom, upper 1% point.
  EXPECT_LT(chi2, 134.64);
}

TEST(BoxMuller, Examples) {
  const auto [a, b] = gaussian_pair<Scalar>(0.5Q, 0.25Q);
  EXPECT_LT(num::abs(a), 1e-33Q);
  EXPECT_LT(num::abs(b - 1.17741002251547469101156932646Q), 1e-30Q);
  const auto [c, d] = gaussian_pair<Scalar>(1 - 1e-30Q, 0.1Q);
  EXPECT_LT(num::abs(c), 1e-14Q);
  (void)d;
}

TEST(BoxMuller, MomentsOverAMillionPairs) {
  Lcg r(7, LcgParams{});
  double sum = 0, sq = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = gaussian_pair<double>(static_cast<double>(r.uniform()), static_cast<double>(r.uniform()));
    sum += a + b;
    sq += a * a + b * b;
  }
  const double mean = sum / (2.0 * n);
  const double var = sq / (2.0 * n) - mean * mean;
  EXPECT_NEAR(mean, 0, 0.01);
  EXPECT_NEAR(var, 1, 0.01);
}

TEST(Noise, IsotropicCovariance) {
  GaussianSource g(99, LcgParams{}, false);
  const Scalar sigma = 1e-29Q;
  const int n = 1000000;
  std::array<std::array<Scalar, 3>, 3> cov{};
  for (int i = 0; i < n; ++i) {
    const std::array<Scalar, 3> xi{sigma * g.next(), sigma * g.next(), sigma * g.next()};
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) cov[a][b] += xi[a] * xi[b];
  }
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      const Scalar c = cov[a][b] / n / (sigma * sigma);
      EXPECT_LT(num::abs(c - (a == b ? 1 : 0)), 0.02Q) << a << "," << b;
    }
}

TEST(Noise, TruncationBoundsDraws) {
  GaussianSource g(3, LcgParams{}, true);
  for (int i = 0; i < 200000; ++i) ASSERT_LE(std::fabs(g.next()), 6.0);
}

TEST(NoiseConfig, Validation) {
  NoiseConfig n;
  EXPECT_NO_THROW(n.validate());
  n.sigma = 1e-32Q;
  EXPECT_THROW(n.validate(), Error);
  n = {};
  n.burn_in = -1;
  EXPECT_THROW(n.validate(), Error);
  EXPECT_THROW(srb_chain(MapSpec::linear(), NoiseConfig{}, 0), Error);
}

TEST(Chain, DeterministicStream) {
  NoiseConfig n;
  n.burn_in = 100;
  const auto a = srb_chain(MapSpec::dissipative(0.1Q), n, 2000);
  const auto b = srb_chain(MapSpec::dissipative(0.1Q), n, 2000);
  ASSERT_EQ(a.size(), 2000u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].step_index, static_cast<std::int64_t>(i));
    ASSERT_EQ(a[i].point.x, b[i].point.x);
    ASSERT_EQ(a[i].point.y, b[i].point.y);
    ASSERT_EQ(a[i].point.z, b[i].point.z);
    for (int k = 0; k < 3; ++k) ASSERT_TRUE(a[i].point[k] >= 0 && a[i].point[k] < 1);
  }
  n.seed = 2;
  const auto c = srb_chain(MapSpec::dissipative(0.1Q), n, 10);
  EXPECT_NE(c[5].point.x, a[5].point.x);
}

TEST(Chain, NoiseEntersAtSigmaScale) {
  NoiseConfig n;
  n.burn_in = 0;
  n.sigma = 1e-20Q;
  const auto s = srb_chain(MapSpec::conservative(0.1Q), n, 50);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const Scalar jump = torus_distance(s[i].point, apply(MapSpec::conservative(0.1Q), s[i - 1].point));
    ASSERT_LT(jump, 1e-20Q * 12);
  }
}

TEST(Chain, ConservativeOccupancyIsUniform) {
  NoiseConfig n;
  Occupancy3D occ(20);
  SrbChain c(MapSpec::conservative(0.1Q), n);
  const int steps = 1000000;
  for (int i = 0; i < steps; ++i) occ(c.next());
  // Poisson expectation sqrt(cells / N).
  EXPECT_LT(occ.rsd(), 1.2 * std::sqrt(8000.0 / steps));
}

TEST(Chain, LinearOccupancyIsUniform) {
  Occupancy3D occ(20);
  SrbChain c(MapSpec::linear(), NoiseConfig{});
  const int steps = 1000000;
  for (int i = 0; i < steps; ++i) occ(c.next());
  EXPECT_LT(occ.rsd(), 1.2 * std::sqrt(8000.0 / steps));
}

TEST(Slice, Membership) {
  EXPECT_TRUE(in_slice(0.003Q, 0.005Q));
  EXPECT_TRUE(in_slice(0.996Q, 0.005Q));
  EXPECT_FALSE(in_slice(0.05Q, 0.005Q));
  EXPECT_THROW(validate_half_width(0), Error);
  EXPECT_THROW(validate_half_width(0.6Q), Error);
}

TEST(Slice, FullWidthKeepsEverything) {
  NoiseConfig n;
  n.burn_in = 10;
  const auto chain = srb_chain(MapSpec::conservative(0.1Q), n, 1000);
  EXPECT_EQ(slice_samples(chain, 0.5Q).size(), chain.size());
}

TEST(Slice, ConservativeKeptFraction) {
  const int steps = 1000000;
  const auto chain = srb_chain(MapSpec::conservative(0.1Q), NoiseConfig{}, steps);
  const double kept = static_cast<double>(slice_samples(chain, 0.005Q).size()) / steps;
  const double p = 0.01;
  EXPECT_NEAR(kept, p, 3 * std::sqrt(p * (1 - p) / steps));
}

TEST(Chains, IndependentOfThreadCount) {
  NoiseConfig n;
  n.burn_in = 50;
  SliceCollector proto;
  proto.half_width = 0.05Q;
  const auto a = run_chains(MapSpec::dissipative(0.1Q), n, 20000, 4, 1, proto);
  const auto b = run_chains(MapSpec::dissipative(0.1Q), n, 20000, 4, 4, proto);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    ASSERT_EQ(a[k].points.size(), b[k].points.size());
    for (std::size_t i = 0; i < a[k].points.size(); ++i) ASSERT_EQ(a[k].points[i].x, b[k].points[i].x);
  }
  // Chain k is the single chain with seed + k.
  NoiseConfig n2 = n;
  n2.seed = n.seed + 2;
  const auto single = slice_samples(srb_chain(MapSpec::dissipative(0.1Q), n2, 20000), 0.05Q);
  ASSERT_EQ(single.size(), a[2].points.size());
  EXPECT_EQ(single.front().z, a[2].points.front().z);
}
