#include <gtest/gtest.h>

#include <sstream>

#include "gen.hpp"
#include "uulab/csv.hpp"

using namespace uulab;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Split, EdgeCases) {
  EXPECT_EQ(csv::split("a,b,c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(csv::split("a,,c"), (std::vector<std::string>{"a", "", "c"}));
  EXPECT_EQ(csv::split("a,b,"), (std::vector<std::string>{"a", "b", ""}));
  EXPECT_EQ(csv::split("x,z\r"), (std::vector<std::string>{"x", "z"}));
  EXPECT_EQ(csv::join({"1", "2"}), "1,2");
}

TEST(Manifold, RoundTripKeepsThirtyDigits) {
  gen::Rng rng(61);
  std::vector<ManifoldSample> s(200);
  for (auto& p : s) {
    p.y0 = rng.integer(-100000000, 100000000);
    p.x = rng.unit();
    p.z = rng.unit();
    p.tangent = rng.torus_point();
    p.rho = num::exp(Scalar(rng.uniform(-120, 0)));
    p.angle_weight = 1 + rng.unit();
  }
  std::stringstream io;
  csv::write_manifold(io, s);
  const auto back = csv::read_manifold(io);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    ASSERT_EQ(back[i].y0, s[i].y0);
    ASSERT_LE(num::abs(back[i].x - s[i].x), 1e-29Q);
    ASSERT_LE(num::abs(back[i].tangent.z - s[i].tangent.z), 1e-29Q);
    ASSERT_LE(num::abs(back[i].rho / s[i].rho - 1), 1e-29Q);
  }
}

TEST(Manifold, HeaderMismatchNamesBothHeaders) {
  std::istringstream in("y0,x,z\n1,0.5,0.5\n");
  try {
    csv::read_manifold(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidArgument);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("y0,x,z,tx,ty,tz,rho,angle_weight"), std::string::npos) << msg;
    EXPECT_NE(msg.find("got 'y0,x,z'"), std::string::npos) << msg;
  }
}

TEST(Manifold, BadRowsReportLineNumbers) {
  std::istringstream short_row("y0,x,z,tx,ty,tz,rho,angle_weight\n1,0.1,0.2\n");
  try {
    csv::read_manifold(short_row);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream bad_number("y0,x,z,tx,ty,tz,rho,angle_weight\n\n1,0.1,0.2,0,1,0,abc,1\n");
  try {
    csv::read_manifold(bad_number);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::istringstream empty("");
  EXPECT_THROW(csv::read_manifold(empty), Error);
}

TEST(Slice, RoundTrip) {
  gen::Rng rng(62);
  std::vector<SlicePoint> pts(100);
  for (auto& p : pts) p = {rng.unit(), rng.unit()};
  std::stringstream io;
  csv::write_slice(io, pts);
  EXPECT_EQ(lines_of(io.str()).front(), "x,z");
  const auto back = csv::read_slice(io);
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) ASSERT_LE(num::abs(back[i].z - pts[i].z), 1e-29Q);
}

TEST(Writers, HeadersAndShapes) {
  std::ostringstream chain;
  csv::write_header(chain, csv::kChainHeader);
  csv::write_chain_row(chain, SrbSample{{0.5Q, 0.25Q, 0.125Q}, 7});
  EXPECT_EQ(lines_of(chain.str()),
            (std::vector<std::string>{"step,x,y,z", "7," + csv::fmt(0.5Q) + "," + csv::fmt(0.25Q) + "," +
                                                        csv::fmt(0.125Q)}));

  BinGrid g(2);
  g.add(0.1Q, 0.1Q);
  std::ostringstream dist;
  csv::write_dist(dist, DistFunction(g));
  const auto d = lines_of(dist.str());
  ASSERT_EQ(d.size(), 1u + 9u);
  EXPECT_EQ(d.front(), "B,i,j,F");
  EXPECT_EQ(csv::split(d.back())[2], "2");

  std::ostringstream rsd;
  csv::CheckpointRow row;
  row.n = 1000;
  row.u = {1, 2, 3, 4};
  csv::write_checkpoints(rsd, csv::kRsdHeader, {row});
  const auto r = lines_of(rsd.str());
  EXPECT_EQ(r[0], "N,rsd_u,rsd_u_rho,rsd_u_a,rsd_u_rhoa,rsd_srb");
  const auto cells = csv::split(r[1]);
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_EQ(cells[0], "1000");
  EXPECT_TRUE(cells[5].empty());

  std::ostringstream rep;
  csv::write_report(rep, {{"ks", 0.25Q}});
  EXPECT_EQ(lines_of(rep.str()), (std::vector<std::string>{"metric,value", "ks," + csv::fmt(0.25Q)}));
}

TEST(Writers, PeriodicRows) {
  PeriodicOrbit a, b;
  a.points = {{0.1Q, 0.2Q, 0.3Q}, {0.4Q, 0.5Q, 0.6Q}, {0.7Q, 0.8Q, 0.9Q}};
  a.moduli_roots = {0.2Q, 1.5Q, 3.2Q};
  a.involution_partner = 1;
  b.points = {Vec3<Scalar>{}};
  b.moduli_roots = {0.2Q, 1.5Q, 3.2Q};
  std::ostringstream os;
  csv::write_periodic(os, 0.05Q, {a, b});
  const auto l = lines_of(os.str());
  ASSERT_EQ(l.size(), 5u);
  EXPECT_EQ(l[0], "epsilon,orbit_id,point_index,x,y,z,root1,root2,root3,partner_id");
  EXPECT_EQ(csv::split(l[2])[1], "0");
  EXPECT_EQ(csv::split(l[2])[2], "1");
  EXPECT_EQ(csv::split(l[2])[9], "1");
  EXPECT_EQ(csv::split(l[4]).size(), 10u);
  EXPECT_TRUE(csv::split(l[4])[9].empty());
}
