#pragma once

// Plain CSV artifacts. Every Scalar is written with 30 significant digits so
// a round trip through text is exact to working precision.

#include <array>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "uulab/manifold.hpp"
#include "uulab/periodic.hpp"
#include "uulab/srb.hpp"
#include "uulab/stats.hpp"

namespace uulab::csv {

inline const std::vector<std::string> kManifoldHeader{"y0", "x", "z", "tx", "ty", "tz", "rho", "angle_weight"};
inline const std::vector<std::string> kChainHeader{"step", "x", "y", "z"};
inline const std::vector<std::string> kSliceHeader{"x", "z"};
inline const std::vector<std::string> kPeriodicHeader{"epsilon", "orbit_id", "point_index", "x", "y", "z",
                                                      "root1", "root2", "root3", "partner_id"};
inline const std::vector<std::string> kRsdHeader{"N", "rsd_u", "rsd_u_rho", "rsd_u_a", "rsd_u_rhoa", "rsd_srb"};
inline const std::vector<std::string> kKsHeader{"N", "ks_u", "ks_u_rho", "ks_u_a", "ks_u_rhoa", "ks_srb"};
inline const std::vector<std::string> kDistHeader{"B", "i", "j", "F"};
inline const std::vector<std::string> kReportHeader{"metric", "value"};

inline std::string fmt(Scalar v) { return to_string(v, 30); }

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s;
}

inline void write_header(std::ostream& os, const std::vector<std::string>& header) {
  os << join(header) << '\n';
}

/// Reads the header line and fails with the expected/actual columns when it
/// does not match.
inline void expect_header(std::istream& is, const std::vector<std::string>& header) {
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::InvalidArgument, "missing CSV header");
  const auto got = split(line);
  if (got != header) {
    throw Error(Errc::InvalidArgument, "CSV header mismatch: expected '" + join(header) + "', got '" + join(got) + "'");
  }
}

/// Calls row(cells) for each non-empty data line.
template <class Row>
void for_each_row(std::istream& is, std::size_t columns, Row&& row) {
  std::string line;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (cells.size() != columns) {
      throw Error(Errc::InvalidArgument, "line " + std::to_string(n) + ": expected " +
                                              std::to_string(columns) + " columns");
    }
    try {
      row(cells);
    } catch (const std::invalid_argument& e) {
      throw Error(Errc::InvalidArgument, "line " + std::to_string(n) + ": " + e.what());
    } catch (const std::out_of_range& e) {
      throw Error(Errc::InvalidArgument, "line " + std::to_string(n) + ": " + e.what());
    }
  }
}

inline void write_sample(std::ostream& os, const ManifoldSample& s) {
  os << s.y0 << ',' << fmt(s.x) << ',' << fmt(s.z) << ',' << fmt(s.tangent.x) << ',' << fmt(s.tangent.y) << ','
     << fmt(s.tangent.z) << ',' << fmt(s.rho) << ',' << fmt(s.angle_weight) << '\n';
}

inline void write_manifold(std::ostream& os, const std::vector<ManifoldSample>& samples) {
  write_header(os, kManifoldHeader);
  for (const auto& s : samples) write_sample(os, s);
}

inline std::vector<ManifoldSample> read_manifold(std::istream& is) {
  expect_header(is, kManifoldHeader);
  std::vector<ManifoldSample> out;
  for_each_row(is, kManifoldHeader.size(), [&](const std::vector<std::string>& c) {
    ManifoldSample s;
    s.y0 = std::stoll(c[0]);
    s.x = parse_scalar(c[1]);
    s.z = parse_scalar(c[2]);
    s.tangent = {parse_scalar(c[3]), parse_scalar(c[4]), parse_scalar(c[5])};
    s.rho = parse_scalar(c[6]);
    s.angle_weight = parse_scalar(c[7]);
    out.push_back(s);
  });
  return out;
}

inline void write_chain_row(std::ostream& os, const SrbSample& s) {
  os << s.step_index << ',' << fmt(s.point.x) << ',' << fmt(s.point.y) << ',' << fmt(s.point.z) << '\n';
}

inline void write_slice_row(std::ostream& os, const SlicePoint& p) {
  os << fmt(p.x) << ',' << fmt(p.z) << '\n';
}

inline void write_slice(std::ostream& os, const std::vector<SlicePoint>& pts) {
  write_header(os, kSliceHeader);
  for (const auto& p : pts) write_slice_row(os, p);
}

inline std::vector<SlicePoint> read_slice(std::istream& is) {
  expect_header(is, kSliceHeader);
  std::vector<SlicePoint> out;
  for_each_row(is, kSliceHeader.size(), [&](const std::vector<std::string>& c) {
    out.push_back({parse_scalar(c[0]), parse_scalar(c[1])});
  });
  return out;
}

inline void write_periodic_rows(std::ostream& os, Scalar epsilon, const std::vector<PeriodicOrbit>& orbits) {
  for (std::size_t id = 0; id < orbits.size(); ++id) {
    const auto& o = orbits[id];
    for (std::size_t k = 0; k < o.points.size(); ++k) {
      const auto& p = o.points[k];
      os << fmt(epsilon) << ',' << id << ',' << k << ',' << fmt(p.x) << ',' << fmt(p.y) << ',' << fmt(p.z) << ','
         << fmt(o.moduli_roots[0]) << ',' << fmt(o.moduli_roots[1]) << ',' << fmt(o.moduli_roots[2]) << ',';
      if (o.involution_partner) os << *o.involution_partner;
      os << '\n';
    }
  }
}

inline void write_periodic(std::ostream& os, Scalar epsilon, const std::vector<PeriodicOrbit>& orbits) {
  write_header(os, kPeriodicHeader);
  write_periodic_rows(os, epsilon, orbits);
}

/// One row per sample-count checkpoint: the four manifold weightings and,
/// when a slice was supplied, the SRB value (left empty otherwise).
struct CheckpointRow {
  std::size_t n = 0;
  std::array<Scalar, 4> u{};  // plain, rho, angle, rho_angle
  std::optional<Scalar> srb;
};

inline void write_checkpoints(std::ostream& os, const std::vector<std::string>& header,
                              const std::vector<CheckpointRow>& rows) {
  write_header(os, header);
  for (const auto& r : rows) {
    os << r.n;
    for (Scalar v : r.u) os << ',' << fmt(v);
    os << ',';
    if (r.srb) os << fmt(*r.srb);
    os << '\n';
  }
}

inline void write_dist(std::ostream& os, const DistFunction& f) {
  write_header(os, kDistHeader);
  for (int i = 0; i <= f.bins(); ++i)
    for (int j = 0; j <= f.bins(); ++j) os << f.bins() << ',' << i << ',' << j << ',' << fmt(f.at(i, j)) << '\n';
}

/// Two-column metric report; rows are written in the given order.
inline void write_report(std::ostream& os, const std::vector<std::pair<std::string, Scalar>>& rows) {
  write_header(os, kReportHeader);
  for (const auto& [k, v] : rows) os << k << ',' << fmt(v) << '\n';
}

}  // namespace uulab::csv
