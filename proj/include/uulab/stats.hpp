#pragma once

// Weighted point measures on the transversal torus {y = 0}, their B x B
// histograms, relative standard deviation and grid Kolmogorov-Smirnov
// distances.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "uulab/manifold.hpp"
#include "uulab/parallel.hpp"
#include "uulab/srb.hpp"

namespace uulab {

enum class WeightMode { Plain, Rho, Angle, RhoAngle };

inline const char* to_string(WeightMode m) {
  switch (m) {
    case WeightMode::Plain: return "plain";
    case WeightMode::Rho: return "rho";
    case WeightMode::Angle: return "angle";
    case WeightMode::RhoAngle: return "rho_angle";
  }
  return "?";
}

inline WeightMode parse_weight_mode(std::string_view s) {
  if (s == "plain") return WeightMode::Plain;
  if (s == "rho") return WeightMode::Rho;
  if (s == "angle") return WeightMode::Angle;
  if (s == "rho_angle") return WeightMode::RhoAngle;
  throw Error(Errc::InvalidArgument, "unknown weight mode '" + std::string(s) + "'");
}

inline Scalar raw_weight(const ManifoldSample& s, WeightMode m) {
  switch (m) {
    case WeightMode::Plain: return 1;
    case WeightMode::Rho: return s.rho;
    case WeightMode::Angle: return s.angle_weight;
    case WeightMode::RhoAngle: return s.rho * s.angle_weight;
  }
  return 1;
}

struct WeightedPoint {
  Scalar x = 0;
  Scalar z = 0;
  Scalar weight = 0;
};

/// Normalized weights plus the raw total they were divided by.
struct WeightedPoints2D {
  std::vector<WeightedPoint> points;
  Scalar total_weight = 0;
};

namespace detail {

inline WeightedPoints2D normalized(std::vector<WeightedPoint> pts) {
  if (pts.empty()) throw Error(Errc::EmptyInput, "no points to weight");
  Scalar total = 0;
  for (const auto& p : pts) {
    require(p.weight >= 0 && num::isfinite(p.weight), "weights must be finite and >= 0");
    total += p.weight;
  }
  require(total > 0, "total weight must be > 0");
  for (auto& p : pts) p.weight /= total;
  return {std::move(pts), total};
}

}  // namespace detail

inline WeightedPoints2D build_weighted(const std::vector<ManifoldSample>& samples, WeightMode mode) {
  std::vector<WeightedPoint> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples) pts.push_back({s.x, s.z, raw_weight(s, mode)});
  return detail::normalized(std::move(pts));
}

/// Equal weights, used for SRB slice points.
inline WeightedPoints2D build_uniform(const std::vector<SlicePoint>& points) {
  std::vector<WeightedPoint> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.push_back({p.x, p.z, 1});
  return detail::normalized(std::move(pts));
}

inline int bin_index(Scalar c, int bins) {
  const int i = static_cast<int>(num::floor(c * bins));
  return std::clamp(i, 0, bins - 1);
}

/// B x B cell weights, cell (i, j) = [i/B, (i+1)/B) x [j/B, (j+1)/B) in (x, z).
/// Weights are stored as given; rsd and dist_function normalize by total.
class BinGrid {
 public:
  explicit BinGrid(int bins = 200) : bins_(bins) {
    require(bins >= 2, "bins must be >= 2");
    cells_.assign(static_cast<std::size_t>(bins) * bins, 0);
  }

  int bins() const { return bins_; }
  Scalar total() const { return total_; }
  std::size_t count() const { return count_; }

  void add(Scalar x, Scalar z, Scalar w = 1) {
    cells_[index(bin_index(x, bins_), bin_index(z, bins_))] += w;
    total_ += w;
    ++count_;
  }

  void merge(const BinGrid& other) {
    if (other.bins_ != bins_) throw Error(Errc::GridMismatch, "bin counts differ");
    for (std::size_t k = 0; k < cells_.size(); ++k) cells_[k] += other.cells_[k];
    total_ += other.total_;
    count_ += other.count_;
  }

  Scalar cell(int i, int j) const { return cells_[index(i, j)]; }
  const std::vector<Scalar>& cells() const { return cells_; }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(bins_) + static_cast<std::size_t>(j);
  }

  int bins_;
  std::vector<Scalar> cells_;
  Scalar total_ = 0;
  std::size_t count_ = 0;
};

inline constexpr std::size_t kBinChunk = std::size_t{1} << 20;

/// Bins in fixed chunks reduced in chunk order, so sums are bit-identical for
/// every thread count.
inline BinGrid bin(const WeightedPoints2D& pts, int bins = 200, int threads = 1) {
  const std::size_t n = pts.points.size();
  const std::size_t chunks = (n + kBinChunk - 1) / kBinChunk;
  std::vector<BinGrid> partial(chunks, BinGrid(bins));
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kBinChunk);
    for (std::size_t k = c * kBinChunk; k < end; ++k) {
      const auto& p = pts.points[k];
      partial[c].add(p.x, p.z, p.weight);
    }
  }, 1);
  BinGrid out(bins);
  for (const auto& g : partial) out.merge(g);
  return out;
}

/// (1 / mean) * sqrt(mean squared deviation) over the cells.
inline Scalar rsd(const BinGrid& g) {
  require(g.total() > 0, "grid total must be > 0");
  const auto& c = g.cells();
  const Scalar mean = g.total() / static_cast<Scalar>(c.size());
  Scalar acc = 0;
  for (Scalar w : c) acc += (w - mean) * (w - mean);
  return num::sqrt(acc / static_cast<Scalar>(c.size())) / mean;
}

/// Distribution function on the (B+1) x (B+1) grid nodes:
/// F(i, j) = mass of [0, i/B) x [0, j/B).
class DistFunction {
 public:
  explicit DistFunction(const BinGrid& g) : bins_(g.bins()) {
    require(g.total() > 0, "grid total must be > 0");
    const auto n = static_cast<std::size_t>(bins_) + 1;
    values_.assign(n * n, 0);
    for (int i = 1; i <= bins_; ++i) {
      Scalar row = 0;
      for (int j = 1; j <= bins_; ++j) {
        row += g.cell(i - 1, j - 1);
        values_[idx(i, j)] = values_[idx(i - 1, j)] + row;
      }
    }
    for (Scalar& v : values_) v /= g.total();
  }

  int bins() const { return bins_; }
  Scalar at(int i, int j) const { return values_[idx(i, j)]; }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * (static_cast<std::size_t>(bins_) + 1) + static_cast<std::size_t>(j);
  }

  int bins_;
  std::vector<Scalar> values_;
};

inline DistFunction dist_function(const BinGrid& g) { return DistFunction(g); }

inline DistFunction dist_function(const WeightedPoints2D& pts, int bins = 200, int threads = 1) {
  return DistFunction(bin(pts, bins, threads));
}

/// max over nodes of |F(c, d) - c d|.
inline Scalar ks_uniform(const DistFunction& f) {
  const int b = f.bins();
  const Scalar area = Scalar(1) / (static_cast<Scalar>(b) * b);
  Scalar worst = 0;
  for (int i = 0; i <= b; ++i)
    for (int j = 0; j <= b; ++j)
      worst = num::max(worst, num::abs(f.at(i, j) - static_cast<Scalar>(i) * j * area));
  return worst;
}

inline Scalar ks_two_sample(const DistFunction& f1, const DistFunction& f2) {
  if (f1.bins() != f2.bins()) throw Error(Errc::GridMismatch, "distribution grids differ");
  const int b = f1.bins();
  Scalar worst = 0;
  for (int i = 0; i <= b; ++i)
    for (int j = 0; j <= b; ++j) worst = num::max(worst, num::abs(f1.at(i, j) - f2.at(i, j)));
  return worst;
}

/// Equal-weight mixture of the first k measures.
inline WeightedPoints2D cesaro_average(const std::vector<WeightedPoints2D>& per_depth, int k) {
  require(k >= 1, "K must be >= 1");
  if (per_depth.size() < static_cast<std::size_t>(k)) {
    throw Error(Errc::InsufficientDepths, "need " + std::to_string(k) + " depth-indexed measures");
  }
  WeightedPoints2D out;
  const Scalar scale = Scalar(1) / k;
  Scalar total = 0;
  for (int d = 0; d < k; ++d) {
    const auto& m = per_depth[static_cast<std::size_t>(d)];
    Scalar mass = 0;
    for (const auto& p : m.points) mass += p.weight;
    if (!(mass > 0)) throw Error(Errc::EmptyInput, "empty measure in Cesaro average");
    for (const auto& p : m.points) out.points.push_back({p.x, p.z, p.weight / mass * scale});
    total += m.total_weight;
  }
  out.total_weight = total;
  return out;
}

/// Unweighted occupancy counts on a B^3 grid of the torus.
class Occupancy3D {
 public:
  explicit Occupancy3D(int bins = 20) : bins_(bins) {
    require(bins >= 2, "bins must be >= 2");
    counts_.assign(static_cast<std::size_t>(bins) * bins * bins, 0);
  }

  void add(const Vec3<Scalar>& p) {
    const auto b = static_cast<std::size_t>(bins_);
    const auto i = static_cast<std::size_t>(bin_index(p.x, bins_));
    const auto j = static_cast<std::size_t>(bin_index(p.y, bins_));
    const auto k = static_cast<std::size_t>(bin_index(p.z, bins_));
    ++counts_[(i * b + j) * b + k];
    ++total_;
  }
  void operator()(const SrbSample& s) { add(s.point); }

  void merge(const Occupancy3D& o) {
    if (o.bins_ != bins_) throw Error(Errc::GridMismatch, "bin counts differ");
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += o.counts_[k];
    total_ += o.total_;
  }

  std::uint64_t total() const { return total_; }

  double rsd() const {
    require(total_ > 0, "no samples");
    const double mean = static_cast<double>(total_) / static_cast<double>(counts_.size());
    double acc = 0;
    for (auto c : counts_) acc += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
    return std::sqrt(acc / static_cast<double>(counts_.size())) / mean;
  }

 private:
  int bins_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

}  // namespace uulab
