#pragma once

// uulab command line: one subcommand per pipeline stage. Options may also
// come from a key=value config file (--config) or UULAB_<KEY> environment
// variables; the command line wins, then the environment, then the file.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "uulab/csv.hpp"
#include "uulab/manifold.hpp"
#include "uulab/periodic.hpp"
#include "uulab/srb.hpp"
#include "uulab/stats.hpp"

extern char** environ;

namespace uulab::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kValidation = 2, kCompute = 3 };

using Manifest = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// key=value lines; '#' starts a comment.
inline std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidArgument, path + ":" + std::to_string(n) + ": expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline std::map<std::string, std::string> read_env() {
  std::map<std::string, std::string> kv;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    if (entry.rfind("UULAB_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(6, eq - 6);
    for (char& c : key) c = c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    kv[key] = entry.substr(eq + 1);
  }
  return kv;
}

inline bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

inline Scalar scalar_arg(const std::string& name, const std::string& text) {
  try {
    return parse_scalar(text);
  } catch (const std::invalid_argument&) {
    throw Error(Errc::InvalidArgument, "--" + name + ": not a number: '" + text + "'");
  }
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw Error(Errc::InvalidArgument, "cannot write '" + p.string() + "'");
  return os;
}

inline std::ifstream open_in(const std::string& p) {
  std::ifstream is(p);
  if (!is) throw Error(Errc::InvalidArgument, "cannot read '" + p + "'");
  return is;
}

inline void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
  auto os = open_out(dir / "manifest.txt");
  for (const auto& [k, v] : m) os << k << '=' << v << '\n';
}

/// Records every option of `app` (given or default) under its long name.
inline void record_options(const CLI::App& app, Manifest& m) {
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& key = opt->get_lnames().front();
    if (key == "help" || key == "config") continue;
    if (opt->count() > 0) {
      std::string joined;
      for (const auto& r : opt->results()) joined += (joined.empty() ? "" : " ") + r;
      m[key] = joined;
    } else {
      m[key] = opt->get_default_str();
    }
  }
}

}  // namespace detail

/// Parsed option values; Scalars stay as text until validated.
struct Options {
  std::string family = "C";
  std::string epsilon = "0";
  std::string out = ".";
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  // manifold
  std::string y0 = "1..1000";
  int depth = 50;
  std::string mix = "0.1";
  std::string tol_y = "1e-24";
  int max_iter = 2000;
  std::string delta_q = "1e-10";
  std::string solver = "newton";

  // srb
  std::string sigma = "1e-29";
  std::uint64_t seed = 1;
  std::int64_t burn_in = 10000;
  std::int64_t steps = 100000;
  std::string half_width = "0.005";
  int chains = 1;
  bool full_chain = false;
  bool truncate = false;

  // periodic
  int mesh = 120;
  int period = 3;
  std::string capture = "0.1";
  std::string refine_target = "1e-5";
  std::string fd_step = "1e-7";
  std::string descent_step = "1e-2";
  std::string method = "newton";
  bool reject_lower_period = false;
  std::string epsilon_grid;

  // stats / compare
  std::string samples;
  std::string slice;
  int bins = 200;
  std::string mode = "rho_angle";
  bool ks = false;
  std::vector<std::size_t> checkpoints;
};

inline MapSpec map_spec(const Options& o) {
  return MapSpec(parse_family(o.family), detail::scalar_arg("epsilon", o.epsilon));
}

inline ShootConfig shoot_config(const Options& o) {
  ShootConfig c;
  c.depth = o.depth;
  c.mix = detail::scalar_arg("mix", o.mix);
  c.tol_y = detail::scalar_arg("tol-y", o.tol_y);
  c.max_iter = o.max_iter;
  c.delta_q = detail::scalar_arg("delta-q", o.delta_q);
  if (o.solver == "newton") c.solver = ShootSolver::Newton;
  else if (o.solver == "mixing") c.solver = ShootSolver::Mixing;
  else throw Error(Errc::InvalidArgument, "--solver must be newton or mixing");
  c.validate();
  return c;
}

inline NoiseConfig noise_config(const Options& o) {
  NoiseConfig n;
  n.sigma = detail::scalar_arg("sigma", o.sigma);
  n.seed = o.seed;
  n.burn_in = o.burn_in;
  n.truncate = o.truncate;
  n.validate();
  return n;
}

inline PeriodicSearchConfig periodic_config(const Options& o) {
  PeriodicSearchConfig c;
  c.mesh = o.mesh;
  c.period = o.period;
  c.capture_threshold = detail::scalar_arg("capture", o.capture);
  c.refine_target = detail::scalar_arg("refine-target", o.refine_target);
  c.fd_step = detail::scalar_arg("fd-step", o.fd_step);
  c.descent_step = detail::scalar_arg("descent-step", o.descent_step);
  if (o.method == "newton") c.method = DescentMethod::Newton;
  else if (o.method == "gradient") c.method = DescentMethod::Gradient;
  else throw Error(Errc::InvalidArgument, "--method must be newton or gradient");
  c.accept_lower_period = !o.reject_lower_period;
  c.validate();
  return c;
}

namespace detail {

inline void add_map_options(CLI::App* sub, Options& o) {
  sub->add_option("--family", o.family, "map family: L, D or C");
  sub->add_option("--epsilon", o.epsilon, "perturbation size");
}

inline void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--config", "key=value config file");
}

inline void add_manifold(CLI::App* sub, Options& o) {
  add_map_options(sub, o);
  sub->add_option("--y0", o.y0, "y-level range a..b (nonzero)");
  sub->add_option("--depth", o.depth, "backward depth of the seed");
  sub->add_option("--mix", o.mix, "relaxation parameter of the mixing solver");
  sub->add_option("--tol-y", o.tol_y, "tolerance on the y-level");
  sub->add_option("--max-iter", o.max_iter, "iteration cap");
  sub->add_option("--delta-q", o.delta_q, "arc step for the density estimate");
  sub->add_option("--solver", o.solver, "newton or mixing");
  add_common(sub, o);
}

inline void add_srb(CLI::App* sub, Options& o) {
  add_map_options(sub, o);
  sub->add_option("--sigma", o.sigma, "noise standard deviation");
  sub->add_option("--seed", o.seed, "generator seed (chain k uses seed + k)");
  sub->add_option("--burn-in", o.burn_in, "discarded steps per chain");
  sub->add_option("--steps", o.steps, "kept steps per chain");
  sub->add_option("--slice-half-width", o.half_width, "half-width of the slice around y = 0");
  sub->add_option("--chains", o.chains, "independent chains");
  sub->add_flag("--full-chain", o.full_chain, "also write every chain point (single chain only)");
  sub->add_flag("--truncate", o.truncate, "redraw Gaussian components beyond 6");
  add_common(sub, o);
}

inline void add_periodic(CLI::App* sub, Options& o) {
  add_map_options(sub, o);
  sub->add_option("--mesh", o.mesh, "mesh points per axis");
  sub->add_option("--period", o.period, "period n");
  sub->add_option("--capture", o.capture, "capture threshold on the return distance");
  sub->add_option("--refine-target", o.refine_target, "refinement target on the return distance");
  sub->add_option("--fd-step", o.fd_step, "finite-difference step");
  sub->add_option("--descent-step", o.descent_step, "initial gradient step");
  sub->add_option("--method", o.method, "newton or gradient");
  sub->add_flag("--reject-lower-period", o.reject_lower_period, "fail on points of a smaller period");
  sub->add_option("--epsilon-grid", o.epsilon_grid, "comma list of epsilons, one census each (overrides --epsilon)");
  add_common(sub, o);
}

inline void add_stats(CLI::App* sub, Options& o) {
  sub->add_option("--samples", o.samples, "manifold samples CSV")->required();
  sub->add_option("--slice", o.slice, "SRB slice CSV");
  sub->add_option("--bins", o.bins, "bins per axis");
  sub->add_option("--mode", o.mode, "weighting for the distribution dump: plain, rho, angle, rho_angle");
  sub->add_flag("--ks", o.ks, "also write KS-to-uniform statistics");
  sub->add_option("--checkpoints", o.checkpoints, "sample counts to report (default: all samples)")
      ->delimiter(',');
  add_common(sub, o);
}

inline void add_compare(CLI::App* sub, Options& o) {
  sub->add_option("--u", o.samples, "manifold samples CSV")->required();
  sub->add_option("--srb", o.slice, "SRB slice CSV")->required();
  sub->add_option("--bins", o.bins, "bins per axis");
  sub->add_option("--mode", o.mode, "manifold weighting");
  add_common(sub, o);
}

// ---- subcommands ------------------------------------------------------------

inline int run_manifold(const Options& o, Manifest& m, std::ostream& log) {
  const MapSpec spec = map_spec(o);
  const ShootConfig cfg = shoot_config(o);
  const Y0Range range = parse_y0_range(o.y0);
  require(!range.contains_zero(), "--y0 range must not contain 0");
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);

  const Shooter shooter(spec, cfg);
  auto samples = open_out(dir / "manifold.csv");
  csv::write_header(samples, csv::kManifoldHeader);
  std::vector<SampleFailure> failures;
  std::size_t written = 0;
  for_each_sample_chunk(shooter, range, o.threads, 4096, [&](BatchResult&& part) {
    for (const auto& s : part.samples) csv::write_sample(samples, s);
    written += part.samples.size();
    failures.insert(failures.end(), part.failures.begin(), part.failures.end());
  });
  if (!failures.empty()) {
    auto f = open_out(dir / "failures.csv");
    f << "y0,code,message\n";
    for (const auto& x : failures) f << x.y0 << ',' << to_string(x.code) << ',' << x.message << '\n';
  }
  m["samples_written"] = std::to_string(written);
  m["sample_failures"] = std::to_string(failures.size());
  m["outputs"] = "manifold.csv";
  log << "manifold: " << written << " samples, " << failures.size() << " failures\n";
  return kOk;
}

inline int run_srb(const Options& o, Manifest& m, std::ostream& log) {
  const MapSpec spec = map_spec(o);
  const NoiseConfig noise = noise_config(o);
  const Scalar hw = scalar_arg("slice-half-width", o.half_width);
  validate_half_width(hw);
  require(o.steps > 0, "--steps must be > 0");
  require(o.chains >= 1, "--chains must be >= 1");
  require(!o.full_chain || o.chains == 1, "--full-chain needs a single chain");
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);

  auto slice = open_out(dir / "slice.csv");
  csv::write_header(slice, csv::kSliceHeader);
  std::size_t kept = 0;
  if (o.chains == 1) {
    std::ofstream chain;
    if (o.full_chain) {
      chain = open_out(dir / "chain.csv");
      csv::write_header(chain, csv::kChainHeader);
    }
    SrbChain c(spec, noise);
    for (std::int64_t i = 0; i < o.steps; ++i) {
      const SrbSample s = c.next();
      if (o.full_chain) csv::write_chain_row(chain, s);
      if (in_slice(s.point.y, hw)) {
        csv::write_slice_row(slice, {s.point.x, s.point.z});
        ++kept;
      }
    }
  } else {
    SliceCollector proto;
    proto.half_width = hw;
    const auto parts = run_chains(spec, noise, o.steps, o.chains, o.threads, proto);
    for (const auto& p : parts) {
      for (const auto& pt : p.points) csv::write_slice_row(slice, pt);
      kept += p.points.size();
    }
  }
  const double total = static_cast<double>(o.steps) * o.chains;
  m["slice_points"] = std::to_string(kept);
  m["slice_fraction"] = std::to_string(static_cast<double>(kept) / total);
  m["outputs"] = o.full_chain ? "chain.csv slice.csv" : "slice.csv";
  log << "srb: " << kept << " slice points from " << static_cast<std::int64_t>(total) << " steps\n";
  return kOk;
}

inline std::vector<Scalar> epsilon_list(const Options& o) {
  if (o.epsilon_grid.empty()) return {scalar_arg("epsilon", o.epsilon)};
  std::vector<Scalar> out;
  for (const auto& cell : csv::split(o.epsilon_grid)) out.push_back(scalar_arg("epsilon-grid", trim(cell)));
  require(!out.empty(), "--epsilon-grid is empty");
  return out;
}

inline int run_periodic(const Options& o, Manifest& m, std::ostream& log) {
  const Family family = parse_family(o.family);
  const std::vector<Scalar> grid = epsilon_list(o);
  std::vector<MapSpec> specs;
  for (Scalar eps : grid) specs.emplace_back(family, eps);
  const PeriodicSearchConfig cfg = periodic_config(o);
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);

  auto os = open_out(dir / "periodic.csv");
  csv::write_header(os, csv::kPeriodicHeader);
  // Per-epsilon counts, space separated in grid order.
  std::map<std::string, std::string> counts;
  auto note = [&](const std::string& key, const std::string& v) {
    counts[key] += (counts[key].empty() ? "" : " ") + v;
  };
  int code = kOk;
  for (const MapSpec& spec : specs) {
    OrbitCensus census = find_orbits(spec, cfg, o.threads);
    note("candidates", std::to_string(census.candidates));
    note("refine_failures", std::to_string(census.refine_failures));
    note("orbits", std::to_string(census.orbits.size()));
    note("distinct_points", std::to_string(census.distinct_points));
    try {
      const PairingReport rep = pair_by_involution(census.orbits);
      note("pairs", std::to_string(rep.pairs));
      note("self_paired", std::to_string(rep.self_paired));
      note("distinct_spectra", std::to_string(rep.distinct_spectra));
    } catch (const Error& e) {
      note("pairs", "-");
      note("self_paired", "-");
      note("distinct_spectra", "-");
      m["pairing_error"] += (m["pairing_error"].empty() ? "" : "; ") + csv::fmt(spec.epsilon()) + ": " + e.what();
      code = kCompute;
    }
    csv::write_periodic_rows(os, spec.epsilon(), census.orbits);
    log << "periodic: epsilon " << to_string(spec.epsilon(), 6) << ": " << census.distinct_points << " points on "
        << census.orbits.size() << " orbits\n";
  }
  for (const auto& [k, v] : counts) m[k] = v;
  m["outputs"] = "periodic.csv";
  return code;
}

struct WeightedGrids {
  std::array<BinGrid, 4> u;
  explicit WeightedGrids(int b) : u{BinGrid(b), BinGrid(b), BinGrid(b), BinGrid(b)} {}
};

inline constexpr std::array<WeightMode, 4> kModes{WeightMode::Plain, WeightMode::Rho, WeightMode::Angle,
                                                  WeightMode::RhoAngle};

inline int run_stats(const Options& o, Manifest& m, std::ostream& log) {
  require(o.bins >= 2, "--bins must be >= 2");
  const WeightMode dump_mode = parse_weight_mode(o.mode);
  auto in = open_in(o.samples);
  const auto samples = csv::read_manifold(in);
  if (samples.empty()) throw Error(Errc::EmptyInput, "no samples in '" + o.samples + "'");
  std::vector<SlicePoint> slice;
  if (!o.slice.empty()) {
    auto sin = open_in(o.slice);
    slice = csv::read_slice(sin);
  }
  std::vector<std::size_t> checkpoints = o.checkpoints;
  if (checkpoints.empty()) checkpoints.push_back(samples.size());
  std::sort(checkpoints.begin(), checkpoints.end());
  for (auto n : checkpoints) {
    require(n >= 1 && n <= samples.size(), "checkpoint " + std::to_string(n) + " outside [1, sample count]");
  }
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);

  WeightedGrids grids(o.bins);
  BinGrid srb(o.bins);
  std::vector<csv::CheckpointRow> rsd_rows, ks_rows;
  std::size_t next = 0;
  for (std::size_t k = 0; k < samples.size() && next < checkpoints.size(); ++k) {
    for (std::size_t w = 0; w < 4; ++w) grids.u[w].add(samples[k].x, samples[k].z, raw_weight(samples[k], kModes[w]));
    if (k < slice.size()) srb.add(slice[k].x, slice[k].z);
    while (next < checkpoints.size() && checkpoints[next] == k + 1) {
      csv::CheckpointRow r, q;
      r.n = q.n = k + 1;
      for (std::size_t w = 0; w < 4; ++w) {
        r.u[w] = rsd(grids.u[w]);
        if (o.ks) q.u[w] = ks_uniform(DistFunction(grids.u[w]));
      }
      if (slice.size() >= k + 1) {
        r.srb = rsd(srb);
        if (o.ks) q.srb = ks_uniform(DistFunction(srb));
      }
      rsd_rows.push_back(r);
      ks_rows.push_back(q);
      ++next;
    }
  }
  {
    auto os = open_out(dir / "rsd.csv");
    csv::write_checkpoints(os, csv::kRsdHeader, rsd_rows);
  }
  std::string outputs = "rsd.csv dist.csv";
  if (o.ks) {
    auto os = open_out(dir / "ks.csv");
    csv::write_checkpoints(os, csv::kKsHeader, ks_rows);
    outputs += " ks.csv";
  }
  {
    auto os = open_out(dir / "dist.csv");
    csv::write_dist(os, DistFunction(bin(build_weighted(samples, dump_mode), o.bins, o.threads)));
  }
  m["samples_read"] = std::to_string(samples.size());
  m["slice_points_read"] = std::to_string(slice.size());
  m["outputs"] = outputs;
  log << "stats: " << rsd_rows.size() << " checkpoints over " << samples.size() << " samples\n";
  return kOk;
}

inline int run_compare(const Options& o, Manifest& m, std::ostream& log) {
  require(o.bins >= 2, "--bins must be >= 2");
  const WeightMode mode = parse_weight_mode(o.mode);
  auto uin = open_in(o.samples);
  const auto samples = csv::read_manifold(uin);
  auto sin = open_in(o.slice);
  const auto slice = csv::read_slice(sin);
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);

  const BinGrid gu = bin(build_weighted(samples, mode), o.bins, o.threads);
  const BinGrid gs = bin(build_uniform(slice), o.bins, o.threads);
  const DistFunction fu(gu), fs(gs);
  auto os = open_out(dir / "compare.csv");
  csv::write_report(os, {{"n_u", static_cast<Scalar>(samples.size())},
                         {"n_srb", static_cast<Scalar>(slice.size())},
                         {"bins", static_cast<Scalar>(o.bins)},
                         {"ks_two_sample", ks_two_sample(fu, fs)},
                         {"ks_u_uniform", ks_uniform(fu)},
                         {"ks_srb_uniform", ks_uniform(fs)},
                         {"rsd_u", rsd(gu)},
                         {"rsd_srb", rsd(gs)}});
  m["outputs"] = "compare.csv";
  log << "compare: KS distance " << to_string(ks_two_sample(fu, fs), 6) << '\n';
  return kOk;
}

}  // namespace detail

/// Linear-map checks with closed-form answers. Prints one line per check.
inline int selftest(std::ostream& log) {
  int failed = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = {}) {
    log << (ok ? "ok   " : "FAIL ") << name << (detail.empty() ? "" : "  " + detail) << '\n';
    failed += ok ? 0 : 1;
  };

  const EigenTriple e = mat_eigen(base_matrix());
  check("spectrum of A",
        e.status == DominantStatus::Ok && num::abs(e.values[0].re - 0.198062264195162Q) < 1e-12Q &&
            num::abs(e.values[1].re - 1.554958132087371Q) < 1e-12Q &&
            num::abs(e.values[2].re - 3.246979603717467Q) < 1e-12Q);

  const MapSpec lin = MapSpec::linear();
  const Vec3<Scalar> v = *e.dominant_vector;
  const Shooter shooter(lin, {});
  Scalar worst = 0, rho_spread = 0, a_err = 0;
  Scalar rho_first = 0;
  for (std::int64_t y0 = 1; y0 <= 200; ++y0) {
    const ManifoldSample s = shooter.shoot(y0);
    const Scalar yy = static_cast<Scalar>(y0);
    worst = num::max(worst, num::abs(wrap_centered(s.x - yy * v.x)));
    worst = num::max(worst, num::abs(wrap_centered(s.z - yy * v.z)));
    if (y0 == 1) rho_first = s.rho;
    rho_spread = num::max(rho_spread, num::abs(s.rho / rho_first - 1));
    a_err = num::max(a_err, num::abs(s.angle_weight - norm(v)));
  }
  check("eigenline oracle", worst < 1e-20Q, "max error " + to_string(worst, 3));
  check("constant density", rho_spread < 1e-8Q, "spread " + to_string(rho_spread, 3));
  check("angle weight = |v|", a_err < 1e-8Q, "error " + to_string(a_err, 3));

  const ManifoldSample plus = shooter.shoot(7), minus = shooter.shoot(-7);
  const Scalar inv = torus_distance(Vec3<Scalar>{plus.x, 0, plus.z}, involution(Vec3<Scalar>{minus.x, 0, minus.z}));
  check("involution", inv < 1e-20Q);

  PeriodicSearchConfig pc;
  pc.mesh = 12;
  pc.period = 1;
  pc.capture_threshold = 0.5Q;
  const OrbitCensus fixed = find_orbits(lin, pc);
  check("single fixed point", fixed.distinct_points == 1, std::to_string(fixed.distinct_points) + " found");

  Lcg rng(1, LcgParams{});
  bool in_range = true;
  for (int i = 0; i < 1000; ++i) {
    const Scalar u = rng.uniform();
    in_range = in_range && u > 0 && u < 1;
  }
  check("generator range", in_range);

  log << (failed == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failed == 0 ? kOk : kCompute;
}

/// Entry point. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  Options o;
  CLI::App app{"uulab: unstable manifolds, SRB samples and periodic orbits of toral maps", "uulab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::map<std::string, std::function<int(const Options&, Manifest&, std::ostream&)>> handlers;
  auto* man = app.add_subcommand("manifold", "shoot strong unstable leaf points to y-levels");
  detail::add_manifold(man, o);
  handlers["manifold"] = detail::run_manifold;
  auto* srb = app.add_subcommand("srb", "noisy chain samples and slice points");
  detail::add_srb(srb, o);
  handlers["srb"] = detail::run_srb;
  auto* per = app.add_subcommand("periodic", "period-n orbit search");
  detail::add_periodic(per, o);
  handlers["periodic"] = detail::run_periodic;
  auto* st = app.add_subcommand("stats", "RSD and KS statistics of a sample set");
  detail::add_stats(st, o);
  handlers["stats"] = detail::run_stats;
  auto* cmp = app.add_subcommand("compare", "compare manifold samples with SRB slice points");
  detail::add_compare(cmp, o);
  handlers["compare"] = detail::run_compare;
  app.add_subcommand("selftest", "closed-form checks on the linear map");

  try {
    // Fold config-file and environment settings into the argument list.
    const auto subs = app.get_subcommands([](const CLI::App*) { return true; });
    const bool known = !args.empty() && std::any_of(subs.begin(), subs.end(), [&](const CLI::App* s) {
                         return s->get_name() == args.front();
                       });
    if (known) {
      CLI::App* sub = app.get_subcommand(args.front());
      std::map<std::string, std::string> extra;
      std::string config_path;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
      }
      const auto env = detail::read_env();
      if (config_path.empty() && env.count("config")) config_path = env.at("config");
      if (!config_path.empty()) extra = detail::read_config(config_path);
      for (const auto& [k, v] : extra) {
        if (sub->get_option_no_throw("--" + k) == nullptr) {
          throw Error(Errc::InvalidArgument, config_path + ": unknown setting '" + k + "' for " + args.front());
        }
      }
      // Other UULAB_ variables may belong to other programs; only known ones apply.
      for (const auto& [k, v] : env)
        if (sub->get_option_no_throw("--" + k) != nullptr) extra[k] = v;
      for (const auto& [k, v] : extra) {
        if (k == "config" || detail::given_on_command_line(args, k)) continue;
        args.push_back("--" + k + "=" + v);
      }
    }
    std::vector<const char*> cargs{argv[0]};
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, err);
    return code == 0 ? kOk : kValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    if (name == "selftest") return selftest(log);
    Manifest m;
    m["subcommand"] = name;
    m["tool_version"] = kVersion;
    detail::record_options(*chosen, m);
    if (chosen->get_option_no_throw("--family") != nullptr) {
      bool folded = false;
      for (Scalar eps : detail::epsilon_list(o)) folded = folded || !MapSpec(parse_family(o.family), eps).is_diffeomorphism();
      m["non_invertible_regime"] = folded ? "true" : "false";
    }
    const auto t0 = std::chrono::steady_clock::now();
    const int code = handlers.at(name)(o, m, log);
    m["wall_time_s"] = std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    detail::write_manifest(o.out, m);
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::InvalidArgument ? kValidation : kCompute;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCompute;
  }
}

}  // namespace uulab::cli
