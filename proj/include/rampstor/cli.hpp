#pragma once

// Command-line front door for the storage toolkit: parses one subcommand
// per invocation, builds the requested model, and emits a deterministic
// report. Conventions shared by every subcommand:
//
//   - `--format json` emits one report object embedding the full resolved
//     configuration (and the seed for randomized commands). `--format csv`
//     emits the bare table on stdout and mirrors the resolved configuration
//     as a one-line JSON note on stderr, so provenance survives either way.
//   - `--config FILE`, placed before the subcommand, preloads options from
//     an INI file whose [subcommand] section holds flag-named keys.
//     Command-line flags override file values; unknown keys are errors.
//   - Randomized subcommands take `--seed`; when omitted a seed is drawn
//     from the system and reported on stderr as {"generated_seed": ...}.
//     Output is byte-identical across runs for a fixed (config, seed).
//   - Exit codes: 0 success, 1 computation failure, 2 usage/configuration
//     error. Failures print a JSON object {"error", "code"} on stderr.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rampstor/backtest.hpp"
#include "rampstor/config.hpp"
#include "rampstor/elasticity.hpp"
#include "rampstor/format.hpp"
#include "rampstor/infinite.hpp"
#include "rampstor/market.hpp"
#include "rampstor/pmf.hpp"
#include "rampstor/series.hpp"
#include "rampstor/simulate.hpp"
#include "rampstor/thresholds.hpp"

namespace rampstor::cli {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Shared plumbing

struct IoParams {
  std::string format;
  std::string out_path;
};

namespace detail {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

inline bool is_set(double x) { return std::isfinite(x); }

inline void add_io_options(CLI::App* sub, IoParams& io, const std::string& default_format) {
  io.format = default_format;
  sub->add_option("--format", io.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--out", io.out_path, "write the report to this file instead of stdout");
}

inline std::ostream& open_output(const std::string& path, std::ofstream& file,
                                 std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path, std::ios::binary);
  if (!file) throw std::invalid_argument("cannot open output: " + path);
  return file;
}

// JSON report or module CSV plus a provenance note, per the shared contract.
inline void write_report(const IoParams& io, std::ostream& out, std::ostream& err,
                         const json& report,
                         const std::function<void(std::ostream&)>& write_csv) {
  std::ofstream file;
  std::ostream& os = open_output(io.out_path, file, out);
  if (io.format == "json") {
    os << report.dump(2) << '\n';
    return;
  }
  json note{{"command", report.at("command")}, {"config", report.at("config")}};
  if (report.contains("seed")) note["seed"] = report.at("seed");
  err << note.dump() << '\n';
  write_csv(os);
}

inline std::uint64_t generate_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

// Explicit seed, or a generated one reported on stderr.
inline std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t given,
                                  std::ostream& err) {
  if (opt->count() > 0) return given;
  const std::uint64_t seed = generate_seed();
  err << json{{"generated_seed", seed}}.dump() << '\n';
  return seed;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Price distribution selection, shared by most subcommands

struct DistParams {
  std::string kind = "two-point";
  double lo = detail::kUnset;    // two-point low price, or lognormal truncation floor
  double hi = detail::kUnset;    // two-point high price, or lognormal truncation cap
  double a_high = 0.5;           // two-point probability of the high price
  double mean = detail::kUnset;  // lognormal / uniform mean
  double std = detail::kUnset;   // lognormal / uniform standard deviation
  int points = 100;              // support size for discretized families
  std::string prices_path;       // price history CSV when kind == "csv"
  double bin_width = 0.0;        // optional binning when fitting from CSV
  int start_hour = 8;            // hour-of-day window applied to CSV input
  int end_hour = 24;
};

inline void add_dist_options(CLI::App* sub, DistParams& d) {
  sub->add_option("--dist", d.kind, "price distribution family")
      ->check(CLI::IsMember({"two-point", "lognormal", "uniform", "csv"}))
      ->capture_default_str();
  sub->add_option("--lo", d.lo, "low price (two-point) or truncation floor (lognormal)");
  sub->add_option("--hi", d.hi, "high price (two-point) or truncation cap (lognormal)");
  sub->add_option("--a-high", d.a_high, "probability of the high price (two-point)")
      ->capture_default_str();
  sub->add_option("--mean", d.mean, "mean price (lognormal, uniform)");
  sub->add_option("--std", d.std, "price standard deviation (lognormal, uniform)");
  sub->add_option("--points", d.points, "support size for discretized families")
      ->capture_default_str();
  sub->add_option("--prices", d.prices_path, "price history CSV (dist=csv)");
  sub->add_option("--bin-width", d.bin_width,
                  "price bin width when fitting from CSV; 0 keeps distinct prices")
      ->capture_default_str();
  sub->add_option("--start-hour", d.start_hour, "first hour of day kept from CSV input")
      ->capture_default_str();
  sub->add_option("--end-hour", d.end_hour, "hour the CSV window ends at (exclusive)")
      ->capture_default_str();
}

inline PriceSeries load_series(const std::string& path) {
  if (!std::filesystem::exists(path)) throw std::invalid_argument("input not found: " + path);
  return load_price_csv(path);
}

// Fills defaulted lognormal truncation bounds so the echoed configuration
// states the values actually used.
inline void resolve_dist(DistParams& d) {
  if (d.kind == "lognormal" && detail::is_set(d.mean)) {
    if (!detail::is_set(d.lo)) d.lo = d.mean / 10.0;
    if (!detail::is_set(d.hi)) d.hi = d.mean * 3.0;
  }
}

inline PricePmf make_pmf(const DistParams& d) {
  if (d.kind == "two-point") {
    if (!detail::is_set(d.lo) || !detail::is_set(d.hi))
      throw std::invalid_argument("two-point distribution needs --lo and --hi");
    return pmf_two_point(d.lo, d.hi, d.a_high);
  }
  if (d.kind == "lognormal") {
    if (!detail::is_set(d.mean) || !detail::is_set(d.std))
      throw std::invalid_argument("lognormal distribution needs --mean and --std");
    return pmf_lognormal(d.mean, d.std, d.points, d.lo, d.hi);
  }
  if (d.kind == "uniform") {
    if (!detail::is_set(d.mean) || !detail::is_set(d.std))
      throw std::invalid_argument("uniform distribution needs --mean and --std");
    return pmf_uniform(d.mean, d.std, d.points);
  }
  if (d.prices_path.empty()) throw std::invalid_argument("dist=csv needs --prices");
  const PriceSeries series = filter_hour_window(load_series(d.prices_path), d.start_hour,
                                                d.end_hour);
  if (series.points.empty())
    throw std::invalid_argument("price file has no rows inside the hour window");
  return pmf_from_samples(series.prices(), d.bin_width);
}

inline json dist_json(const DistParams& d) {
  if (d.kind == "two-point")
    return {{"kind", d.kind}, {"lo", d.lo}, {"hi", d.hi}, {"a_high", d.a_high}};
  if (d.kind == "lognormal")
    return {{"kind", d.kind}, {"mean", d.mean}, {"std", d.std},
            {"points", d.points}, {"lo", d.lo}, {"hi", d.hi}};
  if (d.kind == "uniform")
    return {{"kind", d.kind}, {"mean", d.mean}, {"std", d.std}, {"points", d.points}};
  return {{"kind", d.kind}, {"prices", d.prices_path}, {"bin_width", d.bin_width},
          {"start_hour", d.start_hour}, {"end_hour", d.end_hour}};
}

// ---------------------------------------------------------------------------
// Cartesian value sweep over capacity and price spread

enum class SweepFamily { kLognormal, kUniform, kTwoPoint };

struct SweepCell {
  int n = 0;
  double sigma = 0.0;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success
};

// Average per-stage profit of the optimal policy for every (n, sigma) pair;
// sigma == 0 degenerates to a point mass at the mean for every family, and
// the two-point family places the mean +/- sigma symmetric pair. Terminal
// inventory is credited at the discretized distribution's mean. Failed cells
// carry their error and the sweep continues.
inline std::vector<SweepCell> value_sweep(SweepFamily family, const std::vector<int>& ns,
                                          const std::vector<double>& sigmas, double mean,
                                          int points, double lo, double hi, int stages,
                                          double vbar) {
  if (ns.empty() || sigmas.empty())
    throw std::invalid_argument("value sweep: need at least one n and one sigma");
  std::vector<SweepCell> cells;
  for (int n : ns) {
    for (double sigma : sigmas) {
      SweepCell cell;
      cell.n = n;
      cell.sigma = sigma;
      try {
        PricePmf pmf = [&] {
          if (sigma == 0.0) return PricePmf({mean}, {1.0});
          if (family == SweepFamily::kLognormal) return pmf_lognormal(mean, sigma, points, lo, hi);
          if (family == SweepFamily::kUniform) return pmf_uniform(mean, sigma, points);
          return pmf_two_point(mean - sigma, mean + sigma, 0.5);
        }();
        const double salvage = pmf.mean();
        cell.value = storage_value(make_iid_config(std::move(pmf), stages, n, vbar, salvage));
        if (cell.value == 0.0) cell.value = 0.0;  // merge the signed zeros
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Subcommand handlers

namespace detail {

struct ThresholdsParams {
  DistParams dist;
  int stages = 24;
  int n = 1;
  double vbar = 1.0;
  double salvage = kUnset;
  IoParams io;
};

inline void run_thresholds(ThresholdsParams& p, std::ostream& out, std::ostream& err) {
  resolve_dist(p.dist);
  const PricePmf pmf = make_pmf(p.dist);
  if (!is_set(p.salvage)) p.salvage = pmf.mean();
  const ProblemConfig cfg = make_iid_config(pmf, p.stages, p.n, p.vbar, p.salvage);
  const ThresholdTable tbl = compute_thresholds(cfg);

  json t = json::array(), e = json::array();
  for (int k = 0; k <= tbl.num_stages(); ++k) {
    json trow = json::array(), erow = json::array();
    for (int i = 0; i < tbl.segments(); ++i) {
      trow.push_back(tbl.t(k, i));
      erow.push_back(tbl.e(k, i));
    }
    t.push_back(std::move(trow));
    e.push_back(std::move(erow));
  }
  const json report{
      {"command", "thresholds"},
      {"config", {{"dist", dist_json(p.dist)}, {"stages", p.stages}, {"n", p.n},
                  {"vbar", p.vbar}, {"salvage", p.salvage}}},
      {"value_per_stage", storage_value(cfg)},
      {"t", std::move(t)},
      {"e", std::move(e)}};
  write_report(p.io, out, err, report, [&](std::ostream& os) { write_threshold_csv(tbl, os); });
}

struct SimulateParams {
  DistParams dist;
  int stages = 24;
  int n = 1;
  double vbar = 1.0;
  double salvage = kUnset;
  double s0 = 0.0;
  int paths = 10000;
  int threads = 1;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  IoParams io;
};

inline void run_simulate(SimulateParams& p, std::ostream& out, std::ostream& err) {
  resolve_dist(p.dist);
  const PricePmf pmf = make_pmf(p.dist);
  if (!is_set(p.salvage)) p.salvage = pmf.mean();
  const ProblemConfig cfg = make_iid_config(pmf, p.stages, p.n, p.vbar, p.salvage);
  const ThresholdTable tbl = compute_thresholds(cfg);
  const std::uint64_t seed = resolve_seed(p.seed_opt, p.seed, err);
  const McResult r = monte_carlo_value(cfg, tbl, p.paths, seed, p.threads, p.s0);

  const json report{
      {"command", "simulate"},
      {"config", {{"dist", dist_json(p.dist)}, {"stages", p.stages}, {"n", p.n},
                  {"vbar", p.vbar}, {"salvage", p.salvage}, {"s0", p.s0},
                  {"paths", p.paths}, {"threads", p.threads}}},
      {"seed", seed},
      {"mean_value", r.mean_value},
      {"std_error", r.std_error}};
  write_report(p.io, out, err, report, [&](std::ostream& os) {
    os << "mean_value,std_error,paths,seed\n"
       << format_double(r.mean_value) << ',' << format_double(r.std_error) << ',' << r.paths
       << ',' << seed << '\n';
  });
}

struct CompetitiveRatioParams {
  std::string prices_path;
  BacktestOptions opt;
  std::string source = "month";
  IoParams io;
};

inline void run_competitive_ratio(CompetitiveRatioParams& p, std::ostream& out,
                                  std::ostream& err) {
  p.opt.source = p.source == "month" ? DistSource::kMonth : DistSource::kPastDays;
  const PriceSeries series = load_series(p.prices_path);
  const BacktestReport rep = run_backtest(series, p.opt);

  json days = json::array();
  for (const DayResult& d : rep.days)
    days.push_back({{"date", d.date},
                    {"policy_profit", d.policy_profit},
                    {"omniscient_profit", d.omniscient_profit},
                    {"ratio", d.ratio},
                    {"kept_by_filter", d.kept_by_filter},
                    {"evaluated", d.evaluated},
                    {"included", d.included},
                    {"note", d.note}});
  const json report{
      {"command", "competitive-ratio"},
      {"config", {{"prices", p.prices_path}, {"n", p.opt.n}, {"vbar", p.opt.vbar},
                  {"block_len", p.opt.block_len}, {"start_hour", p.opt.start_hour},
                  {"end_hour", p.opt.end_hour}, {"filter_c", p.opt.day_filter_c},
                  {"source", p.source}, {"past_days", p.opt.past_days},
                  {"bin_width", p.opt.bin_width}}},
      {"mean_ratio", rep.mean_ratio},
      {"included_days", rep.included_days},
      {"warnings", rep.warnings},
      {"days", std::move(days)}};
  write_report(p.io, out, err, report, [&](std::ostream& os) { write_backtest_csv(os, rep); });
}

struct SweepParams {
  std::string family = "lognormal";
  std::vector<int> ns{1, 2, 5, 10, 20, 40};
  std::vector<double> sigmas{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  double mean = 50.0;
  int points = 100;
  double lo = kUnset;
  double hi = kUnset;
  int stages = 24;
  double vbar = 10.0;
  IoParams io;
};

inline void run_value_sweep(SweepParams& p, std::ostream& out, std::ostream& err) {
  if (!is_set(p.lo)) p.lo = p.mean / 10.0;
  if (!is_set(p.hi)) p.hi = p.mean * 3.0;
  const SweepFamily family = p.family == "lognormal" ? SweepFamily::kLognormal
                             : p.family == "uniform" ? SweepFamily::kUniform
                                                     : SweepFamily::kTwoPoint;
  const std::vector<SweepCell> cells =
      value_sweep(family, p.ns, p.sigmas, p.mean, p.points, p.lo, p.hi, p.stages, p.vbar);

  json jcells = json::array();
  for (const SweepCell& c : cells) {
    json jc{{"n", c.n}, {"sigma", c.sigma}, {"value", c.value}};
    if (!c.error.empty()) jc["error"] = c.error;
    jcells.push_back(std::move(jc));
  }
  const json report{
      {"command", "value-sweep"},
      {"config", {{"family", p.family}, {"n_list", p.ns}, {"sigma_list", p.sigmas},
                  {"mean", p.mean}, {"points", p.points}, {"lo", p.lo}, {"hi", p.hi},
                  {"stages", p.stages}, {"vbar", p.vbar}}},
      {"cells", std::move(jcells)}};
  write_report(p.io, out, err, report, [&](std::ostream& os) {
    os << "n,sigma,value\n";
    for (const SweepCell& c : cells) {
      os << c.n << ',' << format_double(c.sigma) << ',';
      if (c.error.empty()) os << format_double(c.value);
      os << '\n';
    }
  });
}

struct BoundParams {
  double vbar = 0.0;
  int n = 0;
  double lo = 0.0;
  double hi = 0.0;
  IoParams io;
};

inline void run_bound(BoundParams& p, std::ostream& out, std::ostream& err) {
  const double b = max_value_bound(p.vbar, p.n, p.lo, p.hi);
  const json report{
      {"command", "bound"},
      {"config", {{"vbar", p.vbar}, {"n", p.n}, {"lo", p.lo}, {"hi", p.hi}}},
      {"bound", b}};
  write_report(p.io, out, err, report,
               [&](std::ostream& os) { os << format_double(b) << '\n'; });
}

struct TwoPointParams {
  double lo = 0.0;
  double hi = 0.0;
  double a_high = 0.5;
  int n = 1;
  double vbar = 1.0;
  IoParams io;
};

inline void run_two_point(TwoPointParams& p, std::ostream& out, std::ostream& err) {
  const TwoPointStationary r = two_point_stationary(p.vbar, p.n, p.lo, p.hi, p.a_high);
  const double bound = max_value_bound(p.vbar, p.n, p.lo, p.hi);
  const json report{
      {"command", "two-point"},
      {"config", {{"lo", p.lo}, {"hi", p.hi}, {"a_high", p.a_high}, {"n", p.n},
                  {"vbar", p.vbar}}},
      {"gamma", r.gamma},
      {"value", -r.gamma},
      {"occupancy", r.occupancy},
      {"bound", bound}};
  write_report(p.io, out, err, report, [&](std::ostream& os) {
    os << "quantity,value\n";
    os << "gamma," << format_double(r.gamma) << '\n';
    os << "value," << format_double(-r.gamma) << '\n';
    os << "bound," << format_double(bound) << '\n';
    for (std::size_t i = 0; i < r.occupancy.size(); ++i)
      os << "occupancy_" << i << ',' << format_double(r.occupancy[i]) << '\n';
  });
}

struct StationaryParams {
  DistParams dist;
  int n = 1;
  double vbar = 1.0;
  double tol = 0.0;
  std::uint64_t max_iters = 1000000;
  std::uint64_t steps = 0;
  std::uint64_t burn_in = 1000;
  int batches = 50;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  IoParams io;
};

inline void run_stationary(StationaryParams& p, std::ostream& out, std::ostream& err) {
  resolve_dist(p.dist);
  const PricePmf pmf = make_pmf(p.dist);
  const StationarySolution sol =
      relative_value_iteration(pmf, p.n, p.vbar, RviOptions{p.tol, p.max_iters});

  json report{
      {"command", "stationary"},
      {"config", {{"dist", dist_json(p.dist)}, {"n", p.n}, {"vbar", p.vbar}, {"tol", p.tol},
                  {"max_iters", p.max_iters}}},
      {"gamma", sol.gamma},
      {"value", -sol.gamma},
      {"iterations", sol.iterations},
      {"residual", sol.residual},
      {"h", sol.h},
      {"thresholds", sol.thresholds}};
  if (p.steps > 0) {
    const std::uint64_t seed = resolve_seed(p.seed_opt, p.seed, err);
    const StationarySimResult sim =
        simulate_stationary(pmf, sol, p.steps, seed, p.batches, p.burn_in);
    report["seed"] = seed;
    report["simulation"] = {{"mean_profit", sim.mean_profit}, {"se_profit", sim.se_profit},
                            {"occupancy", sim.occupancy},    {"se_occupancy", sim.se_occupancy},
                            {"steps", sim.steps},            {"burn_in", sim.burn_in},
                            {"batches", p.batches}};
  }
  write_report(p.io, out, err, report, [&](std::ostream& os) {
    os << "level,h,threshold\n";
    for (int i = 0; i <= sol.n; ++i) {
      os << i << ',' << format_double(sol.h[static_cast<std::size_t>(i)]) << ',';
      if (i < sol.n) os << format_double(sol.thresholds[static_cast<std::size_t>(i)]);
      os << '\n';
    }
  });
}

struct PhaseMapParams {
  DistParams dist;
  int n = 1;
  double vbar = 1.0;
  double price_min = kUnset;
  double price_max = kUnset;
  int price_steps = 21;
  IoParams io;
};

inline void run_phase_map(PhaseMapParams& p, std::ostream& out, std::ostream& err) {
  resolve_dist(p.dist);
  const PricePmf pmf = make_pmf(p.dist);
  const StationarySolution sol = relative_value_iteration(pmf, p.n, p.vbar);
  if (!is_set(p.price_min)) p.price_min = pmf.min_support();
  if (!is_set(p.price_max)) p.price_max = pmf.max_support();
  if (!(p.price_max >= p.price_min) || p.price_steps < 1)
    throw std::invalid_argument("phase map: need price_max >= price_min and price_steps >= 1");
  std::vector<double> probes;
  for (int j = 0; j < p.price_steps; ++j)
    probes.push_back(p.price_steps == 1
                         ? p.price_min
                         : p.price_min + (p.price_max - p.price_min) * j / (p.price_steps - 1));

  json rows = json::array();
  for (int i = 0; i <= sol.n; ++i)
    for (double lam : probes)
      rows.push_back({{"state", i * sol.vbar},
                      {"action", stationary_action(sol, i, lam)},
                      {"price", lam}});
  const json report{
      {"command", "phase-map"},
      {"config", {{"dist", dist_json(p.dist)}, {"n", p.n}, {"vbar", p.vbar},
                  {"price_min", p.price_min}, {"price_max", p.price_max},
                  {"price_steps", p.price_steps}}},
      {"rows", std::move(rows)}};
  write_report(p.io, out, err, report,
               [&](std::ostream& os) { write_phase_map_csv(os, sol, probes); });
}

struct CliElasticityParams {
  DistParams dist;
  int stages = 288;
  int n = 5;
  double vbar = 10.0;
  double salvage = kUnset;
  int paths = 10000;
  int bins = 40;
  int threads = 1;
  double firm_demand = kUnset;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  IoParams io;
};

inline void run_elasticity(CliElasticityParams& p, std::ostream& out, std::ostream& err) {
  resolve_dist(p.dist);
  const PricePmf pmf = make_pmf(p.dist);
  if (!is_set(p.salvage)) p.salvage = pmf.mean();
  if (!is_set(p.firm_demand)) p.firm_demand = p.vbar;
  const ProblemConfig cfg = make_iid_config(pmf, p.stages, p.n, p.vbar, p.salvage);
  const ThresholdTable tbl = compute_thresholds(cfg);
  const std::uint64_t seed = resolve_seed(p.seed_opt, p.seed, err);
  ElasticityOptions opts;
  opts.paths = p.paths;
  opts.seed = seed;
  opts.bins = p.bins;
  opts.threads = p.threads;
  const ResponseCurve curve = average_response(cfg, tbl, opts);
  const PedCurve peds = ped_curve(curve, p.firm_demand);

  json jbins = json::array();
  for (std::size_t j = 0; j < curve.bins.size(); ++j)
    jbins.push_back({{"price", curve.bins[j].price},
                     {"avg_response", curve.bins[j].avg_response},
                     {"count", curve.bins[j].count},
                     {"ped", peds.ped[j]}});
  const json report{
      {"command", "elasticity"},
      {"config", {{"dist", dist_json(p.dist)}, {"stages", p.stages}, {"n", p.n},
                  {"vbar", p.vbar}, {"salvage", p.salvage}, {"paths", p.paths},
                  {"bins", p.bins}, {"threads", p.threads}, {"firm_demand", p.firm_demand}}},
      {"seed", seed},
      {"mean_price", curve.mean_price},
      {"std_price", curve.std_price},
      {"near_mean_ped", peds.near_mean_ped},
      {"balance_price", peds.balance_price},
      {"bins", std::move(jbins)}};
  write_report(p.io, out, err, report,
               [&](std::ostream& os) { write_elasticity_csv(os, curve, peds); });
}

struct ReservesParams {
  DistParams dist;
  int n = 1;
  double vbar = 1.0;
  MarketConfig market;
  std::vector<double> quantiles{1.0, 0.99, 0.98};
  double hist_bin_width = 0.1;
  std::string gen_hist_path;
  std::string demand_hist_path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  IoParams io;
};

inline void run_reserves(ReservesParams& p, std::ostream& out, std::ostream& err) {
  resolve_dist(p.dist);
  const PricePmf pmf = make_pmf(p.dist);
  const StationarySolution sol = relative_value_iteration(pmf, p.n, p.vbar);
  p.market.seed = resolve_seed(p.seed_opt, p.seed, err);
  const ReserveReport rep = run_reserve_sim(sol, p.market);
  const std::vector<ReliabilityRow> rows = reliability_table(rep, p.quantiles);

  json jrows = json::array();
  for (const ReliabilityRow& r : rows)
    jrows.push_back({{"q", r.q},
                     {"gen_capacity", r.gen_capacity},
                     {"demand_capacity", r.demand_capacity},
                     {"base_gen_capacity", r.base_gen_capacity},
                     {"base_demand_capacity", r.base_demand_capacity},
                     {"gen_increase_pct", r.gen_increase_pct},
                     {"demand_increase_pct", r.demand_increase_pct}});
  const json market{
      {"supply", {{"slope", p.market.supply_slope}}},
      {"demand", {{"base", p.market.demand_base}, {"scale", p.market.demand_scale},
                  {"temp", p.market.demand_temp}, {"ref_price", p.market.demand_ref_price}}},
      {"renewable", {{"lo", p.market.renewable_lo}, {"hi", p.market.renewable_hi},
                     {"mean1", p.market.renewable_mean1}, {"mean2", p.market.renewable_mean2},
                     {"std", p.market.renewable_std}}},
      {"error", {{"forecast_std", p.market.forecast_std},
                 {"forecast_bound", p.market.forecast_bound},
                 {"state_error", p.market.state_error}}},
      {"periods", p.market.periods}};
  const json report{
      {"command", "reserves"},
      {"config", {{"dist", dist_json(p.dist)}, {"n", p.n}, {"vbar", p.vbar},
                  {"market", market}, {"quantiles", p.quantiles},
                  {"hist_bin_width", p.hist_bin_width}}},
      {"seed", p.market.seed},
      {"mean_price", rep.mean_price},
      {"base_mean_price", rep.base_mean_price},
      {"rationed_periods", rep.rationed_periods},
      {"forecast_clips", rep.forecast_clips},
      {"periods", rep.periods},
      {"reliability", std::move(jrows)}};

  const auto write_hist = [&](const std::string& path, const std::vector<double>& draws) {
    if (path.empty()) return;
    std::ofstream file;
    write_reserve_histogram_csv(open_output(path, file, out), draws, p.hist_bin_width);
  };
  write_hist(p.gen_hist_path, rep.gen_draws);
  write_hist(p.demand_hist_path, rep.demand_draws);

  write_report(p.io, out, err, report, [&](std::ostream& os) {
    os << "q,gen_capacity,base_gen_capacity,gen_increase_pct,demand_capacity,"
          "base_demand_capacity,demand_increase_pct\n";
    for (const ReliabilityRow& r : rows) {
      os << format_double(r.q) << ',' << format_double(r.gen_capacity) << ','
         << format_double(r.base_gen_capacity) << ',';
      if (std::isfinite(r.gen_increase_pct)) os << format_double(r.gen_increase_pct);
      os << ',' << format_double(r.demand_capacity) << ','
         << format_double(r.base_demand_capacity) << ',';
      if (std::isfinite(r.demand_increase_pct)) os << format_double(r.demand_increase_pct);
      os << '\n';
    }
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dispatch

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decision tools for ramp-constrained energy storage under random prices"};
  app.set_config("--config", "",
                 "INI file with [subcommand] sections of flag-named keys; place before the "
                 "subcommand; command-line flags win");
  app.allow_config_extras(false);
  app.require_subcommand(1);

  detail::ThresholdsParams thr;
  {
    auto* sub = app.add_subcommand("thresholds", "finite-horizon buy/sell threshold table");
    add_dist_options(sub, thr.dist);
    sub->add_option("--stages", thr.stages, "number of trading stages")->capture_default_str();
    sub->add_option("--n", thr.n, "capacity in ramp units")->capture_default_str();
    sub->add_option("--vbar", thr.vbar, "ramp limit per stage")->capture_default_str();
    sub->add_option("--salvage", thr.salvage,
                    "credit per unit of terminal inventory (default: distribution mean)");
    detail::add_io_options(sub, thr.io, "csv");
    sub->callback([&] { detail::run_thresholds(thr, out, err); });
  }

  detail::SimulateParams sim;
  {
    auto* sub = app.add_subcommand("simulate", "Monte Carlo value of the optimal policy");
    add_dist_options(sub, sim.dist);
    sub->add_option("--stages", sim.stages, "number of trading stages")->capture_default_str();
    sub->add_option("--n", sim.n, "capacity in ramp units")->capture_default_str();
    sub->add_option("--vbar", sim.vbar, "ramp limit per stage")->capture_default_str();
    sub->add_option("--salvage", sim.salvage,
                    "credit per unit of terminal inventory (default: distribution mean)");
    sub->add_option("--s0", sim.s0, "initial stored energy")->capture_default_str();
    sub->add_option("--paths", sim.paths, "number of simulated price paths")
        ->capture_default_str();
    sub->add_option("--threads", sim.threads, "worker thread cap")->capture_default_str();
    sim.seed_opt = sub->add_option("--seed", sim.seed, "RNG seed (omitted: generated)");
    detail::add_io_options(sub, sim.io, "json");
    sub->callback([&] { detail::run_simulate(sim, out, err); });
  }

  detail::CompetitiveRatioParams cr;
  {
    auto* sub = app.add_subcommand(
        "competitive-ratio", "day-by-day policy profit against the perfect-foresight optimum");
    sub->add_option("--prices", cr.prices_path, "price history CSV")->required();
    sub->add_option("--n", cr.opt.n, "capacity in ramp units")->capture_default_str();
    sub->add_option("--vbar", cr.opt.vbar, "ramp limit per stage")->capture_default_str();
    sub->add_option("--block-len", cr.opt.block_len, "prices per trading day after the filter")
        ->capture_default_str();
    sub->add_option("--start-hour", cr.opt.start_hour, "first hour of day kept")
        ->capture_default_str();
    sub->add_option("--end-hour", cr.opt.end_hour, "hour the window ends at (exclusive)")
        ->capture_default_str();
    sub->add_option("--filter-c", cr.opt.day_filter_c,
                    "drop days whose mean is beyond c day-mean standard deviations (default: keep "
                    "all)");
    sub->add_option("--source", cr.source, "distribution source per day")
        ->check(CLI::IsMember({"month", "past-days"}))
        ->capture_default_str();
    sub->add_option("--past-days", cr.opt.past_days, "trailing days pooled when source=past-days")
        ->capture_default_str();
    sub->add_option("--bin-width", cr.opt.bin_width,
                    "price bin width for the fitted distribution; 0 keeps distinct prices")
        ->capture_default_str();
    detail::add_io_options(sub, cr.io, "json");
    sub->callback([&] { detail::run_competitive_ratio(cr, out, err); });
  }

  detail::SweepParams sweep;
  {
    auto* sub = app.add_subcommand("value-sweep",
                                   "storage value over a grid of capacities and price spreads");
    sub->add_option("--family", sweep.family, "distribution family swept over sigma")
        ->check(CLI::IsMember({"lognormal", "uniform", "two-point"}))
        ->capture_default_str();
    sub->add_option("--n-list", sweep.ns, "capacities to sweep")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--sigma-list", sweep.sigmas, "price standard deviations to sweep")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--mean", sweep.mean, "mean price")->capture_default_str();
    sub->add_option("--points", sweep.points, "support size for discretized families")
        ->capture_default_str();
    sub->add_option("--lo", sweep.lo, "lognormal truncation floor (default: mean/10)");
    sub->add_option("--hi", sweep.hi, "lognormal truncation cap (default: 3*mean)");
    sub->add_option("--stages", sweep.stages, "number of trading stages")->capture_default_str();
    sub->add_option("--vbar", sweep.vbar, "ramp limit per stage")->capture_default_str();
    detail::add_io_options(sub, sweep.io, "csv");
    sub->callback([&] { detail::run_value_sweep(sweep, out, err); });
  }

  detail::BoundParams bound;
  {
    auto* sub = app.add_subcommand("bound",
                                   "distribution-free cap on average profit per stage");
    sub->add_option("--vbar", bound.vbar, "ramp limit per stage")->required();
    sub->add_option("--n", bound.n, "capacity in ramp units")->required();
    sub->add_option("--lo", bound.lo, "lowest possible price")->required();
    sub->add_option("--hi", bound.hi, "highest possible price")->required();
    detail::add_io_options(sub, bound.io, "csv");
    sub->callback([&] { detail::run_bound(bound, out, err); });
  }

  detail::TwoPointParams two;
  {
    auto* sub = app.add_subcommand("two-point",
                                   "closed-form stationary value for a two-point price law");
    sub->add_option("--lo", two.lo, "low price")->required();
    sub->add_option("--hi", two.hi, "high price")->required();
    sub->add_option("--a-high", two.a_high, "probability of the high price")
        ->capture_default_str();
    sub->add_option("--n", two.n, "capacity in ramp units")->capture_default_str();
    sub->add_option("--vbar", two.vbar, "ramp limit per stage")->capture_default_str();
    detail::add_io_options(sub, two.io, "json");
    sub->callback([&] { detail::run_two_point(two, out, err); });
  }

  detail::StationaryParams st;
  {
    auto* sub = app.add_subcommand(
        "stationary", "long-run average-profit policy via relative value iteration");
    add_dist_options(sub, st.dist);
    sub->add_option("--n", st.n, "capacity in ramp units")->capture_default_str();
    sub->add_option("--vbar", st.vbar, "ramp limit per stage")->capture_default_str();
    sub->add_option("--tol", st.tol, "convergence span tolerance (0: scaled default)")
        ->capture_default_str();
    sub->add_option("--max-iters", st.max_iters, "iteration cap")->capture_default_str();
    sub->add_option("--steps", st.steps, "simulate this many stationary steps (0: skip)")
        ->capture_default_str();
    sub->add_option("--burn-in", st.burn_in, "steps discarded before measuring")
        ->capture_default_str();
    sub->add_option("--batches", st.batches, "batch count for error bars")
        ->capture_default_str();
    st.seed_opt = sub->add_option("--seed", st.seed, "RNG seed (omitted: generated)");
    detail::add_io_options(sub, st.io, "json");
    sub->callback([&] { detail::run_stationary(st, out, err); });
  }

  detail::PhaseMapParams pm;
  {
    auto* sub = app.add_subcommand("phase-map",
                                   "buy/hold/sell action over the (state, price) plane");
    add_dist_options(sub, pm.dist);
    sub->add_option("--n", pm.n, "capacity in ramp units")->capture_default_str();
    sub->add_option("--vbar", pm.vbar, "ramp limit per stage")->capture_default_str();
    sub->add_option("--price-min", pm.price_min, "lowest probed price (default: support min)");
    sub->add_option("--price-max", pm.price_max, "highest probed price (default: support max)");
    sub->add_option("--price-steps", pm.price_steps, "number of probed prices")
        ->capture_default_str();
    detail::add_io_options(sub, pm.io, "csv");
    sub->callback([&] { detail::run_phase_map(pm, out, err); });
  }

  detail::CliElasticityParams el;
  {
    auto* sub = app.add_subcommand("elasticity",
                                   "average storage response and demand elasticity by price");
    add_dist_options(sub, el.dist);
    sub->add_option("--stages", el.stages, "number of trading stages")->capture_default_str();
    sub->add_option("--n", el.n, "capacity in ramp units")->capture_default_str();
    sub->add_option("--vbar", el.vbar, "ramp limit per stage")->capture_default_str();
    sub->add_option("--salvage", el.salvage,
                    "credit per unit of terminal inventory (default: distribution mean)");
    sub->add_option("--paths", el.paths, "number of simulated price paths")
        ->capture_default_str();
    sub->add_option("--bins", el.bins, "price bins for the response curve")
        ->capture_default_str();
    sub->add_option("--threads", el.threads, "worker thread cap")->capture_default_str();
    sub->add_option("--firm-demand", el.firm_demand,
                    "price-insensitive demand added to the storage response (default: vbar)");
    el.seed_opt = sub->add_option("--seed", el.seed, "RNG seed (omitted: generated)");
    detail::add_io_options(sub, el.io, "csv");
    sub->callback([&] { detail::run_elasticity(el, out, err); });
  }

  detail::ReservesParams rv;
  {
    auto* sub = app.add_subcommand(
        "reserves", "reserve capacity needed when price-responsive storage joins the market");
    add_dist_options(sub, rv.dist);
    sub->add_option("--n", rv.n, "storage capacity in ramp units")->capture_default_str();
    sub->add_option("--vbar", rv.vbar, "storage ramp limit per period")->capture_default_str();
    sub->add_option("--supply-slope", rv.market.supply_slope,
                    "conventional generation offered per unit price")
        ->capture_default_str();
    sub->add_option("--demand-base", rv.market.demand_base, "price-insensitive demand floor")
        ->capture_default_str();
    sub->add_option("--demand-scale", rv.market.demand_scale, "price-sensitive demand range")
        ->capture_default_str();
    sub->add_option("--demand-temp", rv.market.demand_temp, "demand response temperature")
        ->capture_default_str();
    sub->add_option("--demand-ref-price", rv.market.demand_ref_price,
                    "price at the demand curve midpoint")
        ->capture_default_str();
    sub->add_option("--renewable-lo", rv.market.renewable_lo, "renewable output floor")
        ->capture_default_str();
    sub->add_option("--renewable-hi", rv.market.renewable_hi, "renewable output cap")
        ->capture_default_str();
    sub->add_option("--renewable-mean1", rv.market.renewable_mean1,
                    "low renewable regime mean")
        ->capture_default_str();
    sub->add_option("--renewable-mean2", rv.market.renewable_mean2,
                    "high renewable regime mean")
        ->capture_default_str();
    sub->add_option("--renewable-std", rv.market.renewable_std,
                    "within-regime renewable spread")
        ->capture_default_str();
    sub->add_option("--forecast-std", rv.market.forecast_std,
                    "renewable forecast error spread (0: perfect forecast)")
        ->capture_default_str();
    sub->add_option("--forecast-bound", rv.market.forecast_bound,
                    "hard cap on the forecast error")
        ->capture_default_str();
    sub->add_flag("--state-error,!--no-state-error", rv.market.state_error,
                  "charge estimate off by one grid step either way");
    sub->add_option("--periods", rv.market.periods, "market periods simulated")
        ->capture_default_str();
    sub->add_option("--quantiles", rv.quantiles, "reliability levels for the capacity table")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--hist-bin-width", rv.hist_bin_width, "reserve draw histogram bin width")
        ->capture_default_str();
    sub->add_option("--gen-hist", rv.gen_hist_path,
                    "write the generation reserve draw histogram CSV here");
    sub->add_option("--demand-hist", rv.demand_hist_path,
                    "write the demand reserve draw histogram CSV here");
    rv.seed_opt = sub->add_option("--seed", rv.seed, "RNG seed (omitted: generated)");
    detail::add_io_options(sub, rv.io, "json");
    sub->callback([&] { detail::run_reserves(rv, out, err); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << json{{"error", e.what()}, {"code", 2}}.dump() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << json{{"error", e.what()}, {"code", 2}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << json{{"error", e.what()}, {"code", 1}}.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace rampstor::cli
