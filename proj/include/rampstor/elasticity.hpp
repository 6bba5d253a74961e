#pragma once

// Price response of the threshold policy, pooled over simulated paths, and
// the price elasticity of the resulting demand when the storage response
// rides on top of a firm (price-insensitive) base demand.
//
// Response pooling: every simulated stage contributes its (price, action)
// pair. Starting from an on-grid charge level every action is exactly a
// full ramp or a hold, so bins count buys and sells as integers; that makes
// the pooled curve bitwise reproducible for any worker count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rampstor/config.hpp"
#include "rampstor/format.hpp"
#include "rampstor/simulate.hpp"
#include "rampstor/thresholds.hpp"

namespace rampstor {

struct ElasticityOptions {
  int paths = 10000;
  std::uint64_t seed = 0;
  int bins = 40;
  int threads = 1;
};

struct ResponseBin {
  double price = 0.0;         // bin midpoint
  double avg_response = 0.0;  // mean traded volume at prices in this bin
  std::int64_t count = 0;
};

struct ResponseCurve {
  std::vector<ResponseBin> bins;  // non-empty bins in price order
  double mean_price = 0.0;        // stage-mixture mean of the configured prices
  double std_price = 0.0;
  double vbar = 0.0;
  int paths = 0;
  std::uint64_t seed = 0;
};

inline ResponseCurve average_response(const ProblemConfig& cfg, const ThresholdTable& tbl,
                                      ElasticityOptions opts = {}) {
  if (opts.paths < 1) throw std::invalid_argument("average_response: need at least one path");
  if (opts.bins < 1) throw std::invalid_argument("average_response: need at least one bin");
  const int N = cfg.num_stages();
  const double lo = cfg.min_price();
  const double width = (cfg.max_price() - lo) / opts.bins;
  const int top = opts.bins - 1;

  // Per bin: total stage count, full-ramp buys, full-ramp sells.
  using Cell = std::array<std::int64_t, 3>;
  const auto run_range = [&](int begin, int end, std::vector<Cell>& cells) {
    std::vector<double> prices(static_cast<std::size_t>(N));
    for (int p = begin; p < end; ++p) {
      Rng rng = substream(opts.seed, static_cast<std::uint64_t>(p));
      for (int k = 0; k < N; ++k) prices[static_cast<std::size_t>(k)] = cfg.dist(k).sample(rng);
      const Trajectory tr = run_policy(cfg, tbl, prices);
      for (int k = 0; k < N; ++k) {
        const double lam = prices[static_cast<std::size_t>(k)];
        int j = width > 0.0 ? static_cast<int>((lam - lo) / width) : 0;
        j = std::clamp(j, 0, top);
        Cell& c = cells[static_cast<std::size_t>(j)];
        ++c[0];
        const double v = tr.actions[static_cast<std::size_t>(k)];
        if (v > 0.5 * cfg.vbar()) ++c[1];
        else if (v < -0.5 * cfg.vbar()) ++c[2];
      }
    }
  };

  const int workers = std::max(1, std::min(opts.threads, opts.paths));
  std::vector<std::vector<Cell>> partials(
      static_cast<std::size_t>(workers),
      std::vector<Cell>(static_cast<std::size_t>(opts.bins), Cell{0, 0, 0}));
  if (workers == 1) {
    run_range(0, opts.paths, partials[0]);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (opts.paths + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(opts.paths, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end, std::ref(partials[static_cast<std::size_t>(w)]));
    }
    for (auto& th : pool) th.join();
  }

  ResponseCurve curve;
  curve.vbar = cfg.vbar();
  curve.paths = opts.paths;
  curve.seed = opts.seed;
  for (int j = 0; j < opts.bins; ++j) {
    Cell total{0, 0, 0};
    for (const auto& part : partials)
      for (int f = 0; f < 3; ++f) total[static_cast<std::size_t>(f)] +=
          part[static_cast<std::size_t>(j)][static_cast<std::size_t>(f)];
    if (total[0] == 0) continue;
    ResponseBin bin;
    bin.price = lo + (j + 0.5) * width;
    bin.count = total[0];
    bin.avg_response =
        cfg.vbar() * static_cast<double>(total[1] - total[2]) / static_cast<double>(total[0]);
    curve.bins.push_back(bin);
  }

  // Price moments of the stage mixture, not of the sampled pool, so they
  // carry no Monte Carlo noise.
  double mean = 0.0, second = 0.0;
  for (int k = 0; k < N; ++k) {
    const PricePmf& d = cfg.dist(k);
    mean += d.mean();
    second += d.std_dev() * d.std_dev() + d.mean() * d.mean();
  }
  mean /= N;
  second /= N;
  curve.mean_price = mean;
  curve.std_price = std::sqrt(std::max(0.0, second - mean * mean));
  return curve;
}

struct PedCurve {
  std::vector<double> ped;  // aligned with the curve's bins; NaN if undefined
  double near_mean_ped = std::numeric_limits<double>::quiet_NaN();
  double balance_price = std::numeric_limits<double>::quiet_NaN();
};

// Arc elasticity of total demand d = firm_demand + response along the
// binned curve: centered differences inside, one-sided at the ends.
// Undefined (NaN) where a neighbor is missing, the bin price is zero or
// total demand is not positive.
//
// The near-mean figure is quoted at the balance price: the interpolated
// zero crossing of the response nearest the mean price. There total demand
// equals the firm demand exactly, so figures for different firm demands are
// comparable and differ only by the 1/firm_demand factor. NaN when the
// binned curve never crosses zero.
inline PedCurve ped_curve(const ResponseCurve& curve, double firm_demand) {
  const std::size_t m = curve.bins.size();
  PedCurve out;
  out.ped.assign(m, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t a = j == 0 ? j : j - 1;
    const std::size_t b = j + 1 == m ? j : j + 1;
    if (a == b) continue;
    const double lam = curve.bins[j].price;
    const double demand = firm_demand + curve.bins[j].avg_response;
    if (!(lam > 0.0) || !(demand > 0.0)) continue;
    const double dv = curve.bins[b].avg_response - curve.bins[a].avg_response;
    const double dlam = curve.bins[b].price - curve.bins[a].price;
    out.ped[j] = (dv / demand) / (dlam / lam);
  }
  if (firm_demand > 0.0) {
    for (std::size_t j = 0; j + 1 < m; ++j) {
      const ResponseBin& a = curve.bins[j];
      const ResponseBin& b = curve.bins[j + 1];
      if (!(a.avg_response >= 0.0 && b.avg_response <= 0.0)) continue;
      if (!(a.avg_response > b.avg_response)) continue;
      const double lam =
          a.price + (b.price - a.price) * a.avg_response / (a.avg_response - b.avg_response);
      if (!(lam > 0.0)) continue;
      if (std::isfinite(out.balance_price) &&
          std::abs(lam - curve.mean_price) >= std::abs(out.balance_price - curve.mean_price))
        continue;
      const double slope = (b.avg_response - a.avg_response) / (b.price - a.price);
      out.balance_price = lam;
      out.near_mean_ped = slope * lam / firm_demand;
    }
  }
  return out;
}

struct StateConditionalPed {
  double action_below = 0.0;  // policy action just below the probe price
  double action_above = 0.0;  // and just above
  double delta_demand = 0.0;  // action_above - action_below, never positive
  double ped = std::numeric_limits<double>::quiet_NaN();
};

// Exact demand jump of the policy at one (stage, charge) point as the price
// crosses the probe: 0 away from thresholds, -vbar across a single
// threshold, -2*vbar where buy and sell thresholds coincide. The arc
// elasticity uses the relative price step 2 * rel_eps.
inline StateConditionalPed state_conditional_ped(const ThresholdTable& tbl, int k, double s,
                                                 double price, double firm_demand,
                                                 double rel_eps = 1e-6) {
  if (!(price > 0.0)) throw std::invalid_argument("state_conditional_ped: price must be > 0");
  if (!(rel_eps > 0.0 && rel_eps < 1.0))
    throw std::invalid_argument("state_conditional_ped: rel_eps must lie in (0, 1)");
  StateConditionalPed out;
  out.action_above = optimal_action(tbl, k, s, price * (1.0 + rel_eps));
  out.action_below = optimal_action(tbl, k, s, price * (1.0 - rel_eps));
  out.delta_demand = out.action_above - out.action_below;
  const double mid = firm_demand + 0.5 * (out.action_above + out.action_below);
  if (mid > 0.0) out.ped = (out.delta_demand / mid) / (2.0 * rel_eps);
  return out;
}

inline void write_elasticity_csv(std::ostream& out, const ResponseCurve& curve,
                                 const PedCurve& peds) {
  out << "price,avg_response,count,ped\n";
  for (std::size_t j = 0; j < curve.bins.size(); ++j) {
    out << format_double(curve.bins[j].price) << ',' << format_double(curve.bins[j].avg_response)
        << ',' << curve.bins[j].count << ',';
    if (std::isfinite(peds.ped[j])) out << format_double(peds.ped[j]);
    out << '\n';
  }
}

}  // namespace rampstor
