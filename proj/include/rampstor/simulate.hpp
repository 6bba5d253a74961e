#pragma once

// Path simulation under the threshold policy, Monte Carlo valuation with
// per-path seeding (results are independent of worker count), and the
// perfect-foresight benchmark used for competitive ratios.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rampstor/config.hpp"
#include "rampstor/rng.hpp"
#include "rampstor/stats.hpp"
#include "rampstor/thresholds.hpp"

namespace rampstor {

namespace detail {

// States evolve by +/-vbar and fill-to-grid moves; snap to the grid when
// floating point leaves us within a hair of it so grid closure stays exact.
inline double snap_state(double s, double vbar) {
  const double g = std::round(s / vbar) * vbar;
  return (std::abs(s - g) <= 1e-9 * vbar) ? g : s;
}

}  // namespace detail

struct Trajectory {
  std::vector<double> prices;
  std::vector<double> actions;  // length N
  std::vector<double> states;   // length N+1, including the initial state
  double profit = 0.0;          // sum of -(penalty + price * action) plus salvage
};

// Run the policy over one realized price path. Prices may fall outside the
// configured support (historical data); the decision rule is well defined
// for any non-negative price.
inline Trajectory run_policy(const ProblemConfig& cfg, const ThresholdTable& tbl,
                             const std::vector<double>& prices, double s0 = 0.0) {
  const int N = cfg.num_stages();
  if (prices.size() != static_cast<std::size_t>(N))
    throw std::invalid_argument("run_policy: need one price per stage");
  if (!(s0 >= 0.0 && s0 <= cfg.sbar()))
    throw std::invalid_argument("run_policy: initial state outside [0, sbar]");

  Trajectory tr;
  tr.prices = prices;
  tr.states.reserve(N + 1);
  tr.actions.reserve(N);
  double s = s0;
  tr.states.push_back(s);
  double profit = 0.0;
  for (int k = 0; k < N; ++k) {
    const double lam = prices[static_cast<std::size_t>(k)];
    if (!std::isfinite(lam) || lam < 0.0)
      throw std::invalid_argument("run_policy: prices must be finite and >= 0");
    const double v = optimal_action(tbl, k, s, lam);
    profit -= cfg.penalty_at(k, s) + lam * v;
    s = detail::snap_state(s + v, cfg.vbar());
    tr.actions.push_back(v);
    tr.states.push_back(s);
  }
  profit += cfg.salvage() * s;
  tr.profit = profit;
  return tr;
}

struct McResult {
  double mean_value = 0.0;  // average per-stage profit across paths
  double std_error = 0.0;
  int paths = 0;
  std::uint64_t seed = 0;
};

// Independent price paths drawn stage by stage from the configured
// distributions. Path p uses substream(seed, p), so the estimate is
// reproducible for any thread count.
inline McResult monte_carlo_value(const ProblemConfig& cfg, const ThresholdTable& tbl,
                                  int paths, std::uint64_t seed, int threads = 1,
                                  double s0 = 0.0) {
  if (paths < 1) throw std::invalid_argument("monte_carlo_value: need at least one path");
  const int N = cfg.num_stages();
  std::vector<double> values(static_cast<std::size_t>(paths));

  const auto run_range = [&](int begin, int end) {
    std::vector<double> prices(static_cast<std::size_t>(N));
    for (int p = begin; p < end; ++p) {
      Rng rng = substream(seed, static_cast<std::uint64_t>(p));
      for (int k = 0; k < N; ++k) prices[static_cast<std::size_t>(k)] = cfg.dist(k).sample(rng);
      values[static_cast<std::size_t>(p)] =
          run_policy(cfg, tbl, prices, s0).profit / static_cast<double>(N);
    }
  };

  const int workers = std::max(1, std::min(threads, paths));
  if (workers == 1) {
    run_range(0, paths);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (paths + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(paths, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  McResult res;
  res.mean_value = mean_of(values);
  res.std_error = standard_error(values);
  res.paths = paths;
  res.seed = seed;
  return res;
}

namespace detail {

// Candidate reachable states: the vbar grid plus, when s0 is off-grid, its
// coset inside [0, sbar]. Any optimal deterministic plan can be carried by
// moves between these points.
inline std::vector<double> state_lattice(const ProblemConfig& cfg, double s0) {
  const double vbar = cfg.vbar();
  const double sbar = cfg.sbar();
  std::vector<double> states;
  for (int i = 0; i <= cfg.n(); ++i) states.push_back(i * vbar);
  const double frac = s0 - std::floor(s0 / vbar + 1e-9) * vbar;
  if (frac > 1e-9 * vbar && frac < vbar * (1.0 - 1e-9)) {
    for (double s = frac; s <= sbar + 1e-9 * vbar; s += vbar)
      states.push_back(std::min(s, sbar));
  }
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end(),
                           [&](double a, double b) { return std::abs(a - b) <= 1e-9 * vbar; }),
               states.end());
  return states;
}

inline std::size_t lattice_index(const std::vector<double>& states, double s, double vbar) {
  const auto it = std::lower_bound(states.begin(), states.end(), s - 1e-9 * vbar);
  if (it == states.end() || std::abs(*it - s) > 1e-9 * vbar)
    throw std::logic_error("state lattice lookup failed");
  return static_cast<std::size_t>(it - states.begin());
}

}  // namespace detail

// Maximum profit with the whole price path known in advance: backward
// dynamic program over the state lattice (grid plus the s0 coset), a few
// dozen states for typical n. Uses the same penalties and salvage value as
// the policy run.
inline double omniscient_value(const ProblemConfig& cfg, const std::vector<double>& prices,
                               double s0 = 0.0) {
  const int N = cfg.num_stages();
  if (prices.size() != static_cast<std::size_t>(N))
    throw std::invalid_argument("omniscient_value: need one price per stage");
  if (!(s0 >= 0.0 && s0 <= cfg.sbar()))
    throw std::invalid_argument("omniscient_value: initial state outside [0, sbar]");
  const double vbar = cfg.vbar();
  const std::vector<double> states = detail::state_lattice(cfg, s0);
  const std::size_t m = states.size();

  std::vector<double> next(m), cur(m);
  for (std::size_t j = 0; j < m; ++j) next[j] = cfg.salvage() * states[j];

  for (int k = N - 1; k >= 0; --k) {
    const double lam = prices[static_cast<std::size_t>(k)];
    if (!std::isfinite(lam) || lam < 0.0)
      throw std::invalid_argument("omniscient_value: prices must be finite and >= 0");
    for (std::size_t j = 0; j < m; ++j) {
      const double s = states[j];
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j2 = 0; j2 < m; ++j2) {
        const double v = states[j2] - s;
        if (v > vbar + 1e-9 * vbar || v < -vbar - 1e-9 * vbar) continue;
        best = std::max(best, -lam * v + next[j2]);
      }
      cur[j] = -cfg.penalty_at(k, s) + best;
    }
    std::swap(next, cur);
  }
  return next[detail::lattice_index(states, s0, vbar)];
}

}  // namespace rampstor
