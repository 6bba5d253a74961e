#pragma once

// Single-period reserve market with price-responsive storage.
//
// Each period clears a price where conventional supply (slope a) plus the
// renewable forecast meets elastic base demand plus the storage bid. The
// storage bids off its stationary threshold policy evaluated at an
// estimated charge level; it then physically follows the policy at the
// true level, and the realized renewable output replaces the forecast, so
// the settled system is out of balance by the estimation and forecast
// errors. Positive imbalance draws on generation reserves, negative on
// demand-side reserves. A baseline run with no storage and no state error
// reuses the same renewable and forecast draws, so reserve capacity can be
// compared like for like.
//
// The excess-supply curve is strictly increasing in price within the
// policy's hold/buy/sell pieces and jumps upward at the thresholds, so the
// clearing price is found by bisection piece by piece; when the curve jumps
// across zero at a threshold there is no exact clear and the period settles
// at the threshold price with the `rationed` flag set.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "rampstor/format.hpp"
#include "rampstor/infinite.hpp"
#include "rampstor/rng.hpp"
#include "rampstor/stats.hpp"

namespace rampstor {

struct MarketConfig {
  double supply_slope = 0.2;  // conventional generation offered per unit price

  // Elastic base demand base + scale * e^(-p/temp) / (e^(-p/temp) + e^(-ref/temp)):
  // equals base + scale / 2 at the reference price and falls as prices rise.
  double demand_base = 5.0;
  double demand_scale = 30.0;
  double demand_temp = 30.0;
  double demand_ref_price = 50.0;

  // Renewable output: equal mixture of two normals truncated to [lo, hi].
  double renewable_lo = 0.0;
  double renewable_hi = 16.0;
  double renewable_mean1 = 6.0;
  double renewable_mean2 = 13.0;
  double renewable_std = 1.5;

  // Forecast error on the renewable output, truncated normal with hard
  // bounds; zero std disables it. Forecasts are clipped back to the
  // renewable range and clips are counted.
  double forecast_std = 0.5;
  double forecast_bound = 1.5;

  bool state_error = true;  // charge estimate off by one grid step either way

  int periods = 10000;
  std::uint64_t seed = 0;
};

inline double market_demand(const MarketConfig& m, double price) {
  const double x = std::exp(-price / m.demand_temp);
  const double r = std::exp(-m.demand_ref_price / m.demand_temp);
  return m.demand_base + m.demand_scale * x / (x + r);
}

namespace detail {

inline void check_market_config(const MarketConfig& m) {
  if (!(m.supply_slope > 0.0)) throw std::invalid_argument("market: supply_slope must be > 0");
  if (!(m.demand_scale >= 0.0) || !(m.demand_temp > 0.0) || !(m.demand_ref_price >= 0.0) ||
      !(m.demand_base >= 0.0))
    throw std::invalid_argument("market: bad demand curve parameters");
  if (!(m.renewable_lo >= 0.0) || !(m.renewable_hi > m.renewable_lo) ||
      !std::isfinite(m.renewable_hi) || !(m.renewable_std > 0.0))
    throw std::invalid_argument("market: bad renewable parameters");
  if (!(m.forecast_std >= 0.0)) throw std::invalid_argument("market: forecast_std must be >= 0");
  if (m.forecast_std > 0.0 && !(m.forecast_bound > 0.0))
    throw std::invalid_argument("market: forecast_bound must be > 0");
  if (m.periods < 1) throw std::invalid_argument("market: need at least one period");
}

// Root of base(price) = target on [lo, hi]; base is continuous and
// strictly increasing, base(lo) <= target <= base(hi).
template <typename F>
double bisect(F base, double target, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (base(mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Grow an upper bracket for base(price) = target, then bisect.
template <typename F>
double bisect_up(F base, double target, double lo, double hi0) {
  double hi = hi0 > lo ? hi0 : lo + 1.0;
  for (int it = 0; base(hi) < target; ++it) {
    if (it > 60) throw std::runtime_error("market: no clearing price below bracket limit");
    hi = lo + 2.0 * (hi - lo);
  }
  return bisect(base, target, lo, hi);
}

}  // namespace detail

struct ClearResult {
  double price = 0.0;
  bool rationed = false;  // excess supply jumped across zero at the price
};

// Clearing price given the renewable forecast; `storage` may be null for a
// market without the storage bid. Prices are floored at zero.
inline ClearResult clear_price(const MarketConfig& m, double w_hat,
                               const StationarySolution* storage, int state_idx) {
  if (!std::isfinite(w_hat)) throw std::invalid_argument("clear_price: bad forecast");
  const auto base = [&](double p) { return m.supply_slope * p + w_hat - market_demand(m, p); };
  const double cap = 2.0 * m.demand_ref_price + 100.0;

  if (storage == nullptr) {
    if (base(0.0) >= 0.0) return {0.0, false};
    return {detail::bisect_up(base, 0.0, 0.0, cap), false};
  }

  const StationarySolution& sol = *storage;
  if (state_idx < 0 || state_idx > sol.n)
    throw std::invalid_argument("clear_price: charge index outside [0, n]");
  const double vbar = sol.vbar;
  // Bid pieces: buy below b1, hold on [b1, b2], sell above b2.
  const double b1 = state_idx < sol.n
                        ? std::max(0.0, sol.thresholds[static_cast<std::size_t>(state_idx)])
                        : 0.0;
  const double b2 = state_idx > 0
                        ? std::max(b1, sol.thresholds[static_cast<std::size_t>(state_idx) - 1])
                        : std::numeric_limits<double>::infinity();

  if (base(0.0) >= stationary_action(sol, state_idx, 0.0)) return {0.0, false};

  if (b1 > 0.0) {  // buy piece
    if (base(b1) >= vbar) return {detail::bisect(base, vbar, 0.0, b1), false};
  }
  {  // hold piece
    const double gl = base(b1);
    if (gl >= 0.0) return {b1, gl > 0.0};
    if (std::isinf(b2)) return {detail::bisect_up(base, 0.0, b1, cap), false};
    if (base(b2) >= 0.0) return {detail::bisect(base, 0.0, b1, b2), false};
  }
  {  // sell piece
    const double gl = base(b2) + vbar;
    if (gl >= 0.0) return {b2, true};  // the hold piece ended below zero
    return {detail::bisect_up(base, -vbar, b2, cap), false};
  }
}

struct ReserveReport {
  // Reserve draws per period: positive imbalance draws generation reserves,
  // negative draws demand reserves. The base_ vectors come from the
  // baseline run without storage or state error on the same renewable and
  // forecast draws.
  std::vector<double> gen_draws, demand_draws;
  std::vector<double> base_gen_draws, base_demand_draws;
  std::vector<unsigned char> rationed;  // per period, storage run
  int rationed_periods = 0;
  int forecast_clips = 0;
  double mean_price = 0.0;
  double base_mean_price = 0.0;
  int periods = 0;
  std::uint64_t seed = 0;
};

inline ReserveReport run_reserve_sim(const StationarySolution& storage, const MarketConfig& m) {
  detail::check_market_config(m);
  const int T = m.periods;

  // All stochastic draws up front; the baseline consumes the same
  // renewable outputs and forecast errors.
  std::vector<double> w(static_cast<std::size_t>(T)), w_hat(static_cast<std::size_t>(T));
  std::vector<int> est_shift(static_cast<std::size_t>(T), 0);
  ReserveReport rep;
  for (int t = 0; t < T; ++t) {
    Rng rng = substream(m.seed, static_cast<std::uint64_t>(t));
    const double mean = rng.u01() < 0.5 ? m.renewable_mean1 : m.renewable_mean2;
    const double out =
        rng.truncated_normal(mean, m.renewable_std, m.renewable_lo, m.renewable_hi);
    double forecast = out;
    if (m.forecast_std > 0.0) {
      forecast += rng.truncated_normal(0.0, m.forecast_std, -m.forecast_bound, m.forecast_bound);
      if (forecast < m.renewable_lo) {
        forecast = m.renewable_lo;
        ++rep.forecast_clips;
      } else if (forecast > m.renewable_hi) {
        forecast = m.renewable_hi;
        ++rep.forecast_clips;
      }
    }
    w[static_cast<std::size_t>(t)] = out;
    w_hat[static_cast<std::size_t>(t)] = forecast;
    if (m.state_error) {
      const std::uint64_t u = rng.below(3);
      est_shift[static_cast<std::size_t>(t)] = static_cast<int>(u) - 1;
    }
  }

  rep.gen_draws.resize(static_cast<std::size_t>(T));
  rep.demand_draws.resize(static_cast<std::size_t>(T));
  rep.base_gen_draws.resize(static_cast<std::size_t>(T));
  rep.base_demand_draws.resize(static_cast<std::size_t>(T));
  rep.rationed.resize(static_cast<std::size_t>(T), 0);
  rep.periods = T;
  rep.seed = m.seed;

  int level = 0;  // true charge level, grid units
  for (int t = 0; t < T; ++t) {
    const std::size_t u = static_cast<std::size_t>(t);
    const int est = std::clamp(level + est_shift[u], 0, storage.n);
    const ClearResult cr = clear_price(m, w_hat[u], &storage, est);
    const double actual = stationary_action(storage, level, cr.price);
    const double imbalance =
        market_demand(m, cr.price) + actual - (m.supply_slope * cr.price + w[u]);
    rep.gen_draws[u] = std::max(imbalance, 0.0);
    rep.demand_draws[u] = std::max(-imbalance, 0.0);
    rep.rationed[u] = cr.rationed ? 1 : 0;
    rep.rationed_periods += cr.rationed ? 1 : 0;
    rep.mean_price += cr.price;
    level += actual > 0.0 ? 1 : (actual < 0.0 ? -1 : 0);

    const ClearResult cb = clear_price(m, w_hat[u], nullptr, 0);
    const double base_imb = market_demand(m, cb.price) - (m.supply_slope * cb.price + w[u]);
    rep.base_gen_draws[u] = std::max(base_imb, 0.0);
    rep.base_demand_draws[u] = std::max(-base_imb, 0.0);
    rep.base_mean_price += cb.price;
  }
  rep.mean_price /= T;
  rep.base_mean_price /= T;
  return rep;
}

struct ReliabilityRow {
  double q = 0.0;
  double gen_capacity = 0.0;
  double demand_capacity = 0.0;
  double base_gen_capacity = 0.0;
  double base_demand_capacity = 0.0;
  double gen_increase_pct = std::numeric_limits<double>::quiet_NaN();
  double demand_increase_pct = std::numeric_limits<double>::quiet_NaN();
};

// Reserve capacity needed to cover a fraction q of periods, as the
// ceil(q*T)-th smallest draw, with the relative increase over the baseline.
inline std::vector<ReliabilityRow> reliability_table(const ReserveReport& rep,
                                                     const std::vector<double>& qs = {1.0, 0.99,
                                                                                      0.98}) {
  std::vector<ReliabilityRow> rows;
  for (double q : qs) {
    ReliabilityRow row;
    row.q = q;
    row.gen_capacity = quantile_upper(rep.gen_draws, q);
    row.demand_capacity = quantile_upper(rep.demand_draws, q);
    row.base_gen_capacity = quantile_upper(rep.base_gen_draws, q);
    row.base_demand_capacity = quantile_upper(rep.base_demand_draws, q);
    if (row.base_gen_capacity > 0.0)
      row.gen_increase_pct = 100.0 * (row.gen_capacity - row.base_gen_capacity) / row.base_gen_capacity;
    if (row.base_demand_capacity > 0.0)
      row.demand_increase_pct =
          100.0 * (row.demand_capacity - row.base_demand_capacity) / row.base_demand_capacity;
    rows.push_back(row);
  }
  return rows;
}

// Histogram of reserve draws with fixed-width bins anchored at zero; only
// non-empty bins are written, keyed by bin midpoint.
inline void write_reserve_histogram_csv(std::ostream& out, const std::vector<double>& draws,
                                        double bin_width) {
  if (!(bin_width > 0.0))
    throw std::invalid_argument("reserve histogram: bin_width must be > 0");
  std::vector<std::int64_t> counts;
  for (double d : draws) {
    if (!(d >= 0.0)) throw std::invalid_argument("reserve histogram: draws must be >= 0");
    const std::size_t j = static_cast<std::size_t>(d / bin_width);
    if (counts.size() <= j) counts.resize(j + 1, 0);
    ++counts[j];
  }
  out << "draw_mwh,count\n";
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] > 0)
      out << format_double((static_cast<double>(j) + 0.5) * bin_width) << ',' << counts[j] << '\n';
}

}  // namespace rampstor
