#pragma once

// Long-run (stationary) storage operation under i.i.d. prices: relative
// value iteration on the charge grid, closed forms for two-point price
// distributions, the distribution-free value bound, and a chain simulator
// with batch-means error bars.
//
// Cost convention: gamma is the minimal long-run average cost per stage, so
// the storage value per stage is -gamma. The differential cost h lives on
// the grid {0, vbar, ..., n*vbar} with h[0] = 0; it is convex and
// non-increasing, and the grid trade thresholds are
// thr[i] = (h[i] - h[i+1]) / vbar: buy at level i iff price < thr[i], sell
// at level i+1 iff price > thr[i]. Ties hold.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rampstor/format.hpp"
#include "rampstor/pmf.hpp"
#include "rampstor/rng.hpp"
#include "rampstor/stats.hpp"

namespace rampstor {

namespace detail {

inline void check_grid_args(double vbar, int n, double lo, double hi) {
  if (!(vbar > 0.0)) throw std::invalid_argument("vbar must be positive");
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(lo >= 0.0) || !(hi >= lo) || !std::isfinite(hi))
    throw std::invalid_argument("need 0 <= lo <= hi < inf");
}

}  // namespace detail

// Largest long-run value per stage achievable by any price distribution
// supported on [lo, hi]: vbar * (hi - lo) / 2 * n / (n + 1). The symmetric
// two-point distribution on {lo, hi} attains it.
inline double max_value_bound(double vbar, int n, double lo, double hi) {
  detail::check_grid_args(vbar, n, lo, hi);
  return vbar * (hi - lo) / 2.0 * static_cast<double>(n) / static_cast<double>(n + 1);
}

// Differential cost at charge level s for the symmetric two-point
// distribution on {lo, hi} (the bound-attaining case). Piecewise linear in
// s with kinks on the vbar grid; the top kink uses the last interior piece.
inline double balanced_two_point_h(double s, double vbar, int n, double lo, double hi) {
  detail::check_grid_args(vbar, n, lo, hi);
  const double sbar = n * vbar;
  if (!(s >= 0.0 && s <= sbar * (1.0 + 1e-12)))
    throw std::invalid_argument("charge level outside [0, n*vbar]");
  int i = static_cast<int>(std::floor(s / vbar + 1e-9));
  if (i > n - 1) i = n - 1;
  const double slope = -((i + 1) * lo + (n - i) * hi) / static_cast<double>(n + 1);
  const double offset = -i * (i + 1) * (hi - lo) * vbar / (2.0 * (n + 1));
  return slope * s + offset;
}

struct TwoPointStationary {
  double a_high = 0.0;  // probability of the high price
  double gamma = 0.0;   // long-run average cost; value per stage is -gamma
  std::vector<double> occupancy;  // stationary charge-level distribution, size n+1
};

// Stationary behaviour under a two-point price distribution on {lo, hi}
// with P(hi) = a_high: buy at lo, sell at hi, so the charge level performs
// a birth-death walk with up-ratio b = (1 - a) / a. Occupancy is computed
// from the smaller of b and 1/b to stay well scaled for extreme a.
inline TwoPointStationary two_point_stationary(double vbar, int n, double lo, double hi,
                                               double a_high) {
  detail::check_grid_args(vbar, n, lo, hi);
  if (!(a_high >= 0.0 && a_high <= 1.0))
    throw std::invalid_argument("a_high must lie in [0, 1]");

  TwoPointStationary out;
  out.a_high = a_high;
  out.occupancy.assign(static_cast<std::size_t>(n) + 1, 0.0);
  if (a_high == 0.0) {
    out.occupancy.back() = 1.0;  // prices never high: fill and sit
    return out;
  }
  if (a_high == 1.0) {
    out.occupancy.front() = 1.0;  // prices never low: nothing to sell
    return out;
  }

  const double b = (1.0 - a_high) / a_high;
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  if (b <= 1.0) {
    double p = 1.0;
    for (int i = 0; i <= n; ++i, p *= b) w[static_cast<std::size_t>(i)] = p;
  } else {
    const double q = 1.0 / b;
    double p = 1.0;
    for (int i = n; i >= 0; --i, p *= q) w[static_cast<std::size_t>(i)] = p;
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (int i = 0; i <= n; ++i) out.occupancy[static_cast<std::size_t>(i)] =
      w[static_cast<std::size_t>(i)] / total;

  // In steady state trades happen at rate a * (1 - p0) each way, each
  // round trip netting vbar * (hi - lo).
  out.gamma = -vbar * (hi - lo) * a_high * (1.0 - out.occupancy.front());
  return out;
}

// Best two-point distribution on {lo, hi} with mean mu: mass
// (mu - lo) / (hi - lo) on hi. Among all price distributions on [lo, hi]
// with that mean, this one maximizes the long-run storage value.
inline TwoPointStationary best_two_point_for_mean(double vbar, int n, double lo, double hi,
                                                  double mu) {
  detail::check_grid_args(vbar, n, lo, hi);
  if (!(hi > lo)) throw std::invalid_argument("need lo < hi for a two-point distribution");
  if (!(mu >= lo && mu <= hi)) throw std::invalid_argument("mean must lie in [lo, hi]");
  return two_point_stationary(vbar, n, lo, hi, (mu - lo) / (hi - lo));
}

struct RviOptions {
  double tol = 0.0;  // 0 means 1e-9 * max_price * vbar
  std::uint64_t max_iters = 1000000;
};

struct StationarySolution {
  double gamma = 0.0;
  std::vector<double> h;           // size n+1, h[0] == 0
  std::vector<double> thresholds;  // size n, non-increasing
  double vbar = 0.0;
  int n = 0;
  std::uint64_t iterations = 0;
  double residual = 0.0;  // span of the final one-step change
};

// Relative value iteration h <- Th - (Th)(0) on the charge grid, stopping
// once span(Th - h) <= tol; gamma is then (Th)(0) and is bracketed by
// min(Th - h) and max(Th - h), so it is accurate to within tol.
inline StationarySolution relative_value_iteration(const PricePmf& pmf, int n, double vbar,
                                                   RviOptions opts = {}) {
  detail::check_grid_args(vbar, n, pmf.min_support(), pmf.max_support());
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-9 * pmf.max_support() * vbar;
  const std::size_t m = static_cast<std::size_t>(n) + 1;

  std::vector<double> h(m, 0.0), th(m, 0.0);
  std::uint64_t iter = 0;
  for (;; ++iter) {
    if (iter >= opts.max_iters)
      throw std::runtime_error("relative value iteration did not converge in " +
                               std::to_string(opts.max_iters) + " iterations");
    for (std::size_t i = 0; i < m; ++i) {
      double expected = 0.0;
      for (std::size_t a = 0; a < pmf.size(); ++a) {
        const double lam = pmf.support()[a];
        double best = h[i];
        if (i > 0) best = std::min(best, -lam * vbar + h[i - 1]);
        if (i + 1 < m) best = std::min(best, lam * vbar + h[i + 1]);
        expected += pmf.probs()[a] * best;
      }
      th[i] = expected;
    }
    double lo_diff = th[0] - h[0], hi_diff = lo_diff;
    for (std::size_t i = 1; i < m; ++i) {
      const double d = th[i] - h[i];
      lo_diff = std::min(lo_diff, d);
      hi_diff = std::max(hi_diff, d);
    }
    const double offset = th[0];
    for (std::size_t i = 0; i < m; ++i) h[i] = th[i] - offset;
    if (hi_diff - lo_diff <= tol) {
      StationarySolution sol;
      sol.gamma = offset;
      sol.h = h;
      sol.thresholds.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        sol.thresholds[static_cast<std::size_t>(i)] =
            (h[static_cast<std::size_t>(i)] - h[static_cast<std::size_t>(i) + 1]) / vbar;
      sol.vbar = vbar;
      sol.n = n;
      sol.iterations = iter + 1;
      sol.residual = hi_diff - lo_diff;
      return sol;
    }
  }
}

// Action at charge grid index i for a spot price: +vbar, 0 or -vbar.
// Strict inequalities; a price exactly on a threshold holds.
inline double stationary_action(const StationarySolution& sol, int i, double lam) {
  if (i < 0 || i > sol.n) throw std::invalid_argument("charge index outside [0, n]");
  if (!(lam >= 0.0) || !std::isfinite(lam))
    throw std::invalid_argument("price must be finite and >= 0");
  if (i < sol.n && lam < sol.thresholds[static_cast<std::size_t>(i)]) return sol.vbar;
  if (i > 0 && lam > sol.thresholds[static_cast<std::size_t>(i) - 1]) return -sol.vbar;
  return 0.0;
}

struct StationarySimResult {
  double mean_profit = 0.0;  // per-stage trading profit
  double se_profit = 0.0;    // batch-means standard error
  std::vector<double> occupancy;     // time fraction per charge level
  std::vector<double> se_occupancy;  // batch-means standard errors
  std::uint64_t steps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
  int batches = 0;
};

// Simulate the charge-level chain under the solved policy. The recorded
// window is split into contiguous batches and batch means feed the error
// bars, so they remain valid despite serial correlation; any trailing
// steps that do not fill a whole batch are dropped.
inline StationarySimResult simulate_stationary(const PricePmf& pmf,
                                               const StationarySolution& sol,
                                               std::uint64_t steps, std::uint64_t seed,
                                               int batches = 50, std::uint64_t burn_in = 1000) {
  if (batches < 2) throw std::invalid_argument("need at least two batches");
  const std::uint64_t batch_len = steps / static_cast<std::uint64_t>(batches);
  if (batch_len == 0) throw std::invalid_argument("need at least one step per batch");
  const std::size_t m = static_cast<std::size_t>(sol.n) + 1;

  Rng rng = substream(seed, 0);
  int state = 0;
  for (std::uint64_t t = 0; t < burn_in; ++t) {
    const double lam = pmf.sample(rng);
    const double v = stationary_action(sol, state, lam);
    state += v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
  }

  std::vector<double> batch_profit(static_cast<std::size_t>(batches), 0.0);
  std::vector<std::vector<double>> batch_occ(
      static_cast<std::size_t>(batches), std::vector<double>(m, 0.0));
  for (int b = 0; b < batches; ++b) {
    double profit = 0.0;
    auto& occ = batch_occ[static_cast<std::size_t>(b)];
    for (std::uint64_t t = 0; t < batch_len; ++t) {
      occ[static_cast<std::size_t>(state)] += 1.0;
      const double lam = pmf.sample(rng);
      const double v = stationary_action(sol, state, lam);
      profit -= lam * v;
      state += v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    }
    batch_profit[static_cast<std::size_t>(b)] = profit / static_cast<double>(batch_len);
    for (double& x : occ) x /= static_cast<double>(batch_len);
  }

  StationarySimResult res;
  res.mean_profit = mean_of(batch_profit);
  res.se_profit = standard_error(batch_profit);
  res.occupancy.assign(m, 0.0);
  res.se_occupancy.assign(m, 0.0);
  std::vector<double> col(static_cast<std::size_t>(batches));
  for (std::size_t i = 0; i < m; ++i) {
    for (int b = 0; b < batches; ++b) col[static_cast<std::size_t>(b)] =
        batch_occ[static_cast<std::size_t>(b)][i];
    res.occupancy[i] = mean_of(col);
    res.se_occupancy[i] = standard_error(col);
  }
  res.steps = batch_len * static_cast<std::uint64_t>(batches);
  res.burn_in = burn_in;
  res.seed = seed;
  res.batches = batches;
  return res;
}

// One row per (charge level, probe price) with the policy's action.
inline void write_phase_map_csv(std::ostream& out, const StationarySolution& sol,
                                const std::vector<double>& prices) {
  out << "state,action,price\n";
  for (int i = 0; i <= sol.n; ++i)
    for (double lam : prices)
      out << format_double(i * sol.vbar) << ',' << format_double(stationary_action(sol, i, lam))
          << ',' << format_double(lam) << '\n';
}

}  // namespace rampstor
