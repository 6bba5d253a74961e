#pragma once

// Backward threshold recursion for ramp-constrained storage facing exogenous
// random prices, and the threshold policy it induces.
//
// The expected cost-to-go is piecewise linear in the state:
//
//   V_k(s) = -t[k][i] * s + e[k][i]   for s in [i*vbar, (i+1)*vbar)
//
// so the whole solution is carried by the slope table t and intercept table
// e. Slopes t[k][i] are non-increasing in i (V_k is convex) and the pieces
// join continuously below capacity. The decision rule compares the realized
// price against the next stage's slopes:
//
//   sell as much as possible   if price >  t[k+1][max(0, i-1)]
//   sell down to the grid      if t[k+1][i]   < price <= t[k+1][i-1]
//   buy up to the next grid    if t[k+1][i+1] < price <= t[k+1][i]
//   buy at full ramp           if price <= t[k+1][i+1]
//
// Equalities sit exactly where written; a price equal to a slope ties toward
// the buy-side branch.
//
// The recursion for the intercept of segment 0 differs from the source
// derivation's printed simplification: the general form needs the full
// price-weighted mass below t[k+1][0], not just the mass at the support
// minimum. The form used here reproduces an exhaustive dynamic-programming
// oracle to 1e-9 on arbitrary discrete supports.

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "rampstor/config.hpp"
#include "rampstor/format.hpp"
#include "rampstor/pmf.hpp"

namespace rampstor {

class ThresholdTable {
 public:
  ThresholdTable(int num_stages, int n, double vbar, double salvage)
      : num_stages_(num_stages), n_(n), vbar_(vbar), salvage_(salvage),
        t_(static_cast<std::size_t>(num_stages) + 1,
           std::vector<double>(static_cast<std::size_t>(n) + 2, 0.0)),
        e_(static_cast<std::size_t>(num_stages) + 1,
           std::vector<double>(static_cast<std::size_t>(n) + 2, 0.0)) {}

  int num_stages() const { return num_stages_; }
  int n() const { return n_; }
  double vbar() const { return vbar_; }
  double sbar() const { return n_ * vbar_; }
  double salvage() const { return salvage_; }
  // Stored segments per stage: 0..n+1 (n+1 is all the policy ever reads).
  int segments() const { return n_ + 2; }

  double t(int k, int i) const { return t_.at(k).at(i); }
  double e(int k, int i) const { return e_.at(k).at(i); }

  void set_row(int k, const std::vector<double>& t_row, const std::vector<double>& e_row) {
    for (int i = 0; i < segments(); ++i) {
      t_[k][i] = t_row[i];
      e_[k][i] = e_row[i];
    }
  }

 private:
  int num_stages_, n_;
  double vbar_, salvage_;
  std::vector<std::vector<double>> t_, e_;
};

namespace detail {

inline void check_slope_order(const std::vector<double>& t, int upto, double scale, int stage) {
  for (int i = 0; i + 1 <= upto; ++i) {
    if (t[i + 1] > t[i] + 1e-9 * scale)
      throw std::logic_error("threshold ordering violated at stage " + std::to_string(stage) +
                             ", segment " + std::to_string(i));
  }
}

}  // namespace detail

// Backward pass filling the slope/intercept tables. The recursion touches
// segments up to n + N + 1 transiently (each backward step consumes one
// segment from the top), computed here in rolling buffers; the returned
// table keeps segments 0..n+1 per stage, which covers every policy and
// value lookup on [0, sbar].
inline ThresholdTable compute_thresholds(const ProblemConfig& cfg) {
  cfg.check_overflow_slope();
  const int N = cfg.num_stages();
  const int n = cfg.n();
  const double vbar = cfg.vbar();
  const double sbar = cfg.sbar();
  const double t_hat = cfg.salvage();
  const int top = n + N + 1;  // highest segment seeded at the terminal stage

  ThresholdTable table(N, n, vbar, t_hat);
  std::vector<double> t_next(top + 1), e_next(top + 1);
  std::vector<double> t_cur(top + 1), e_cur(top + 1);

  for (int i = 0; i <= top; ++i) {
    t_next[i] = (i < n) ? t_hat : -cfg.penalty_slope(N, i);
    e_next[i] = (i < n) ? 0.0 : sbar * (t_next[i] - t_hat);
  }
  const double scale = std::max({1.0, cfg.max_price(), cfg.overflow_slope()});
  table.set_row(N, t_next, e_next);

  for (int k = N - 1; k >= 0; --k) {
    const PricePmf& d = cfg.dist(k);
    const double lam_min = d.min_support();
    const double lam_max = d.max_support();
    const double lam_mean = d.mean();
    const int valid = n + k + 1;  // top segment computable at this stage

    t_cur[0] = t_next[1] + phi(d, 1.0, Interval::open_closed(t_next[1], lam_max)) -
               cfg.penalty_slope(k, 0);
    for (int i = 1; i <= valid; ++i) {
      const double above = t_next[i - 1];
      const double below = t_next[i + 1];
      t_cur[i] = above - cfg.penalty_slope(k, i) +
                 phi(d, 1.0, Interval::open_closed(below, above)) +
                 (below - above) * d.cdf(above);
    }
    detail::check_slope_order(t_cur, valid, scale, k);

    {
      const double F0 = d.cdf(t_next[0]);
      e_cur[0] = cfg.penalty_intercept(k, 0) + e_next[0] + (e_next[1] - e_next[0]) * F0 +
                 vbar * (theta(d, Interval::closed(lam_min, t_next[0])) - t_next[1] * F0);
    }
    for (int i = 1; i <= valid; ++i) {
      const double t_up = t_next[i - 1];
      const double t_mid = t_next[i];
      const double t_dn = t_next[i + 1];
      const double f = e_next[i - 1] - vbar * t_dn + (e_next[i] - e_next[i - 1]) * d.cdf(t_up) +
                       (e_next[i + 1] - e_next[i]) * d.cdf(t_mid);
      const double g = (i + 1) * phi(d, vbar, Interval::open_closed(t_dn, t_mid)) +
                       i * phi(d, vbar, Interval::open_closed(t_mid, t_up)) -
                       phi(d, vbar, Interval::open_closed(t_up, lam_max)) -
                       phi(d, vbar, Interval::open_closed(t_dn, lam_max));
      e_cur[i] = cfg.penalty_intercept(k, i) + vbar * lam_mean + f + g;
    }

    // Adjacent pieces must meet at segment boundaries below capacity.
    for (int i = 0; i + 1 <= n; ++i) {
      const double b = (i + 1) * vbar;
      const double left = -t_cur[i] * b + e_cur[i];
      const double right = -t_cur[i + 1] * b + e_cur[i + 1];
      const double tol = 1e-9 * std::max({1.0, std::abs(left), std::abs(right)});
      if (std::abs(left - right) > tol)
        throw std::logic_error("value function discontinuous at stage " + std::to_string(k) +
                               ", boundary " + std::to_string(i + 1));
    }

    table.set_row(k, t_cur, e_cur);
    std::swap(t_next, t_cur);
    std::swap(e_next, e_cur);
  }
  return table;
}

namespace detail {

inline int segment_index(double s, double vbar, int n) {
  int i = static_cast<int>(std::floor(s / vbar + 1e-9));
  if (i < 0) i = 0;
  if (i > n) i = n;
  return i;
}

}  // namespace detail

// Optimal trade at stage k (0-based, k < N) in state s when the price
// realizes as `price`. The result keeps s + v inside [0, sbar] and |v| within
// the ramp limit.
inline double optimal_action(const ThresholdTable& tbl, int k, double s, double price) {
  if (k < 0 || k >= tbl.num_stages()) throw std::domain_error("optimal_action: bad stage");
  const double vbar = tbl.vbar();
  const double sbar = tbl.sbar();
  if (!(s >= -1e-9 * vbar) || !(s <= sbar + 1e-9 * vbar))
    throw std::domain_error("optimal_action: state outside [0, sbar]");
  if (!std::isfinite(price) || price < 0.0)
    throw std::domain_error("optimal_action: price must be finite and >= 0");
  const int n = tbl.n();
  const int i = detail::segment_index(s, vbar, n);
  const int next = k + 1;

  double v;
  if (price > tbl.t(next, std::max(0, i - 1))) {
    v = std::max(-s, -vbar);  // sell as much as the ramp and inventory allow
  } else if (i >= 1 && price > tbl.t(next, i)) {
    v = i * vbar - s;  // sell down to the segment's lower grid point
  } else if (price > tbl.t(next, i + 1)) {
    v = (i + 1) * vbar - s;  // buy up to the next grid point
  } else {
    v = vbar;  // buy at full ramp
  }

  if (v > vbar) v = vbar;
  if (v < -vbar) v = -vbar;
  if (s + v > sbar) v = sbar - s;
  if (s + v < 0.0) v = -s;
  return v;
}

// Expected cost-to-go V_k(s); note the sign convention (expected profit-to-go
// is -V_k(s)).
inline double value_function(const ThresholdTable& tbl, int k, double s) {
  if (k < 0 || k > tbl.num_stages()) throw std::domain_error("value_function: bad stage");
  const double vbar = tbl.vbar();
  if (!(s >= -1e-9 * vbar) || !(s <= tbl.sbar() + 1e-9 * vbar))
    throw std::domain_error("value_function: state outside [0, sbar]");
  const int i = detail::segment_index(s, vbar, tbl.n());
  return -tbl.t(k, i) * s + tbl.e(k, i);
}

// Average expected profit per stage from initial state s0.
inline double storage_value(const ProblemConfig& cfg, double s0 = 0.0) {
  const ThresholdTable tbl = compute_thresholds(cfg);
  return -value_function(tbl, 0, s0) / static_cast<double>(cfg.num_stages());
}

inline void write_threshold_csv(const ThresholdTable& tbl, std::ostream& out) {
  out << "stage,segment,threshold,intercept\n";
  for (int k = 0; k <= tbl.num_stages(); ++k)
    for (int i = 0; i < tbl.segments(); ++i)
      out << k << ',' << i << ',' << format_double(tbl.t(k, i)) << ','
          << format_double(tbl.e(k, i)) << '\n';
}

}  // namespace rampstor
