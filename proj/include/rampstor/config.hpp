#pragma once

// Finite-horizon problem description: storage geometry, per-stage price
// distributions, salvage value, and the piecewise-linear convex holding
// penalty. Stage indices run k = 0..N-1 for decisions; the row k = N only
// seeds the terminal condition.
//
// The state space is [0, n*vbar]; segment i covers s in [i*vbar, (i+1)*vbar).
// Below capacity (i < n) the penalty defaults to zero. At and above capacity
// the slope must exceed every stage's maximum price so that overflowing is
// never worth it; intercepts above capacity are continued so the penalty is
// continuous at s = n*vbar (in particular, a full store pays no penalty under
// the defaults).

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rampstor/pmf.hpp"

namespace rampstor {

class ProblemConfig {
 public:
  // dists: one PMF shared by all stages, or one per stage (size N).
  ProblemConfig(std::vector<PricePmf> dists, int num_stages, int n, double vbar,
                double salvage = std::numeric_limits<double>::quiet_NaN())
      : dists_(std::move(dists)), num_stages_(num_stages), n_(n), vbar_(vbar) {
    if (num_stages_ < 1) throw std::invalid_argument("ProblemConfig: need at least one stage");
    if (n_ < 1) throw std::invalid_argument("ProblemConfig: capacity ratio n must be >= 1");
    if (!(vbar_ > 0.0)) throw std::invalid_argument("ProblemConfig: vbar must be positive");
    if (dists_.empty() ||
        (dists_.size() != 1 && dists_.size() != static_cast<std::size_t>(num_stages_)))
      throw std::invalid_argument("ProblemConfig: need 1 or N price distributions");
    global_min_ = dists_[0].min_support();
    global_max_ = dists_[0].max_support();
    for (const auto& d : dists_) {
      global_min_ = std::min(global_min_, d.min_support());
      global_max_ = std::max(global_max_, d.max_support());
    }
    salvage_ = std::isnan(salvage) ? dist(num_stages_ - 1).mean() : salvage;
    if (!(salvage_ >= global_min_ && salvage_ <= global_max_))
      throw std::invalid_argument(
          "ProblemConfig: salvage value must lie within the price support hull");
    overflow_slope_ = global_max_ + 1.0;
  }

  int num_stages() const { return num_stages_; }
  int n() const { return n_; }
  double vbar() const { return vbar_; }
  double sbar() const { return n_ * vbar_; }
  double salvage() const { return salvage_; }
  double max_price() const { return global_max_; }
  double min_price() const { return global_min_; }

  const PricePmf& dist(int k) const {
    if (k < 0 || k >= num_stages_) throw std::out_of_range("ProblemConfig::dist: bad stage");
    return dists_.size() == 1 ? dists_[0] : dists_[static_cast<std::size_t>(k)];
  }

  // Custom penalty below capacity: slopes[k][i], intercepts[k][i] for
  // k = 0..N and i = 0..n-1. Slopes must be non-decreasing in i (convexity).
  void set_penalties(std::vector<std::vector<double>> slopes,
                     std::vector<std::vector<double>> intercepts) {
    const std::size_t rows = static_cast<std::size_t>(num_stages_) + 1;
    if (slopes.size() != rows || intercepts.size() != rows)
      throw std::invalid_argument("set_penalties: need N+1 stage rows");
    for (std::size_t k = 0; k < rows; ++k) {
      if (slopes[k].size() != static_cast<std::size_t>(n_) ||
          intercepts[k].size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("set_penalties: need n segments per stage");
      for (int i = 0; i + 1 < n_; ++i)
        if (slopes[k][i] > slopes[k][i + 1])
          throw std::invalid_argument("set_penalties: slopes must be non-decreasing in i");
    }
    pen_slopes_ = std::move(slopes);
    pen_intercepts_ = std::move(intercepts);
  }

  // Slope charged at and above capacity. Must exceed every stage's maximum
  // price or the threshold recursion refuses to run.
  void set_overflow_slope(double slope) { overflow_slope_ = slope; }
  double overflow_slope() const { return overflow_slope_; }

  double penalty_slope(int k, int i) const {
    if (i >= n_) return overflow_slope_;
    if (pen_slopes_.empty()) return 0.0;
    return pen_slopes_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
  }

  double penalty_intercept(int k, int i) const {
    if (i < n_) {
      if (pen_intercepts_.empty()) return 0.0;
      return pen_intercepts_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
    }
    // Continue the last below-capacity piece so the penalty is continuous at
    // s = n*vbar; all pieces above capacity share the overflow slope.
    const double h_last = penalty_slope(k, n_ - 1);
    const double c_last = penalty_intercept(k, n_ - 1);
    return c_last + (h_last - overflow_slope_) * sbar();
  }

  // Penalty value h_k(s); segment chosen by floor(s / vbar).
  double penalty_at(int k, double s) const {
    int i = static_cast<int>(std::floor(s / vbar_ + 1e-9));
    if (i < 0) i = 0;
    return penalty_slope(k, i) * s + penalty_intercept(k, i);
  }

  // Throws unless the overflow slope strictly dominates every stage price.
  void check_overflow_slope() const {
    if (!(overflow_slope_ > global_max_))
      throw std::invalid_argument(
          "ProblemConfig: penalty slope at/above capacity must exceed the maximum price");
  }

 private:
  std::vector<PricePmf> dists_;
  int num_stages_;
  int n_;
  double vbar_;
  double salvage_ = 0.0;
  double global_min_ = 0.0, global_max_ = 0.0;
  double overflow_slope_ = 0.0;
  std::vector<std::vector<double>> pen_slopes_, pen_intercepts_;
};

inline ProblemConfig make_iid_config(PricePmf pmf, int num_stages, int n, double vbar,
                                     double salvage = std::numeric_limits<double>::quiet_NaN()) {
  return ProblemConfig({std::move(pmf)}, num_stages, n, vbar, salvage);
}

}  // namespace rampstor
