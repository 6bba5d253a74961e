#pragma once

// Discrete price distributions and the interval sums the storage recursions
// are built from:
//
//   psi(I)        probability mass on I
//   theta(I)      price-weighted mass on I
//   phi(vbar, I)  vbar * (theta(I) - inf(I) * psi(I))
//
// Interval endpoint membership is exact; (a, b] and [a, b] differ whenever
// an atom sits at a.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rampstor/interval.hpp"
#include "rampstor/rng.hpp"

namespace rampstor {

// Immutable PMF over a strictly ascending, non-negative support.
// Probabilities are normalized on construction; cdf(max_support()) == 1
// exactly. Zero-probability atoms are allowed (they can arise from density
// underflow in discretizations) and do not affect any sum.
class PricePmf {
 public:
  PricePmf(std::vector<double> support, std::vector<double> probs)
      : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.empty()) throw std::invalid_argument("PricePmf: empty support");
    if (support_.size() != probs_.size())
      throw std::invalid_argument("PricePmf: support/probs size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      if (!std::isfinite(support_[i]) || support_[i] < 0.0)
        throw std::invalid_argument("PricePmf: support values must be finite and >= 0");
      if (i > 0 && !(support_[i] > support_[i - 1]))
        throw std::invalid_argument("PricePmf: support must be strictly ascending");
      if (!std::isfinite(probs_[i]) || probs_[i] < 0.0)
        throw std::invalid_argument("PricePmf: probabilities must be finite and >= 0");
      total += probs_[i];
    }
    if (!(total > 0.0)) throw std::invalid_argument("PricePmf: probabilities sum to zero");
    for (double& p : probs_) p /= total;

    cum_p_.resize(size());
    cum_xp_.resize(size());
    double cp = 0.0, cxp = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      cp += probs_[i];
      cxp += support_[i] * probs_[i];
      cum_p_[i] = cp;
      cum_xp_[i] = cxp;
    }
    cum_p_.back() = 1.0;  // pin the final CDF value exactly
    mean_ = cum_xp_.back();
  }

  std::size_t size() const { return support_.size(); }
  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& probs() const { return probs_; }
  double min_support() const { return support_.front(); }
  double max_support() const { return support_.back(); }
  double mean() const { return mean_; }

  double std_dev() const {
    double ss = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      ss += probs_[i] * (support_[i] - mean_) * (support_[i] - mean_);
    return std::sqrt(ss);
  }

  // P(price <= x).
  double cdf(double x) const {
    const std::size_t cnt = count_le(x);
    return cnt == 0 ? 0.0 : cum_p_[cnt - 1];
  }

  // Inverse-CDF draw.
  double sample(Rng& rng) const {
    const double u = rng.u01();
    const std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(cum_p_.begin(), cum_p_.end(), u) - cum_p_.begin());
    return support_[std::min(idx, size() - 1)];
  }

  // Number of atoms <= x (or < x with strict = true).
  std::size_t count_le(double x) const {
    return static_cast<std::size_t>(
        std::upper_bound(support_.begin(), support_.end(), x) - support_.begin());
  }
  std::size_t count_lt(double x) const {
    return static_cast<std::size_t>(
        std::lower_bound(support_.begin(), support_.end(), x) - support_.begin());
  }

  double prefix_p(std::size_t cnt) const { return cnt == 0 ? 0.0 : cum_p_[cnt - 1]; }
  double prefix_xp(std::size_t cnt) const { return cnt == 0 ? 0.0 : cum_xp_[cnt - 1]; }

 private:
  std::vector<double> support_, probs_, cum_p_, cum_xp_;
  double mean_ = 0.0;
};

namespace detail {
// Atom index range [first, last) covered by the interval.
inline std::pair<std::size_t, std::size_t> atom_range(const PricePmf& pmf, const Interval& iv) {
  if (iv.empty()) return {0, 0};
  const std::size_t first = iv.lo_closed ? pmf.count_lt(iv.lo) : pmf.count_le(iv.lo);
  const std::size_t last = iv.hi_closed ? pmf.count_le(iv.hi) : pmf.count_lt(iv.hi);
  if (last <= first) return {0, 0};
  return {first, last};
}
}  // namespace detail

inline double psi(const PricePmf& pmf, const Interval& iv) {
  const auto [first, last] = detail::atom_range(pmf, iv);
  return pmf.prefix_p(last) - pmf.prefix_p(first);
}

inline double theta(const PricePmf& pmf, const Interval& iv) {
  const auto [first, last] = detail::atom_range(pmf, iv);
  return pmf.prefix_xp(last) - pmf.prefix_xp(first);
}

// phi(vbar, I) = vbar * (theta(I) - inf(I) * psi(I)). The infimum must be
// finite; it need not be a support point.
inline double phi(const PricePmf& pmf, double vbar, const Interval& iv) {
  if (!iv.bounded_below())
    throw std::domain_error("phi: interval is unbounded below, infimum undefined");
  if (iv.empty()) return 0.0;
  return vbar * (theta(pmf, iv) - iv.lo * psi(pmf, iv));
}

// Empirical PMF from raw samples. bin_width == 0 keeps every distinct value
// as its own atom; bin_width > 0 buckets into equal-width bins anchored at
// the sample minimum and uses bin midpoints as the support.
inline PricePmf pmf_from_samples(const std::vector<double>& xs, double bin_width = 0.0) {
  if (xs.empty()) throw std::invalid_argument("pmf_from_samples: no samples");
  for (double x : xs)
    if (!std::isfinite(x) || x < 0.0)
      throw std::invalid_argument("pmf_from_samples: samples must be finite and >= 0");
  if (bin_width < 0.0) throw std::invalid_argument("pmf_from_samples: negative bin width");

  const double n = static_cast<double>(xs.size());
  if (bin_width == 0.0) {
    std::vector<double> sorted(xs);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> support, probs;
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      support.push_back(sorted[i]);
      probs.push_back(static_cast<double>(j - i) / n);
      i = j;
    }
    return PricePmf(std::move(support), std::move(probs));
  }

  const auto [mn_it, mx_it] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *mn_it, hi = *mx_it;
  if (lo == hi) return PricePmf({lo}, {1.0});
  const std::size_t nbins =
      static_cast<std::size_t>(std::ceil((hi - lo) / bin_width - 1e-12));
  std::vector<double> count(std::max<std::size_t>(nbins, 1), 0.0);
  for (double x : xs) {
    std::size_t b = static_cast<std::size_t>((x - lo) / bin_width);
    if (b >= count.size()) b = count.size() - 1;  // x == max lands in the top bin
    count[b] += 1.0;
  }
  std::vector<double> support, probs;
  for (std::size_t b = 0; b < count.size(); ++b) {
    if (count[b] == 0.0) continue;
    support.push_back(lo + (static_cast<double>(b) + 0.5) * bin_width);
    probs.push_back(count[b] / n);
  }
  return PricePmf(std::move(support), std::move(probs));
}

// Log-normal discretization, moment-matched before truncation: the
// underlying normal parameters reproduce the requested mean and standard
// deviation exactly, then the density is evaluated at `points` evenly spaced
// locations on [lo, hi] and renormalized. Log-space evaluation avoids
// underflow for tightly concentrated distributions.
inline PricePmf pmf_lognormal(double mean, double std, int points, double lo, double hi) {
  if (!(mean > 0.0) || !(std > 0.0))
    throw std::invalid_argument("pmf_lognormal: mean and std must be positive");
  if (points < 2) throw std::invalid_argument("pmf_lognormal: need at least 2 points");
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("pmf_lognormal: need 0 < lo < hi");
  const double ratio2 = 1.0 + (std / mean) * (std / mean);
  const double sigma2 = std::log(ratio2);
  if (!std::isfinite(sigma2) || !(sigma2 > 0.0))
    throw std::invalid_argument("pmf_lognormal: moment match has no valid parameters");
  const double sigma = std::sqrt(sigma2);
  const double mu = std::log(mean) - 0.5 * sigma2;

  std::vector<double> support(points), logd(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  double max_logd = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < points; ++j) {
    const double x = lo + step * j;
    support[j] = x;
    const double z = (std::log(x) - mu) / sigma;
    logd[j] = -std::log(x) - 0.5 * z * z;
    max_logd = std::max(max_logd, logd[j]);
  }
  std::vector<double> probs(points);
  for (int j = 0; j < points; ++j) probs[j] = std::exp(logd[j] - max_logd);
  return PricePmf(std::move(support), std::move(probs));
}

// Equally weighted support spanning mean +/- sqrt(3)*std, which matches the
// two moments of a continuous uniform. std == 0 collapses to a point mass.
inline PricePmf pmf_uniform(double mean, double std, int points) {
  if (!(std >= 0.0)) throw std::invalid_argument("pmf_uniform: std must be >= 0");
  if (!(mean > std * std::sqrt(3.0)))
    throw std::invalid_argument("pmf_uniform: support would reach below zero");
  if (std == 0.0) return PricePmf({mean}, {1.0});
  if (points < 2) throw std::invalid_argument("pmf_uniform: need at least 2 points");
  const double half = std * std::sqrt(3.0);
  const double lo = mean - half, hi = mean + half;
  std::vector<double> support(points), probs(points, 1.0);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (int j = 0; j < points; ++j) support[j] = lo + step * j;
  return PricePmf(std::move(support), std::move(probs));
}

// Two-point distribution: mass a_high at hi, 1 - a_high at lo.
inline PricePmf pmf_two_point(double lo, double hi, double a_high) {
  if (!(lo >= 0.0) || !(hi > lo))
    throw std::invalid_argument("pmf_two_point: need 0 <= lo < hi");
  if (!(a_high > 0.0 && a_high < 1.0))
    throw std::invalid_argument("pmf_two_point: a_high must be in (0, 1)");
  return PricePmf({lo, hi}, {1.0 - a_high, a_high});
}

}  // namespace rampstor
