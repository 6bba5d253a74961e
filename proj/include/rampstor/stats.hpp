#pragma once

// Small numeric helpers shared by the simulation and reporting code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rampstor {

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_of: empty input");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample standard deviation (n-1 denominator); zero for n < 2.
inline double sample_std(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

inline double standard_error(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  return sample_std(xs) / std::sqrt(static_cast<double>(xs.size()));
}

// Empirical upper quantile: the ceil(q*n)-th smallest draw, so q = 1 is the
// sample maximum. q must lie in (0, 1].
inline double quantile_upper(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile_upper: empty input");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("quantile_upper: q must be in (0, 1]");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  if (idx == 0) idx = 1;
  if (idx > n) idx = n;
  return xs[idx - 1];
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

inline LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_line: need two or more (x, y) pairs");
  const double mx = mean_of(xs), my = mean_of(ys);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  // All-equal y values fit exactly; keep r2 = 1 in that case.
  f.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

// Pool-adjacent-violators fit of a non-decreasing sequence; returns the
// L1 residual between input and fit. Used to score monotonicity of curves.
inline double isotonic_l1_residual(const std::vector<double>& ys) {
  if (ys.empty()) return 0.0;
  std::vector<double> level;
  std::vector<double> weight;
  for (double y : ys) {
    level.push_back(y);
    weight.push_back(1.0);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const double w = weight.back() + weight[weight.size() - 2];
      const double v = (level.back() * weight.back() +
                        level[level.size() - 2] * weight[weight.size() - 2]) / w;
      level.pop_back();
      weight.pop_back();
      level.back() = v;
      weight.back() = w;
    }
  }
  std::vector<double> fit;
  for (std::size_t i = 0; i < level.size(); ++i)
    for (std::size_t j = 0; j < static_cast<std::size_t>(weight[i] + 0.5); ++j)
      fit.push_back(level[i]);
  double res = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) res += std::abs(ys[i] - fit[i]);
  return res;
}

}  // namespace rampstor
