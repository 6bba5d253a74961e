#pragma once

// Backtests of the threshold policy on historical price series against the
// perfect-foresight benchmark.
//
// Protocol: restrict the series to an hour window, group into complete
// trading days, optionally drop days whose mean price strays more than c
// sample standard deviations from the mean of day means, then trade each
// day with thresholds fitted from an empirical distribution. The
// distribution is fitted either once from the whole kept set ("month") or
// per day from the m most recent kept days ("past days"). The salvage rate
// is the fitted distribution's mean. Everything is deterministic: no random
// numbers are drawn.

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "rampstor/config.hpp"
#include "rampstor/format.hpp"
#include "rampstor/pmf.hpp"
#include "rampstor/series.hpp"
#include "rampstor/simulate.hpp"
#include "rampstor/stats.hpp"
#include "rampstor/thresholds.hpp"

namespace rampstor {

enum class DistSource { kMonth, kPastDays };

struct BacktestOptions {
  int n = 1;
  double vbar = 1.0;
  int block_len = 16;  // prices per trading day after the hour filter
  int start_hour = 8;
  int end_hour = 24;
  // Keep days with |day mean - grand mean| <= day_filter_c * std of day
  // means; infinity disables the filter. With fewer than two complete days
  // the spread is undefined and no day is dropped.
  double day_filter_c = std::numeric_limits<double>::infinity();
  DistSource source = DistSource::kMonth;
  int past_days = 10;      // trailing window when source == kPastDays
  double bin_width = 0.0;  // optional binning for the empirical distribution
};

struct DayResult {
  std::string date;
  double policy_profit = std::numeric_limits<double>::quiet_NaN();
  double omniscient_profit = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  bool kept_by_filter = true;
  bool evaluated = false;  // a fitted distribution was in force this day
  bool included = false;   // kept, evaluated and the ratio is defined
  std::string note;
};

struct BacktestReport {
  std::vector<DayResult> days;
  double mean_ratio = std::numeric_limits<double>::quiet_NaN();
  int included_days = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline void check_backtest_options(const BacktestOptions& opt) {
  if (opt.n < 1) throw std::invalid_argument("backtest: n must be at least 1");
  if (!(opt.vbar > 0.0)) throw std::invalid_argument("backtest: vbar must be positive");
  if (opt.block_len < 1) throw std::invalid_argument("backtest: block_len must be at least 1");
  if (opt.past_days < 1) throw std::invalid_argument("backtest: past_days must be at least 1");
  if (!(opt.day_filter_c > 0.0)) throw std::invalid_argument("backtest: day_filter_c must be > 0");
  if (opt.bin_width < 0.0) throw std::invalid_argument("backtest: bin_width must be >= 0");
}

inline void evaluate_day(const PricePmf& pmf, const BacktestOptions& opt, DayResult& day,
                         const std::vector<double>& prices, std::vector<std::string>& warnings) {
  const ProblemConfig cfg = make_iid_config(pmf, opt.block_len, opt.n, opt.vbar);
  const ThresholdTable tbl = compute_thresholds(cfg);
  day.policy_profit = run_policy(cfg, tbl, prices).profit;
  day.omniscient_profit = omniscient_value(cfg, prices);
  day.evaluated = true;
  if (day.omniscient_profit == 0.0) {
    if (day.policy_profit == 0.0) {
      day.ratio = 1.0;
    } else {
      warnings.push_back("day " + day.date +
                         ": omniscient profit is zero but the policy traded; day excluded");
      day.note = "ratio undefined";
    }
  } else {
    day.ratio = day.policy_profit / day.omniscient_profit;
  }
}

}  // namespace detail

inline BacktestReport run_backtest(const PriceSeries& series, const BacktestOptions& opt) {
  detail::check_backtest_options(opt);
  const PriceSeries windowed = filter_hour_window(series, opt.start_hour, opt.end_hour);
  const std::vector<DayBlock> blocks = day_blocks(windowed, static_cast<std::size_t>(opt.block_len));
  if (blocks.empty())
    throw std::invalid_argument("backtest: no complete trading days in the series");

  BacktestReport report;
  report.days.resize(blocks.size());

  std::vector<double> day_means(blocks.size());
  for (std::size_t d = 0; d < blocks.size(); ++d) {
    day_means[d] = mean_of(blocks[d].prices);
    report.days[d].date = blocks[d].date;
  }
  if (blocks.size() >= 2 && std::isfinite(opt.day_filter_c)) {
    const double grand = mean_of(day_means);
    const double spread = sample_std(day_means);
    for (std::size_t d = 0; d < blocks.size(); ++d) {
      if (std::abs(day_means[d] - grand) > opt.day_filter_c * spread) {
        report.days[d].kept_by_filter = false;
        report.days[d].note = "filtered out";
      }
    }
  }

  if (opt.source == DistSource::kMonth) {
    std::vector<double> pool;
    for (std::size_t d = 0; d < blocks.size(); ++d)
      if (report.days[d].kept_by_filter)
        pool.insert(pool.end(), blocks[d].prices.begin(), blocks[d].prices.end());
    if (pool.empty()) throw std::invalid_argument("backtest: the day filter kept no days");
    const PricePmf pmf = pmf_from_samples(pool, opt.bin_width);
    for (std::size_t d = 0; d < blocks.size(); ++d)
      detail::evaluate_day(pmf, opt, report.days[d], blocks[d].prices, report.warnings);
  } else {
    std::vector<std::size_t> kept_history;  // indices of kept days seen so far
    for (std::size_t d = 0; d < blocks.size(); ++d) {
      if (kept_history.size() < static_cast<std::size_t>(opt.past_days)) {
        report.days[d].note = report.days[d].kept_by_filter
                                  ? "insufficient history"
                                  : report.days[d].note;
      } else {
        std::vector<double> pool;
        for (std::size_t h = kept_history.size() - static_cast<std::size_t>(opt.past_days);
             h < kept_history.size(); ++h) {
          const auto& prices = blocks[kept_history[h]].prices;
          pool.insert(pool.end(), prices.begin(), prices.end());
        }
        detail::evaluate_day(pmf_from_samples(pool, opt.bin_width), opt, report.days[d],
                             blocks[d].prices, report.warnings);
      }
      if (report.days[d].kept_by_filter) kept_history.push_back(d);
    }
  }

  double sum = 0.0;
  for (auto& day : report.days) {
    day.included = day.kept_by_filter && day.evaluated && std::isfinite(day.ratio);
    if (day.included) {
      sum += day.ratio;
      ++report.included_days;
    }
  }
  if (report.included_days > 0) report.mean_ratio = sum / report.included_days;
  return report;
}

// One row per trading day; fields without a defined value stay empty.
inline void write_backtest_csv(std::ostream& out, const BacktestReport& report) {
  out << "date,policy_profit,omniscient_profit,ratio,included\n";
  for (const auto& day : report.days) {
    out << day.date << ',';
    if (std::isfinite(day.policy_profit)) out << format_double(day.policy_profit);
    out << ',';
    if (std::isfinite(day.omniscient_profit)) out << format_double(day.omniscient_profit);
    out << ',';
    if (std::isfinite(day.ratio)) out << format_double(day.ratio);
    out << ',' << (day.included ? '1' : '0') << '\n';
  }
}

}  // namespace rampstor
