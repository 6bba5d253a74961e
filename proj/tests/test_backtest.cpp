#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include <rampstor/backtest.hpp>

using namespace rampstor;

namespace {

// One block per entry, prices laid out hourly from 08:00 on consecutive
// March days.
PriceSeries make_series(const std::vector<std::vector<double>>& days) {
  PriceSeries s;
  for (std::size_t d = 0; d < days.size(); ++d)
    for (std::size_t h = 0; h < days[d].size(); ++h)
      s.points.push_back(
          {{2024, 3, static_cast<int>(d) + 1, 8 + static_cast<int>(h), 0, 0}, days[d][h]});
  return s;
}

BacktestOptions base_options() {
  BacktestOptions opt;
  opt.n = 2;
  opt.vbar = 1.0;
  opt.block_len = 4;
  opt.start_hour = 8;
  opt.end_hour = 12;
  return opt;
}

}  // namespace

TEST_CASE("day filter drops outlier day means") {
  // Day means 10,10,10,10,100: spread of means is about 40.25, the outlier
  // deviates by 72 and the rest by 18.
  const std::vector<std::vector<double>> days(4, std::vector<double>(4, 10.0));
  auto with_outlier = days;
  with_outlier.push_back(std::vector<double>(4, 100.0));
  const PriceSeries series = make_series(with_outlier);

  BacktestOptions opt = base_options();
  for (double c : {1.0, 1.5}) {
    opt.day_filter_c = c;
    const BacktestReport rep = run_backtest(series, opt);
    REQUIRE(rep.days.size() == 5);
    for (int d = 0; d < 4; ++d) CHECK(rep.days[static_cast<std::size_t>(d)].kept_by_filter);
    CHECK_FALSE(rep.days[4].kept_by_filter);
    CHECK(rep.days[4].note == "filtered out");
    CHECK(rep.included_days == 4);
    // The outlier day is still priced for the report, just not counted.
    CHECK(rep.days[4].evaluated);
    CHECK(rep.days[4].policy_profit == 0.0);
    CHECK(rep.days[4].omniscient_profit == 0.0);
  }

  opt.day_filter_c = 2.0;  // deviation 72 <= 2 * 40.25 keeps everything
  CHECK(run_backtest(series, opt).included_days == 5);
  opt.day_filter_c = std::numeric_limits<double>::infinity();
  CHECK(run_backtest(series, opt).included_days == 5);

  // All flat-10 days trade to exactly zero against a degenerate fit, and
  // the zero/zero convention scores them 1.
  opt.day_filter_c = 1.0;
  const BacktestReport rep = run_backtest(series, opt);
  for (int d = 0; d < 4; ++d) {
    CHECK(rep.days[static_cast<std::size_t>(d)].ratio == 1.0);
    CHECK(rep.days[static_cast<std::size_t>(d)].included);
  }
  CHECK(rep.mean_ratio == 1.0);
  CHECK(rep.warnings.empty());
}

TEST_CASE("a single day cannot be filtered") {
  BacktestOptions opt = base_options();
  opt.day_filter_c = 1.0;
  const BacktestReport rep = run_backtest(make_series({{60, 100, 60, 100}}), opt);
  REQUIRE(rep.days.size() == 1);
  CHECK(rep.days[0].kept_by_filter);
  CHECK(rep.days[0].included);
}

TEST_CASE("a strict filter that keeps no day is an error") {
  // Two days: each mean deviates by spread / sqrt(2), so c = 0.5 drops both.
  BacktestOptions opt = base_options();
  opt.day_filter_c = 0.5;
  const PriceSeries series =
      make_series({std::vector<double>(4, 10.0), std::vector<double>(4, 30.0)});
  CHECK_THROWS_AS(run_backtest(series, opt), std::invalid_argument);
}

TEST_CASE("month-fitted alternating days capture the full spread") {
  const std::vector<std::vector<double>> days(6, std::vector<double>{60, 100, 60, 100});
  const BacktestReport rep = run_backtest(make_series(days), base_options());
  REQUIRE(rep.days.size() == 6);
  for (const auto& d : rep.days) {
    CHECK(d.included);
    // Two round trips of 40 each; perfect foresight does no better here.
    CHECK(d.policy_profit == 80.0);
    CHECK(d.omniscient_profit == 80.0);
    CHECK(d.ratio == 1.0);
  }
  CHECK(rep.mean_ratio == 1.0);
}

TEST_CASE("past-days fitting skips warmup and flags undefined ratios") {
  // Three alternating warmup days, then a weakly decreasing day starting
  // above the fitted salvage rate of 80: the policy buys at 85 on the
  // option value and liquidates lower, while perfect foresight stays out.
  const std::vector<std::vector<double>> days = {
      {60, 100, 60, 100}, {100, 60, 100, 60}, {60, 100, 60, 100},
      {85, 82, 80, 80},   {60, 100, 60, 100},
  };
  BacktestOptions opt = base_options();
  opt.source = DistSource::kPastDays;
  opt.past_days = 3;
  const BacktestReport rep = run_backtest(make_series(days), opt);
  REQUIRE(rep.days.size() == 5);
  for (int d = 0; d < 3; ++d) {
    CHECK_FALSE(rep.days[static_cast<std::size_t>(d)].evaluated);
    CHECK(rep.days[static_cast<std::size_t>(d)].note == "insufficient history");
  }
  CHECK(rep.days[3].evaluated);
  CHECK(rep.days[3].policy_profit == -5.0);
  CHECK(rep.days[3].omniscient_profit == 0.0);
  CHECK_FALSE(rep.days[3].included);
  CHECK(rep.days[3].note == "ratio undefined");
  REQUIRE(rep.warnings.size() == 1);
  CHECK_THAT(rep.warnings[0], Catch::Matchers::ContainsSubstring("2024-03-04"));
  CHECK(rep.days[4].included);
  CHECK(rep.days[4].policy_profit == 80.0);
  CHECK(rep.mean_ratio == 1.0);
  CHECK(rep.included_days == 1);
}

TEST_CASE("backtest reports are byte-identical across runs") {
  const std::vector<std::vector<double>> days = {
      {60, 100, 60, 100}, {70, 90, 65, 95}, {100, 60, 80, 80}, {62, 98, 70, 90},
  };
  BacktestOptions opt = base_options();
  opt.day_filter_c = 1.5;
  std::ostringstream a, b;
  write_backtest_csv(a, run_backtest(make_series(days), opt));
  write_backtest_csv(b, run_backtest(make_series(days), opt));
  CHECK(a.str() == b.str());
  CHECK_THAT(a.str(), Catch::Matchers::StartsWith(
                          "date,policy_profit,omniscient_profit,ratio,included\n"));
}

TEST_CASE("backtest CSV leaves undefined fields empty") {
  BacktestReport rep;
  DayResult good;
  good.date = "2024-03-01";
  good.policy_profit = 1.5;
  good.omniscient_profit = 2.0;
  good.ratio = 0.75;
  good.included = true;
  DayResult skipped;
  skipped.date = "2024-03-02";
  rep.days = {good, skipped};
  std::ostringstream out;
  write_backtest_csv(out, rep);
  CHECK(out.str() ==
        "date,policy_profit,omniscient_profit,ratio,included\n"
        "2024-03-01,1.5,2,0.75,1\n"
        "2024-03-02,,,,0\n");
}

TEST_CASE("backtest rejects bad options and empty series") {
  const PriceSeries series = make_series({{60, 100, 60, 100}});
  BacktestOptions opt = base_options();
  opt.n = 0;
  CHECK_THROWS_AS(run_backtest(series, opt), std::invalid_argument);
  opt = base_options();
  opt.vbar = 0.0;
  CHECK_THROWS_AS(run_backtest(series, opt), std::invalid_argument);
  opt = base_options();
  opt.block_len = 0;
  CHECK_THROWS_AS(run_backtest(series, opt), std::invalid_argument);
  opt = base_options();
  opt.past_days = 0;
  CHECK_THROWS_AS(run_backtest(series, opt), std::invalid_argument);
  opt = base_options();
  opt.day_filter_c = 0.0;
  CHECK_THROWS_AS(run_backtest(series, opt), std::invalid_argument);
  opt = base_options();
  opt.bin_width = -1.0;
  CHECK_THROWS_AS(run_backtest(series, opt), std::invalid_argument);

  opt = base_options();
  opt.block_len = 7;  // no date carries exactly 7 rows in the window
  CHECK_THROWS_AS(run_backtest(series, opt), std::invalid_argument);
}
