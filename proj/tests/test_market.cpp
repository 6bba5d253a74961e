#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <rampstor/infinite.hpp>
#include <rampstor/market.hpp>
#include <rampstor/pmf.hpp>

using namespace rampstor;

namespace {

// Hand-built policy: one grid step, buy below 50, sell above 50.
StationarySolution step_policy() {
  StationarySolution sol;
  sol.gamma = 0.0;
  sol.h = {0.0, -50.0};
  sol.thresholds = {50.0};
  sol.vbar = 1.0;
  sol.n = 1;
  return sol;
}

double excess_supply(const MarketConfig& m, double w_hat, double price, double action) {
  return m.supply_slope * price + w_hat - market_demand(m, price) - action;
}

}  // namespace

TEST_CASE("base demand follows the logistic curve") {
  const MarketConfig m;
  // At the reference price the logistic factor is exactly 1/2.
  CHECK(market_demand(m, 50.0) == 20.0);
  CHECK(market_demand(m, 0.0) > market_demand(m, 25.0));
  CHECK(market_demand(m, 25.0) > market_demand(m, 50.0));
  CHECK(market_demand(m, 50.0) > market_demand(m, 100.0));
  CHECK_THAT(market_demand(m, 1000.0), Catch::Matchers::WithinAbs(m.demand_base, 1e-6));

  MarketConfig other;
  other.demand_base = 2.0;
  other.demand_scale = 10.0;
  other.demand_temp = 20.0;
  other.demand_ref_price = 30.0;
  CHECK(market_demand(other, 30.0) == 7.0);
}

TEST_CASE("market clears against conventional supply alone") {
  const MarketConfig m;

  // 0.2 * 50 + 10 = demand(50) = 20 exactly, so the root sits at 50.
  const ClearResult at_ref = clear_price(m, 10.0, nullptr, 0);
  CHECK_THAT(at_ref.price, Catch::Matchers::WithinAbs(50.0, 1e-6));
  CHECK_FALSE(at_ref.rationed);

  // More renewable output pushes the price down.
  double prev = std::numeric_limits<double>::infinity();
  for (double w = 0.0; w <= 16.0; w += 2.0) {
    const ClearResult cr = clear_price(m, w, nullptr, 0);
    CHECK_FALSE(cr.rationed);
    CHECK(std::abs(excess_supply(m, w, cr.price, 0.0)) < 1e-6);
    CHECK(cr.price < prev);
    prev = cr.price;
  }

  // Oversupply at the floor settles at a zero price.
  const ClearResult floor = clear_price(m, 35.0, nullptr, 0);
  CHECK(floor.price == 0.0);
  CHECK_FALSE(floor.rationed);

  CHECK_THROWS_AS(clear_price(m, std::numeric_limits<double>::quiet_NaN(), nullptr, 0),
                  std::invalid_argument);
}

TEST_CASE("storage bid shifts the clearing price piece by piece") {
  const MarketConfig m;
  const StationarySolution sol = step_policy();

  SECTION("empty store bids to buy below the threshold") {
    // Excess supply reaches the bid size inside the buy piece.
    const ClearResult buy = clear_price(m, 12.0, &sol, 0);
    CHECK_FALSE(buy.rationed);
    CHECK(buy.price > 45.0);
    CHECK(buy.price < 50.0);
    CHECK(std::abs(excess_supply(m, 12.0, buy.price, 1.0)) < 1e-6);

    // Supply lands between hold and buy at the threshold: no exact clear.
    const ClearResult jump = clear_price(m, 10.5, &sol, 0);
    CHECK(jump.price == 50.0);
    CHECK(jump.rationed);

    // Supply meets the hold bid exactly at the threshold.
    const ClearResult exact = clear_price(m, 10.0, &sol, 0);
    CHECK(exact.price == 50.0);
    CHECK_FALSE(exact.rationed);

    // Heavy oversupply floors the price at zero.
    const ClearResult floor = clear_price(m, 40.0, &sol, 0);
    CHECK(floor.price == 0.0);
    CHECK_FALSE(floor.rationed);
  }

  SECTION("full store bids to sell above the threshold") {
    const ClearResult hold = clear_price(m, 10.0, &sol, 1);
    CHECK_THAT(hold.price, Catch::Matchers::WithinAbs(50.0, 1e-6));
    CHECK_FALSE(hold.rationed);

    const ClearResult jump = clear_price(m, 9.5, &sol, 1);
    CHECK(jump.price == 50.0);
    CHECK(jump.rationed);

    const ClearResult sell = clear_price(m, 8.0, &sol, 1);
    CHECK_FALSE(sell.rationed);
    CHECK(sell.price > 50.0);
    CHECK(sell.price < 55.0);
    CHECK(std::abs(excess_supply(m, 8.0, sell.price, -1.0)) < 1e-6);
  }

  SECTION("coincident thresholds collapse the hold piece to a point") {
    StationarySolution two;
    two.h = {0.0, -50.0, -100.0};
    two.thresholds = {50.0, 50.0};
    two.vbar = 1.0;
    two.n = 2;

    const ClearResult buy = clear_price(m, 11.2, &two, 1);
    CHECK_FALSE(buy.rationed);
    CHECK(buy.price > 49.0);
    CHECK(buy.price < 50.0);

    CHECK(clear_price(m, 10.2, &two, 1).rationed);
    CHECK(clear_price(m, 10.2, &two, 1).price == 50.0);
    CHECK(clear_price(m, 9.8, &two, 1).rationed);
    CHECK(clear_price(m, 9.8, &two, 1).price == 50.0);

    const ClearResult sell = clear_price(m, 8.5, &two, 1);
    CHECK_FALSE(sell.rationed);
    CHECK(sell.price > 50.0);
    CHECK(sell.price < 53.0);
  }

  CHECK_THROWS_AS(clear_price(m, 10.0, &sol, -1), std::invalid_argument);
  CHECK_THROWS_AS(clear_price(m, 10.0, &sol, 2), std::invalid_argument);
}

TEST_CASE("perfect information leaves nothing on reserves") {
  const StationarySolution sol = relative_value_iteration(pmf_two_point(40.0, 60.0, 0.5), 2, 1.0);
  MarketConfig m;
  m.forecast_std = 0.0;
  m.state_error = false;
  m.periods = 2000;
  m.seed = 1;

  const ReserveReport rep = run_reserve_sim(sol, m);
  REQUIRE(rep.periods == 2000);
  CHECK(rep.forecast_clips == 0);
  CHECK(rep.mean_price > 30.0);
  CHECK(rep.mean_price < 80.0);

  int rationed_seen = 0;
  for (int t = 0; t < rep.periods; ++t) {
    const std::size_t u = static_cast<std::size_t>(t);
    CHECK(rep.base_gen_draws[u] <= 1e-6);
    CHECK(rep.base_demand_draws[u] <= 1e-6);
    const double draw = std::max(rep.gen_draws[u], rep.demand_draws[u]);
    if (rep.rationed[u]) {
      // A rationed period can strand at most the storage bid itself.
      CHECK(draw <= sol.vbar + 1e-6);
      ++rationed_seen;
    } else {
      CHECK(draw <= 1e-6);
    }
  }
  CHECK(rationed_seen == rep.rationed_periods);
}

TEST_CASE("estimation errors draw on reserves but the baseline is unchanged") {
  const StationarySolution sol = relative_value_iteration(pmf_two_point(40.0, 60.0, 0.5), 2, 1.0);
  MarketConfig with_err;
  with_err.periods = 400;
  with_err.seed = 7;

  MarketConfig no_state_err = with_err;
  no_state_err.state_error = false;

  const ReserveReport a = run_reserve_sim(sol, with_err);
  const ReserveReport b = run_reserve_sim(sol, no_state_err);

  // The baseline consumes the same renewable and forecast draws.
  CHECK(a.base_gen_draws == b.base_gen_draws);
  CHECK(a.base_demand_draws == b.base_demand_draws);
  CHECK(a.base_mean_price == b.base_mean_price);
  CHECK(a.base_mean_price > 40.0);
  CHECK(a.base_mean_price < 60.0);

  const ReserveReport a2 = run_reserve_sim(sol, with_err);
  CHECK(a.gen_draws == a2.gen_draws);
  CHECK(a.demand_draws == a2.demand_draws);
  CHECK(a.mean_price == a2.mean_price);
  CHECK(a.rationed == a2.rationed);

  MarketConfig reseeded = with_err;
  reseeded.seed = 8;
  const ReserveReport c = run_reserve_sim(sol, reseeded);
  CHECK(a.gen_draws != c.gen_draws);
}

TEST_CASE("forecasts outside the renewable range are clipped and counted") {
  const StationarySolution sol = relative_value_iteration(pmf_two_point(40.0, 60.0, 0.5), 2, 1.0);
  MarketConfig m;
  m.forecast_std = 1.0;
  m.periods = 2000;
  m.seed = 3;
  const ReserveReport rep = run_reserve_sim(sol, m);
  CHECK(rep.forecast_clips > 0);
}

TEST_CASE("reliability table reports upper quantiles and baseline increases") {
  ReserveReport rep;
  rep.gen_draws = {1.0, 2.0, 3.0, 4.0};
  rep.base_gen_draws = {1.0, 1.0, 1.0, 2.0};
  rep.demand_draws = {0.0, 0.0, 0.0, 0.0};
  rep.base_demand_draws = {0.0, 0.0, 2.0, 2.0};
  rep.periods = 4;

  const auto rows = reliability_table(rep, {1.0, 0.5});
  REQUIRE(rows.size() == 2);

  CHECK(rows[0].q == 1.0);
  CHECK(rows[0].gen_capacity == 4.0);
  CHECK(rows[0].base_gen_capacity == 2.0);
  CHECK(rows[0].gen_increase_pct == 100.0);
  CHECK(rows[0].demand_capacity == 0.0);
  CHECK(rows[0].base_demand_capacity == 2.0);
  CHECK(rows[0].demand_increase_pct == -100.0);

  CHECK(rows[1].q == 0.5);
  CHECK(rows[1].gen_capacity == 2.0);
  CHECK(rows[1].base_gen_capacity == 1.0);
  CHECK(rows[1].gen_increase_pct == 100.0);
  // Baseline needs nothing at this quantile: relative increase is undefined.
  CHECK(rows[1].base_demand_capacity == 0.0);
  CHECK(std::isnan(rows[1].demand_increase_pct));

  const auto defaults = reliability_table(rep);
  REQUIRE(defaults.size() == 3);
  CHECK(defaults[0].q == 1.0);
  CHECK(defaults[1].q == 0.99);
  CHECK(defaults[2].q == 0.98);
}

TEST_CASE("reserve draw histogram") {
  std::ostringstream out;
  write_reserve_histogram_csv(out, {0.2, 0.3, 1.7, 5.1}, 1.0);
  CHECK(out.str() == "draw_mwh,count\n0.5,2\n1.5,1\n5.5,1\n");

  std::ostringstream empty;
  write_reserve_histogram_csv(empty, {}, 0.5);
  CHECK(empty.str() == "draw_mwh,count\n");

  std::ostringstream bad;
  CHECK_THROWS_AS(write_reserve_histogram_csv(bad, {1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(write_reserve_histogram_csv(bad, {-1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("market configuration is validated") {
  const StationarySolution sol = step_policy();
  const auto fails = [&](void (*tweak)(MarketConfig&)) {
    MarketConfig m;
    m.periods = 1;
    tweak(m);
    CHECK_THROWS_AS(run_reserve_sim(sol, m), std::invalid_argument);
  };
  fails([](MarketConfig& m) { m.supply_slope = 0.0; });
  fails([](MarketConfig& m) { m.demand_temp = 0.0; });
  fails([](MarketConfig& m) { m.demand_base = -1.0; });
  fails([](MarketConfig& m) { m.renewable_hi = m.renewable_lo; });
  fails([](MarketConfig& m) { m.renewable_std = 0.0; });
  fails([](MarketConfig& m) { m.forecast_std = -0.5; });
  fails([](MarketConfig& m) { m.forecast_bound = 0.0; });
  fails([](MarketConfig& m) { m.periods = 0; });
}
