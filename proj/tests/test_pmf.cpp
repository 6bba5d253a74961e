#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <rampstor/pmf.hpp>
#include <rampstor/rng.hpp>

#include "test_util.hpp"

using namespace rampstor;
using Catch::Approx;

TEST_CASE("two-point pmf basics") {
  const PricePmf p = pmf_two_point(0.0, 1.0, 0.5);
  REQUIRE(p.size() == 2);
  REQUIRE(p.mean() == Approx(0.5));
  REQUIRE(p.std_dev() == Approx(0.5));
  REQUIRE(p.cdf(0.0) == Approx(0.5));
  REQUIRE(p.cdf(0.999) == Approx(0.5));
  REQUIRE(p.cdf(1.0) == 1.0);
  REQUIRE(p.cdf(-0.1) == 0.0);

  REQUIRE_THROWS_AS(pmf_two_point(1.0, 1.0, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(pmf_two_point(0.0, 1.0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(pmf_two_point(0.0, 1.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(pmf_two_point(-1.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("construction validation") {
  REQUIRE_THROWS_AS(PricePmf({}, {}), std::invalid_argument);
  REQUIRE_THROWS_AS(PricePmf({1.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
  REQUIRE_THROWS_AS(PricePmf({2.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
  REQUIRE_THROWS_AS(PricePmf({-1.0, 1.0}, {0.5, 0.5}), std::invalid_argument);
  REQUIRE_THROWS_AS(PricePmf({0.0, 1.0}, {0.5, -0.5}), std::invalid_argument);
  REQUIRE_THROWS_AS(PricePmf({0.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(PricePmf({0.0, 1.0}, {0.5}), std::invalid_argument);

  // Unnormalized weights normalize on construction.
  const PricePmf p({1.0, 3.0}, {2.0, 6.0});
  REQUIRE(p.probs()[0] == Approx(0.25));
  REQUIRE(p.probs()[1] == Approx(0.75));
  REQUIRE(p.cdf(3.0) == 1.0);
}

TEST_CASE("interval sums distinguish open and closed endpoints") {
  const PricePmf p = pmf_two_point(0.0, 1.0, 0.5);

  REQUIRE(psi(p, Interval::open_closed(0.0, 1.0)) == Approx(0.5));
  REQUIRE(psi(p, Interval::closed(0.0, 1.0)) == 1.0);
  REQUIRE(psi(p, Interval::closed_open(0.0, 1.0)) == Approx(0.5));
  REQUIRE(psi(p, Interval::open(0.0, 1.0)) == 0.0);
  REQUIRE(psi(p, Interval::open_closed(0.5, 0.5)) == 0.0);  // empty interval

  REQUIRE(theta(p, Interval::closed(0.0, 1.0)) == Approx(0.5));
  REQUIRE(theta(p, Interval::open_closed(0.5, 1.0)) == Approx(0.5));
  REQUIRE(theta(p, Interval::closed_open(0.0, 1.0)) == 0.0);

  // phi uses the infimum even when it is not a support point.
  REQUIRE(phi(p, 1.0, Interval::open_closed(0.5, 1.0)) == Approx(0.25));
  REQUIRE(phi(p, 1.0, Interval::open_closed(-2.0, 0.5)) == Approx(1.0));
  REQUIRE(phi(p, 1.0, Interval::open_closed(0.5, 0.5)) == 0.0);
  REQUIRE(phi(p, 2.0, Interval::open_closed(0.5, 1.0)) == Approx(0.5));

  REQUIRE_THROWS_AS(
      phi(p, 1.0, Interval::open_closed(-std::numeric_limits<double>::infinity(), 1.0)),
      std::domain_error);
}

TEST_CASE("interval sum additivity over random split points") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const PricePmf p = testutil::random_pmf(rng, 8);
    const double lo = p.min_support(), hi = p.max_support();
    const double mid = rng.uniform(lo, hi + 5.0);
    const double a = psi(p, Interval::open_closed(lo, mid)) +
                     psi(p, Interval::open_closed(mid, hi));
    REQUIRE(a == Approx(1.0 - p.probs()[0]).margin(1e-12));
    const double t = theta(p, Interval::closed(lo, mid)) + theta(p, Interval::open_closed(mid, hi));
    REQUIRE(t == Approx(p.mean()).margin(1e-12));
  }
}

TEST_CASE("pmf_from_samples unbinned merges duplicates") {
  const PricePmf p = pmf_from_samples({3.0, 1.0, 3.0, 7.0});
  REQUIRE(p.size() == 3);
  REQUIRE(p.support()[0] == 1.0);
  REQUIRE(p.support()[1] == 3.0);
  REQUIRE(p.support()[2] == 7.0);
  REQUIRE(p.probs()[1] == Approx(0.5));
  REQUIRE_THROWS_AS(pmf_from_samples({}), std::invalid_argument);
  REQUIRE_THROWS_AS(pmf_from_samples({-1.0}), std::invalid_argument);
}

TEST_CASE("pmf_from_samples binning") {
  Rng rng(7);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(static_cast<double>(rng.below(100)));
  const PricePmf p = pmf_from_samples(xs, 10.0);
  REQUIRE(p.size() == 10);
  for (std::size_t b = 0; b < p.size(); ++b) {
    REQUIRE(p.support()[b] == Approx(5.0 + 10.0 * static_cast<double>(b)));
    REQUIRE(p.probs()[b] == Approx(0.1).margin(0.02));
  }
  // A sample equal to the maximum lands in the top bin.
  const PricePmf q = pmf_from_samples({0.0, 5.0, 10.0}, 5.0);
  REQUIRE(q.size() == 2);
  REQUIRE(q.probs()[1] == Approx(2.0 / 3.0));

  // All-equal samples collapse to a single atom.
  const PricePmf r = pmf_from_samples({4.0, 4.0}, 1.0);
  REQUIRE(r.size() == 1);
  REQUIRE(r.support()[0] == 4.0);
}

TEST_CASE("lognormal discretization matches requested moments") {
  const PricePmf p = pmf_lognormal(50.0, 9.0, 200, 0.5, 120.0);
  REQUIRE(p.size() == 200);
  REQUIRE(p.mean() == Approx(50.0).epsilon(0.02));
  REQUIRE(p.std_dev() == Approx(9.0).epsilon(0.10));
  REQUIRE(p.cdf(p.max_support()) == 1.0);

  REQUIRE_THROWS_AS(pmf_lognormal(-1.0, 9.0, 200, 0.5, 120.0), std::invalid_argument);
  REQUIRE_THROWS_AS(pmf_lognormal(50.0, 0.0, 200, 0.5, 120.0), std::invalid_argument);
  REQUIRE_THROWS_AS(pmf_lognormal(50.0, 9.0, 1, 0.5, 120.0), std::invalid_argument);
  REQUIRE_THROWS_AS(pmf_lognormal(50.0, 9.0, 200, 0.0, 120.0), std::invalid_argument);
  REQUIRE_THROWS_AS(pmf_lognormal(50.0, 9.0, 200, 5.0, 5.0), std::invalid_argument);
}

TEST_CASE("lognormal discretization concentrates in the small-std limit") {
  const PricePmf p = pmf_lognormal(50.0, 0.01, 200, 0.5, 120.0);
  double near = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (std::abs(p.support()[j] - 50.0) <= 1.0) near += p.probs()[j];
  REQUIRE(near >= 0.999);
}

TEST_CASE("uniform discretization") {
  const double s = 10.0 / std::sqrt(3.0);
  const PricePmf two = pmf_uniform(50.0, s, 2);
  REQUIRE(two.size() == 2);
  REQUIRE(two.support()[0] == Approx(40.0));
  REQUIRE(two.support()[1] == Approx(60.0));
  REQUIRE(two.probs()[0] == Approx(0.5));

  const PricePmf many = pmf_uniform(50.0, 28.8, 100);
  REQUIRE(many.mean() == Approx(50.0).margin(1e-9));
  REQUIRE(many.std_dev() == Approx(28.8).epsilon(0.02));

  const PricePmf point = pmf_uniform(50.0, 0.0, 100);
  REQUIRE(point.size() == 1);
  REQUIRE(point.support()[0] == 50.0);

  REQUIRE_THROWS_AS(pmf_uniform(10.0, 10.0, 2), std::invalid_argument);
}

TEST_CASE("sampling is seed-deterministic and matches probabilities") {
  const PricePmf p({1.0, 2.0, 5.0}, {0.2, 0.5, 0.3});
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i) REQUIRE(p.sample(a) == p.sample(b));

  Rng rng(1234);
  std::vector<int> counts(3, 0);
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const double x = p.sample(rng);
    for (std::size_t j = 0; j < p.size(); ++j)
      if (x == p.support()[j]) ++counts[j];
  }
  for (std::size_t j = 0; j < p.size(); ++j)
    REQUIRE(static_cast<double>(counts[j]) / draws == Approx(p.probs()[j]).margin(0.01));
}
