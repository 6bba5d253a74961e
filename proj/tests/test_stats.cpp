#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <rampstor/stats.hpp>

using namespace rampstor;

TEST_CASE("sample moments") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  CHECK(mean_of(xs) == 2.5);
  CHECK_THAT(sample_std(xs), Catch::Matchers::WithinAbs(std::sqrt(5.0 / 3.0), 1e-15));
  CHECK_THAT(standard_error(xs), Catch::Matchers::WithinAbs(0.5 * std::sqrt(5.0 / 3.0), 1e-15));

  // Degenerate sizes: one sample has no spread, empty input is an error.
  CHECK(sample_std({7.0}) == 0.0);
  CHECK(standard_error({7.0}) == 0.0);
  CHECK_THROWS_AS(mean_of({}), std::invalid_argument);
}

TEST_CASE("upper quantile picks the ceil(q*n)-th smallest") {
  const std::vector<double> xs{5.0, 1.0, 3.0};  // unsorted on purpose
  CHECK(quantile_upper(xs, 1.0) == 5.0);
  CHECK(quantile_upper(xs, 0.34) == 3.0);  // ceil(1.02) = 2nd smallest
  CHECK(quantile_upper(xs, 0.005) == 1.0);

  std::vector<double> big;
  for (int i = 100; i >= 1; --i) big.push_back(static_cast<double>(i));
  CHECK(quantile_upper(big, 0.99) == 99.0);
  CHECK(quantile_upper(big, 1.0) == 100.0);

  std::vector<double> ten;
  for (int i = 1; i <= 10; ++i) ten.push_back(static_cast<double>(i));
  CHECK(quantile_upper(ten, 0.95) == 10.0);  // ceil(9.5) = 10th
  CHECK(quantile_upper(ten, 0.9) == 9.0);

  CHECK_THROWS_AS(quantile_upper({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(quantile_upper(xs, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(quantile_upper(xs, 1.5), std::invalid_argument);
}

TEST_CASE("least squares line") {
  const LinearFit exact = fit_line({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
  CHECK_THAT(exact.slope, Catch::Matchers::WithinAbs(2.0, 1e-12));
  CHECK_THAT(exact.intercept, Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK(exact.r2 == 1.0);

  // Step data: slope 0.4, intercept -0.1, r2 = sxy^2/(sxx*syy) = 4/5.
  const LinearFit noisy = fit_line({0.0, 1.0, 2.0, 3.0}, {0.0, 0.0, 1.0, 1.0});
  CHECK_THAT(noisy.slope, Catch::Matchers::WithinAbs(0.4, 1e-12));
  CHECK_THAT(noisy.intercept, Catch::Matchers::WithinAbs(-0.1, 1e-12));
  CHECK_THAT(noisy.r2, Catch::Matchers::WithinAbs(0.8, 1e-12));

  const LinearFit flat = fit_line({0.0, 1.0, 2.0}, {4.0, 4.0, 4.0});
  CHECK(flat.slope == 0.0);
  CHECK(flat.r2 == 1.0);

  CHECK_THROWS_AS(fit_line({0.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_line({0.0, 1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_line({2.0, 2.0}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("monotone misfit score") {
  CHECK(isotonic_l1_residual({}) == 0.0);
  CHECK(isotonic_l1_residual({1.0, 2.0, 2.0, 5.0}) == 0.0);
  CHECK(isotonic_l1_residual({2.0, 1.0}) == 1.0);          // pooled at 1.5
  CHECK(isotonic_l1_residual({3.0, 1.0, 2.0}) == 2.0);     // pooled at 2, 2, 2
  CHECK(isotonic_l1_residual({1.0, 3.0, 2.0, 4.0}) == 1.0);
}
