#include <cmath>
#include <random>

#include "actpc/metrics.hpp"
#include "doctest.h"

using namespace actpc::metrics;

TEST_CASE("rolling_mean") {
  const std::vector<double> s{1, 2, 3, 4};
  const auto r = rolling_mean(s, 2);
  CHECK(r == std::vector<double>{1, 1.5, 2.5, 3.5});
  CHECK(rolling_mean(s, 10).back() == 2.5);
  CHECK_THROWS_AS(rolling_mean(s, 0), std::invalid_argument);
  CHECK(rolling_mean(std::vector<double>{}, 3).empty());
}

TEST_CASE("r_stability") {
  SUBCASE("constant series is exactly stable") {
    std::vector<double> s(250, 0.7);
    CHECK(r_stability(s) == 0.0);
  }
  SUBCASE("hand case") {
    // window 2, smoothing 1: peak 2, smoothed {1, 2} -> mean(|1-2|/2, 0) = 0.25
    std::vector<double> s{5, 1, 2};
    CHECK(r_stability(s, 2, 1) == doctest::Approx(0.25));
  }
  SUBCASE("window-2 smoothing") {
    std::vector<double> s{1, 1, 1, 2};
    CHECK(r_stability(s, 2, 2) == doctest::Approx(0.375));
  }
  SUBCASE("undefined and invalid") {
    std::vector<double> zeros(100, 0.0);
    CHECK_THROWS_AS(r_stability(zeros), UndefinedMetric);
    std::vector<double> neg(100, -1.0);
    CHECK_THROWS_AS(r_stability(neg), UndefinedMetric);
    std::vector<double> short_series(50, 1.0);
    CHECK_THROWS_AS(r_stability(short_series), std::invalid_argument);
  }
  SUBCASE("range for nonnegative returns") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(400);
    for (auto& v : s) v = u(rng);
    const double rs = r_stability(s);
    CHECK(rs >= 0.0);
    CHECK(rs <= 1.0);
  }
}

TEST_CASE("tail_mean") {
  const std::vector<double> s{1, 2, 3, 4, 5};
  CHECK(tail_mean(s, 2) == 4.5);
  CHECK(tail_mean(s, 100) == 3.0);
  CHECK(tail_mean(std::vector<double>{}, 5) == 0.0);
}
