#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "syrlab/error.hpp"
#include "syrlab/first_passage.hpp"

using namespace syrlab;

namespace {

// Upper 1e-6 quantile of chi-square with 49 degrees of freedom.
constexpr double kChi2Df49 = 111.1359;

PassageOutcome pass(unsigned long n, unsigned long x, std::uint64_t cap) {
  return first_passage(OddNatural(Natural(n)), Natural(x), cap);
}

ExperimentConfig small_config(std::uint64_t samples, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.samples = samples;
  cfg.seed = Seed{seed};
  return cfg;
}

}  // namespace

TEST_SUITE("first_passage") {

TEST_CASE("worked passages") {
  const auto a = pass(1, 1, 10);
  CHECK(a.time == 0u);
  CHECK(a.location == 1);
  const auto b = pass(3, 1, 10);
  CHECK(b.time == 2u);
  CHECK(b.location == 1);
  CHECK(b.prefix_min == 3);
  const auto c = pass(7, 6, 50);  // 7 11 17 13 5
  CHECK(c.time == 4u);
  CHECK(c.location == 5);
  CHECK(c.trajectory_max == 17);
  CHECK(c.prefix_min == 7);
}

TEST_CASE("exhausted cap reports location 1") {
  const auto o = pass(27, 1, 5);
  CHECK(o.exhausted());
  CHECK(o.location == 1);
  CHECK(pass(27, 1, 100).time == 41u);
  CHECK(default_passage_cap(Natural(1000)) == static_cast<std::uint64_t>(std::ceil(10 * std::log(1000.0) / std::log(4.0 / 3.0))));
}

TEST_CASE("log-uniform sampler edges") {
  Rng rng(Seed{1});
  CHECK(LogUniformOddSampler(101, 101)(rng) == 101);
  CHECK(LogUniformOddSampler(100, 101)(rng) == 101);
  CHECK_THROWS_AS(LogUniformOddSampler(200, 200), EmptyRange);
  CHECK_THROWS_AS(LogUniformOddSampler(300, 200), EmptyRange);
  CHECK_THROWS_AS(LogUniformOddSampler(1, 200), BadParameter);
  CHECK_THROWS_AS(LogUniformOddSampler(3, std::uint64_t{1} << 62), BadParameter);
}

TEST_CASE("log-uniform sampler passes chi-square on a small range") {
  const LogUniformOddSampler sampler(101, 199);
  REQUIRE(sampler.exact());
  // Weights 1/k by direct summation.
  double h = 0;
  for (std::uint64_t k = 101; k <= 199; k += 2) h += 1.0 / static_cast<double>(k);
  for (std::uint64_t k = 101; k <= 199; k += 2) {
    CHECK(sampler.probability(k) == doctest::Approx(1.0 / static_cast<double>(k) / h).epsilon(1e-12));
  }
  Rng rng(Seed{11}, 0);
  const int draws = 1'000'000;
  std::vector<std::uint64_t> counts(200, 0);
  for (int i = 0; i < draws; ++i) {
    const auto k = sampler(rng);
    REQUIRE(k % 2 == 1);
    REQUIRE(k >= 101);
    REQUIRE(k <= 199);
    ++counts[k];
  }
  double chi2 = 0;
  for (std::uint64_t k = 101; k <= 199; k += 2) {
    const double expect = draws / static_cast<double>(k) / h;
    const double d = static_cast<double>(counts[k]) - expect;
    chi2 += d * d / expect;
  }
  CAPTURE(chi2);
  CHECK(chi2 < kChi2Df49);
}

TEST_CASE("log-uniform sampler on a wide range") {
  const std::uint64_t lo = 1'001, hi = 1'000'000'000'001;
  const LogUniformOddSampler sampler(lo, hi);
  CHECK_FALSE(sampler.exact());
  Rng rng(Seed{12}, 0);
  const double mid = std::sqrt(static_cast<double>(lo) * static_cast<double>(hi));
  const int draws = 200'000;
  int below = 0;
  for (int i = 0; i < draws; ++i) {
    const auto k = sampler(rng);
    REQUIRE(k % 2 == 1);
    REQUIRE(k >= lo);
    REQUIRE(k <= hi);
    below += static_cast<double>(k) <= mid;
  }
  CHECK(std::fabs(static_cast<double>(below) / draws - 0.5) < 0.005);
}

TEST_CASE("experiment configuration") {
  ExperimentConfig cfg;
  CHECK(cfg.n0() == 1);
  CHECK(cfg.m0() == 0);
  CHECK(cfg.threshold() == 10000);
  cfg.x = 1e30;
  CHECK(cfg.n0() == 9);
  CHECK_THROWS_AS(cfg.validate(), BudgetExceeded);
  cfg.x = 1;
  CHECK_THROWS_AS(cfg.validate(), BadParameter);
  cfg.x = 1e4;
  cfg.alpha = 1;
  CHECK_THROWS_AS(cfg.validate(), BadParameter);
  cfg.alpha = 1.25;
  cfg.cap = 0;
  CHECK_THROWS_AS(cfg.validate(), BadParameter);
}

TEST_CASE("experiment invariants") {
  const auto r = passage_experiment(small_config(20'000, 3));
  CHECK(r.samples.size() == 40'000);
  CHECK(passage_support_check(r));
  CHECK(r.exhaustion_rate_y1 == 0.0);
  CHECK(r.exhaustion_rate_y2 == 0.0);
  CHECK(r.median_time_ratio >= 0.5);
  CHECK(r.median_time_ratio <= 2.0);
  CHECK(r.decay_probe_fraction >= 0.95);
  CHECK(r.tv >= 0);
  CHECK(r.tv <= 2);
  const auto spot = minimality_spot_check(r, 500, Seed{4});
  CHECK(spot.checked == 500);
  CHECK(spot.passed);

  auto broken = r;
  broken.samples[7].outcome.location *= 2;
  CHECK_FALSE(passage_support_check(broken));
  CHECK(passage_support_check(PassageReport{}));
}

TEST_CASE("same seed, same law") {
  const auto a = passage_experiment(small_config(5'000, 8), 1);
  const auto b = passage_experiment(small_config(5'000, 8), 3);
  CHECK(a.locations_y1 == b.locations_y1);
  CHECK(a.locations_y2 == b.locations_y2);
  CHECK(a.tv == b.tv);
  CHECK(tv_distance(a.locations_y1, b.locations_y1) == 0);
  CHECK(a.median_time_ratio == b.median_time_ratio);
  const auto c = passage_experiment(small_config(5'000, 9), 1);
  CHECK_FALSE(a.locations_y1 == c.locations_y1);
}

// Median over five seeds of the reported TV should not grow from x = 10^4 to
// x = 10^6. With equal sample counts the empirical TV at 10^6 is dominated by
// the ~100x wider support of Pass_x, so this is expected to fail.
TEST_CASE("stability probe" * doctest::may_fail()) {
  auto median_tv = [](double x) {
    std::vector<double> tvs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      ExperimentConfig cfg = small_config(100'000, seed);
      cfg.x = x;
      tvs.push_back(passage_experiment(cfg).tv.get_d());
    }
    std::sort(tvs.begin(), tvs.end());
    return tvs[2];
  };
  const double low = median_tv(1e4);
  const double high = median_tv(1e6);
  MESSAGE("median TV at 1e4: " << low << ", at 1e6: " << high);
  CHECK(low >= high);
}

}  // TEST_SUITE
