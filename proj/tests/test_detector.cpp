#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "antibunch/detector.hpp"
#include "antibunch/random.hpp"
#include "antibunch/source.hpp"

using namespace antibunch;

namespace {

std::vector<std::int64_t> arrivals(double rate, double dur,
                                   std::uint64_t seed) {
  std::vector<std::int64_t> out;
  for (const auto& p : generate_pairs({rate, dur, seed})) out.push_back(p.t_ps);
  return out;
}

}  // namespace

TEST_CASE("perfect detector is the identity") {
  const auto in = arrivals(50'000, 0.2, 1);
  const auto res = detect(in, {1.0, 0.0, 0.0, 0, 42}, 0.2);
  CHECK(res.clicks == in);
  CHECK(res.stats.detected_photons == in.size());
  CHECK(res.stats.dark_counts == 0);
  CHECK(res.stats.clamped == 0);
  CHECK(res.stats.dead_time_drops == 0);
}

TEST_CASE("10% efficiency thins to ~10% of a million arrivals") {
  const auto in = arrivals(1'000'000, 1.0, 2);  // ~1e6 photons
  const double n = static_cast<double>(in.size());
  const auto res = detect(in, {0.10, 0.0, 0.0, 0, 7}, 1.0);
  const double sigma = std::sqrt(n * 0.10 * 0.90);
  CHECK(std::abs(static_cast<double>(res.clicks.size()) - 0.10 * n) <
        5.0 * sigma);
}

TEST_CASE("dark counts alone form a Poisson process at the dark rate") {
  const double rate = 9'100.0, duration = 2.0;
  const auto res = detect({}, {1.0, 0.0, rate, 0, 3}, duration);
  const double expected = rate * duration;
  CHECK(std::abs(static_cast<double>(res.clicks.size()) - expected) <
        5.0 * std::sqrt(expected));
  CHECK(res.stats.dark_counts == res.clicks.size());
  CHECK(std::is_sorted(res.clicks.begin(), res.clicks.end()));
  for (const auto t : res.clicks) {
    CHECK(t >= 0);
    CHECK(t < static_cast<std::int64_t>(duration * 1e12));
  }

  SUBCASE("mean and Fano factor over many seeds") {
    const int runs = 120;
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < runs; ++s) {
      const double n = static_cast<double>(
          detect({}, {1.0, 0.0, rate, 0, 100 + static_cast<std::uint64_t>(s)},
                 0.05)
              .clicks.size());
      sum += n;
      sum_sq += n * n;
    }
    const double lambda = rate * 0.05;  // 455
    const double mean = sum / runs;
    const double var = (sum_sq - runs * mean * mean) / (runs - 1);
    CHECK(std::abs(mean - lambda) < 3.0 * std::sqrt(lambda / runs));
    CHECK(std::abs(var / mean - 1.0) < 3.0 * std::sqrt(2.0 / (runs - 1)));
  }
}

TEST_CASE("mean click count = efficiency * arrivals + dark * duration") {
  const auto in = arrivals(100'000, 0.1, 11);  // ~1e4 photons
  const double n = static_cast<double>(in.size());
  const double eff = 0.56, dark = 5'000.0, duration = 0.1;
  const int runs = 100;
  double sum = 0.0;
  for (int s = 0; s < runs; ++s) {
    sum += static_cast<double>(
        detect(in, {eff, 0.0, dark, 0, 400 + static_cast<std::uint64_t>(s)},
               duration)
            .clicks.size());
  }
  const double expected = eff * n + dark * duration;
  const double var_one = n * eff * (1 - eff) + dark * duration;
  CHECK(std::abs(sum / runs - expected) < 3.0 * std::sqrt(var_one / runs));
}

TEST_CASE("jitter spreads clicks with the requested sigma") {
  const auto in = arrivals(200'000, 0.2, 12);
  const double sigma = 400.0;
  const auto res = detect(in, {1.0, sigma, 0.0, 0, 13}, 0.2);
  REQUIRE(res.clicks.size() == in.size());

  // detect() sorts its output, which would scramble the pairing with the
  // input, so recover offsets through the unsorted building block.
  std::vector<std::int64_t> jittered;
  std::uint64_t clamped = 0;
  Rng rng(99);
  thin_and_jitter_into(in, 1.0, sigma, rng, jittered, clamped);
  REQUIRE(jittered.size() == in.size());
  double sum = 0.0, sum_sq = 0.0;
  const double n = static_cast<double>(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double d = static_cast<double>(jittered[i] - in[i]);
    sum += d;
    sum_sq += d * d;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum_sq - n * mean * mean) / (n - 1));
  CHECK(std::abs(mean) < 3.0 * sigma / std::sqrt(n));
  // Var of the sample SD ~ sigma^2/(2n) for a Gaussian.
  CHECK(std::abs(sd - sigma) < 3.0 * sigma / std::sqrt(2.0 * n));
}

TEST_CASE("jitter below t=0 clamps to zero and is flagged") {
  const std::vector<std::int64_t> near_zero(1000, 0);
  const auto res = detect(near_zero, {1.0, 500.0, 0.0, 0, 21}, 0.001);
  CHECK(res.stats.clamped > 300);  // ~half of the Gaussian mass
  CHECK(res.stats.clamped < 700);
  for (const auto t : res.clicks) CHECK(t >= 0);
}

TEST_CASE("dead-time filter keeps first click of each burst") {
  std::vector<std::int64_t> clicks{0, 50, 120, 200, 1000, 1001, 1120};
  std::uint64_t drops = 0;
  dead_time_filter(clicks, 100, &drops);
  CHECK(clicks == std::vector<std::int64_t>{0, 120, 1000, 1120});
  CHECK(drops == 3);

  SUBCASE("zero dead time is a no-op") {
    std::vector<std::int64_t> again{0, 0, 1, 1};
    std::uint64_t none = 0;
    dead_time_filter(again, 0, &none);
    CHECK(again == std::vector<std::int64_t>{0, 0, 1, 1});
    CHECK(none == 0);
  }
}

TEST_CASE("detect enforces the dead time on its merged output") {
  const auto in = arrivals(2'000'000, 0.05, 14);  // dense stream
  const std::int64_t dead = 10'000;
  const auto res = detect(in, {0.8, 200.0, 20'000.0, dead, 15}, 0.05);
  REQUIRE(res.clicks.size() > 100);
  for (std::size_t i = 1; i < res.clicks.size(); ++i) {
    CHECK(res.clicks[i] - res.clicks[i - 1] >= dead);
  }
  CHECK(res.stats.dead_time_drops > 0);
}

TEST_CASE("detect is deterministic per seed") {
  const auto in = arrivals(100'000, 0.1, 16);
  const DetectorParams params{0.5, 300.0, 8'000.0, 500, 77};
  const auto a = detect(in, params, 0.1);
  const auto b = detect(in, params, 0.1);
  CHECK(a.clicks == b.clicks);
  const DetectorParams other{0.5, 300.0, 8'000.0, 500, 78};
  CHECK(detect(in, other, 0.1).clicks != a.clicks);
}

TEST_CASE("detect rejects bad inputs") {
  const std::vector<std::int64_t> unsorted{5, 1};
  CHECK_THROWS_AS(detect(unsorted, {}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(detect({}, {1.5, 0, 0, 0, 0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(detect({}, {0.5, -1.0, 0, 0, 0}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(detect({}, {0.5, 0, -1.0, 0, 0}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(detect({}, {0.5, 0, 0, -1, 0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(detect({}, {}, -0.5), std::invalid_argument);
}

TEST_CASE("TDC quantization floors to the grid") {
  const std::vector<std::int64_t> clicks{0, 49, 50, 1234, 1250, 1299};
  const auto tags = tdc_quantize(clicks, 50, kChannelA);
  REQUIRE(tags.size() == clicks.size());
  const std::vector<std::uint64_t> expected{0, 0, 50, 1200, 1250, 1250};
  for (std::size_t i = 0; i < tags.size(); ++i) {
    CHECK(tags[i].t_ps == expected[i]);
    CHECK(tags[i].channel == kChannelA);
  }
  CHECK_THROWS_AS(tdc_quantize(clicks, 0, kChannelA), std::invalid_argument);
}

TEST_CASE("TDC quantization residuals are uniform over the grid") {
  const auto clicks = arrivals(1'000'000, 0.1, 18);  // ~1e5 uniform-ish times
  const auto tags = tdc_quantize(clicks, 50, kChannelB);
  std::vector<double> bins(50, 0.0);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    bins[static_cast<std::size_t>(
        clicks[i] - static_cast<std::int64_t>(tags[i].t_ps))] += 1.0;
  }
  const double expected = static_cast<double>(clicks.size()) / 50.0;
  double chi2 = 0.0;
  for (const double b : bins) {
    chi2 += (b - expected) * (b - expected) / expected;
  }
  // 49 degrees of freedom: mean 49, sigma ~9.9; 99.9th percentile ~86.7.
  CHECK(chi2 < 87.0);
}
