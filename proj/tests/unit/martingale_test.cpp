#include "doctest.h"

#include <cmath>
#include <vector>

#include "seqpred/errors.hpp"
#include "seqpred/harness.hpp"
#include "seqpred/martingale.hpp"
#include "seqpred/quantizer.hpp"
#include "seqpred/rng.hpp"

using namespace seqpred;

namespace {

std::vector<std::uint64_t> seed_range(std::uint64_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::uint64_t i = 0; i < count; ++i) seeds[i] = i + 1;
  return seeds;
}

}  // namespace

TEST_CASE("fair coin averages vanish and the sup is pinned at one") {
  MartingaleSpec spec;
  spec.generator = "fair_coin";
  const auto seeds = seed_range(20);
  const auto trajectories = simulate_running_averages(spec, 1000000, seeds);
  REQUIRE(trajectories.size() == 20);
  for (const AverageTrajectory& tr : trajectories) {
    CHECK(std::fabs(tr.final_average) <= 0.01);
    // |S_1| = 1, and no later average can exceed it
    CHECK(tr.sup_abs_average == 1.0);
    CHECK(tr.grid == time_grid(1000000));
    REQUIRE(tr.averages.size() == tr.grid.size());
    CHECK(tr.final_average == tr.averages.back());
    for (double avg : tr.averages) CHECK(std::fabs(avg) <= tr.sup_abs_average);
  }

  RngStream rng(7);
  for (int i = 0; i < 200; ++i) {
    const double d = martingale_difference(spec, rng);
    CHECK((d == 1.0 || d == -1.0));
  }
}

TEST_CASE("zero generator produces identically zero trajectories") {
  MartingaleSpec spec;
  spec.generator = "zero";
  const auto trajectories = simulate_running_averages(spec, 1000, seed_range(3));
  for (const AverageTrajectory& tr : trajectories) {
    CHECK(tr.sup_abs_average == 0.0);
    for (double avg : tr.averages) CHECK(avg == 0.0);
  }
}

TEST_CASE("uniform differences stay centered and bounded") {
  MartingaleSpec spec;
  spec.generator = "uniform";
  RngStream rng(11);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double d = martingale_difference(spec, rng);
    CHECK(d >= -0.5);
    CHECK(d < 0.5);
    sum += d;
  }
  CHECK(std::fabs(sum / n) <= 0.01);
}

TEST_CASE("pareto differences with a finite mean still average out") {
  MartingaleSpec spec;
  spec.generator = "pareto";
  spec.pareto_alpha = 2.0;
  spec.moment_p = 1.5;
  CHECK_NOTHROW(validate_martingale_spec(spec));

  const auto trajectories = simulate_running_averages(spec, 1000000, seed_range(20));
  for (const AverageTrajectory& tr : trajectories)
    CHECK(std::fabs(tr.final_average) <= 0.05);

  RngStream rng(3);
  for (int i = 0; i < 1000; ++i)
    CHECK(std::fabs(martingale_difference(spec, rng)) >= 1.0);
}

TEST_CASE("heavy quantized differences are signed powers of two") {
  MartingaleSpec spec;
  spec.generator = "heavy_quantized";
  RngStream rng(19);
  const int n = 100000;
  int positives = 0;
  int smallest_magnitude = 0;
  for (int i = 0; i < n; ++i) {
    const double d = martingale_difference(spec, rng);
    const double mag = std::fabs(d);
    // the law lives on exact powers of two, so level-0 quantization is lossless
    CHECK(dequantize(quantize(mag, 0)) == mag);
    const double j = std::log2(mag);
    CHECK(j == std::floor(j));
    CHECK(j >= 1.0);
    CHECK(j <= 50.0);
    positives += d > 0.0;
    smallest_magnitude += mag == 2.0;
  }
  // sign is a fair coin independent of the magnitude
  const double sign_se = 3.0 * std::sqrt(0.25 / n);
  CHECK(std::fabs(static_cast<double>(positives) / n - 0.5) <= sign_se);
  // P(|X| = 2) = (1/2) / sum_j 2^-j j^-3
  double z = 0.0;
  for (int j = 1; j <= 50; ++j)
    z += std::ldexp(1.0, -j) / (static_cast<double>(j) * j * j);
  const double p2 = 0.5 / z;
  const double freq_se = 3.0 * std::sqrt(p2 * (1.0 - p2) / n);
  CHECK(std::fabs(static_cast<double>(smallest_magnitude) / n - p2) <=
        freq_se);
}

TEST_CASE("sup estimates respect bounds and sharpen with more seeds") {
  MartingaleSpec fair;
  fair.generator = "fair_coin";
  SupEstimate pinned = estimate_sup_average(fair, 1000, seed_range(20), 1.5);
  CHECK(pinned.estimate == 1.0);
  CHECK(pinned.std_error == 0.0);
  CHECK(pinned.num_seeds == 20);

  MartingaleSpec uniform;
  uniform.generator = "uniform";
  SupEstimate bounded = estimate_sup_average(uniform, 1000, seed_range(50), 2.0);
  CHECK(bounded.estimate <= 0.25);
  CHECK(bounded.estimate > 0.0);

  SupEstimate wide = estimate_sup_average(uniform, 1000, seed_range(200), 2.0);
  const double ratio = wide.std_error / bounded.std_error;
  CHECK(ratio > 0.3);
  CHECK(ratio < 0.7);

  SupEstimate lonely = estimate_sup_average(uniform, 1000, seed_range(1), 2.0);
  CHECK(lonely.std_error == 0.0);
}

TEST_CASE("martingale input validation") {
  MartingaleSpec spec;
  spec.generator = "levy_flight";
  CHECK_THROWS_AS(validate_martingale_spec(spec), InputError);
  RngStream rng(1);
  CHECK_THROWS_AS(martingale_difference(spec, rng), InputError);

  MartingaleSpec thin;
  thin.generator = "pareto";
  thin.pareto_alpha = 1.0;
  CHECK_THROWS_AS(validate_martingale_spec(thin), InputError);

  MartingaleSpec fat;
  fat.generator = "pareto";
  fat.pareto_alpha = 2.0;
  fat.moment_p = 2.5;
  CHECK_THROWS_AS(validate_martingale_spec(fat), InputError);

  MartingaleSpec fair;
  fair.generator = "fair_coin";
  CHECK_THROWS_AS(simulate_running_averages(fair, 50, seed_range(2)),
                  InputError);
  CHECK_THROWS_AS(
      simulate_running_averages(fair, 1000, std::vector<std::uint64_t>{}),
      InputError);
  CHECK_THROWS_AS(estimate_sup_average(fair, 1000, seed_range(2), 0.5),
                  InputError);
}
