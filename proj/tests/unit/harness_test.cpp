#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "seqpred/errors.hpp"
#include "seqpred/harness.hpp"
#include "seqpred/odometer.hpp"
#include "seqpred/predictor.hpp"

using namespace seqpred;

namespace {

MarkovSpec binary_chain() {
  MarkovSpec m;
  m.state_values = {0.0, 1.0};
  m.transition = {{0.7, 0.3}, {0.2, 0.8}};
  return m;
}

std::string temp_csv(const char* tag) {
  return std::string("/tmp/seqpred_harness_") + tag + ".csv";
}

}  // namespace

TEST_CASE("time grid is powers of two plus the horizon") {
  CHECK(time_grid(10) == std::vector<std::int64_t>{1, 2, 4, 8, 10});
  CHECK(time_grid(16) == std::vector<std::int64_t>{1, 2, 4, 8, 16});
  CHECK(time_grid(1) == std::vector<std::int64_t>{1});
  auto grid = time_grid(100000);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  CHECK(grid.back() == 100000);
  CHECK_THROWS_AS(time_grid(0), InputError);
}

TEST_CASE("constant process errors decay exactly as the first-step miss") {
  ProcessSpec spec{IidSpec{{2.5}, {1.0}}};
  const std::vector<std::uint64_t> seeds = {1};
  CesaroReport report = evaluate(spec, 1.0, 16, seeds);
  REQUIRE(report.grid == std::vector<std::int64_t>{1, 2, 4, 8, 16});
  // the predictor has no pattern at i = 1 and falls back to 0, then locks on
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    const double expected = 2.5 / static_cast<double>(report.grid[g]);
    CHECK(report.err_vs_oracle[0][g] == expected);
    CHECK(report.err_vs_realized[0][g] == expected);
    CHECK(report.agg_err_vs_oracle[g] == expected);
  }

  ProcessSpec zero{IidSpec{{0.0}, {1.0}}};
  CesaroReport silent = evaluate(zero, 2.0, 16, seeds);
  for (std::size_t g = 0; g < silent.grid.size(); ++g) {
    CHECK(silent.err_vs_oracle[0][g] == 0.0);
    CHECK(silent.err_vs_realized[0][g] == 0.0);
  }
}

TEST_CASE("evaluate matches a step-by-step recomputation on a markov path") {
  ProcessSpec spec{binary_chain()};
  const std::vector<std::uint64_t> seeds = {5};
  const std::int64_t horizon = 64;
  CesaroReport report = evaluate(spec, 1.0, horizon, seeds);

  ProcessPath path = sample_path(spec, horizon + 1, 5);
  const double row_mean[2] = {0.3, 0.8};
  double sum_oracle = 0.0;
  double sum_realized = 0.0;
  std::size_t g = 0;
  for (std::int64_t i = 1; i <= horizon; ++i) {
    const double pred =
        forward_predict(std::span<const double>(path.values.data(),
                                                static_cast<std::size_t>(i)))
            .value;
    const double ref = row_mean[path.values[static_cast<std::size_t>(i - 1)] ==
                                        1.0
                                    ? 1
                                    : 0];
    sum_oracle += std::fabs(pred - ref);
    sum_realized += std::fabs(pred - path.values[static_cast<std::size_t>(i)]);
    if (report.grid[g] == i) {
      const double t = static_cast<double>(i);
      CHECK(report.err_vs_oracle[0][g] ==
            doctest::Approx(sum_oracle / t).epsilon(1e-13));
      CHECK(report.err_vs_realized[0][g] ==
            doctest::Approx(sum_realized / t).epsilon(1e-13));
      ++g;
    }
  }
  CHECK(g == report.grid.size());
}

TEST_CASE("evaluate oracle for odometer specs agrees with enumeration") {
  ProcessSpec spec{OdometerRefSpec{{5, 9}}};
  const std::vector<std::uint64_t> seeds = {3};
  const std::int64_t horizon = 40;
  CesaroReport report = evaluate(spec, 1.0, horizon, seeds);
  CHECK(!report.reference_limit.has_value());

  OdometerSchedule s{{5, 9}};
  ProcessPath path = sample_path(spec, horizon + 1, 3);
  double sum_oracle = 0.0;
  std::size_t g = 0;
  for (std::int64_t i = 1; i <= horizon; ++i) {
    const double pred =
        forward_predict(std::span<const double>(path.values.data(),
                                                static_cast<std::size_t>(i)))
            .value;
    const double ref = brute_force_conditional_mean(
        s,
        std::span<const double>(path.values.data(),
                                static_cast<std::size_t>(i)),
        i);
    sum_oracle += std::fabs(pred - ref);
    if (report.grid[g] == i) {
      CHECK(report.err_vs_oracle[0][g] ==
            doctest::Approx(sum_oracle / static_cast<double>(i))
                .epsilon(1e-12));
      ++g;
    }
  }

  CHECK_THROWS_AS(
      evaluate(ProcessSpec{OdometerRefSpec{{5, 9, 40}}}, 1.0, 100, seeds),
      CapabilityError);
}

TEST_CASE("aggregate rows are seed-order invariant means") {
  ProcessSpec spec{binary_chain()};
  const std::vector<std::uint64_t> forward = {1, 2, 3};
  const std::vector<std::uint64_t> shuffled = {3, 1, 2};
  CesaroReport a = evaluate(spec, 1.0, 128, forward);
  CesaroReport b = evaluate(spec, 1.0, 128, shuffled);

  for (std::size_t g = 0; g < a.grid.size(); ++g) {
    CHECK(a.agg_err_vs_oracle[g] == b.agg_err_vs_oracle[g]);
    CHECK(a.agg_err_vs_realized[g] == b.agg_err_vs_realized[g]);
    // per-seed rows travel with their seeds
    CHECK(a.err_vs_oracle[0][g] == b.err_vs_oracle[1][g]);
    CHECK(a.err_vs_oracle[1][g] == b.err_vs_oracle[2][g]);
    CHECK(a.err_vs_oracle[2][g] == b.err_vs_oracle[0][g]);

    double mean = 0.0;
    for (std::size_t row = 0; row < forward.size(); ++row)
      mean += a.err_vs_oracle[row][g];
    mean /= static_cast<double>(forward.size());
    CHECK(a.agg_err_vs_oracle[g] == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("worker count never changes the numbers") {
  ProcessSpec spec{binary_chain()};
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  CesaroReport serial = evaluate(spec, 1.0, 256, seeds, 1);
  CesaroReport threaded = evaluate(spec, 1.0, 256, seeds, 4);
  CHECK(serial.err_vs_oracle == threaded.err_vs_oracle);
  CHECK(serial.err_vs_realized == threaded.err_vs_realized);
  CHECK(serial.agg_err_vs_oracle == threaded.agg_err_vs_oracle);
  CHECK(serial.agg_err_vs_realized == threaded.agg_err_vs_realized);

  const std::string path_a = temp_csv("serial");
  const std::string path_b = temp_csv("threaded");
  write_report(serial, path_a);
  write_report(threaded, path_b);
  std::ifstream fa(path_a), fb(path_b);
  std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                      std::istreambuf_iterator<char>());
  std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                      std::istreambuf_iterator<char>());
  CHECK(bytes_a == bytes_b);
  CHECK(!bytes_a.empty());
  std::remove(path_a.c_str());
  std::remove(path_b.c_str());
}

TEST_CASE("oracle error shrinks with the horizon") {
  ProcessSpec spec{binary_chain()};
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  CesaroReport report = evaluate(spec, 1.0, 10000, seeds);
  std::size_t early = 0;
  while (report.grid[early] != 128) ++early;
  CHECK(report.agg_err_vs_oracle.back() <
        report.agg_err_vs_oracle[early]);
}

TEST_CASE("csv reports round-trip exactly") {
  ProcessSpec spec{binary_chain()};
  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  CesaroReport report = evaluate(spec, 1.0, 64, seeds);
  REQUIRE(report.reference_limit.has_value());

  const std::string path = temp_csv("roundtrip");
  write_report(report, path);
  std::vector<ReportRow> rows = read_report_rows(path);
  const std::size_t per_seed = report.grid.size();
  REQUIRE(rows.size() == per_seed * (seeds.size() + 1));

  std::size_t r = 0;
  for (std::size_t g = 0; g < per_seed; ++g) {
    for (std::size_t sd = 0; sd < seeds.size(); ++sd, ++r) {
      CHECK(rows[r].t == report.grid[g]);
      CHECK(rows[r].p == 1.0);
      CHECK(rows[r].seed == std::to_string(seeds[sd]));
      CHECK(rows[r].err_vs_oracle == report.err_vs_oracle[sd][g]);
      CHECK(rows[r].err_vs_realized == report.err_vs_realized[sd][g]);
      REQUIRE(rows[r].reference_limit.has_value());
      CHECK(*rows[r].reference_limit == *report.reference_limit);
    }
    CHECK(rows[r].seed == "agg");
    CHECK(rows[r].err_vs_oracle == report.agg_err_vs_oracle[g]);
    CHECK(rows[r].err_vs_realized == report.agg_err_vs_realized[g]);
    ++r;
  }
  std::remove(path.c_str());
}

TEST_CASE("report files handle edge cases and bad input") {
  CesaroReport empty;
  empty.spec = ProcessSpec{binary_chain()};
  const std::string path = temp_csv("empty");
  write_report(empty, path);
  CHECK(read_report_rows(path).empty());
  std::remove(path.c_str());

  CHECK_THROWS_AS(write_report(empty, "/nonexistent_dir/report.csv"), IoError);
  CHECK_THROWS_AS(read_report_rows("/tmp/seqpred_missing_report.csv"),
                  IoError);

  const std::string bad_header = temp_csv("badheader");
  {
    std::ofstream out(bad_header);
    out << "time,value\n1,2\n";
  }
  CHECK_THROWS_AS(read_report_rows(bad_header), InputError);
  std::remove(bad_header.c_str());
}

TEST_CASE("closed-form limits for the supported specs") {
  CHECK(limit_reference(ProcessSpec{binary_chain()}, 1.0) ==
        doctest::Approx(0.36).epsilon(1e-12));
  CHECK(limit_reference(ProcessSpec{binary_chain()}, 2.0) ==
        doctest::Approx(0.18).epsilon(1e-12));

  ProcessSpec fair{IidSpec{{0.0, 1.0}, {0.5, 0.5}}};
  CHECK(limit_reference(fair, 2.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(limit_reference(fair, 1.0) == doctest::Approx(0.5).epsilon(1e-12));

  ProcessSpec ar{Ar1Spec{0.5, 1.0}};
  CHECK(limit_reference(ar, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(limit_reference(ar, 1.0) ==
        doctest::Approx(std::sqrt(2.0 / std::acos(-1.0))).epsilon(1e-12));

  MarkovSpec wide = binary_chain();
  wide.state_values = {0.0, 2.0};
  CHECK_THROWS_AS(limit_reference(ProcessSpec{wide}, 1.0), CapabilityError);

  FunctionOfMarkovSpec fom;
  fom.chain.state_values = {0.0, 1.0, 2.0};
  fom.chain.transition = {{0.5, 0.3, 0.2}, {0.1, 0.6, 0.3}, {0.25, 0.25, 0.5}};
  fom.distinguished_state = 1;
  CHECK_THROWS_AS(limit_reference(ProcessSpec{fom}, 1.0), CapabilityError);
  CHECK_THROWS_AS(limit_reference(ProcessSpec{OdometerRefSpec{{5, 9}}}, 1.0),
                  CapabilityError);
  CHECK_THROWS_AS(limit_reference(ProcessSpec{binary_chain()}, 0.5),
                  InputError);
}

TEST_CASE("hidden-state specs evaluate without a closed-form limit") {
  FunctionOfMarkovSpec fom;
  fom.chain.state_values = {0.0, 1.0, 2.0};
  fom.chain.transition = {{0.5, 0.3, 0.2}, {0.1, 0.6, 0.3}, {0.25, 0.25, 0.5}};
  fom.distinguished_state = 1;
  const std::vector<std::uint64_t> seeds = {1};
  CesaroReport report = evaluate(ProcessSpec{fom}, 1.0, 200, seeds);
  CHECK(!report.reference_limit.has_value());
  for (double v : report.err_vs_oracle[0]) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("evaluate input validation") {
  ProcessSpec spec{binary_chain()};
  const std::vector<std::uint64_t> seeds = {1};
  CHECK_THROWS_AS(evaluate(spec, 0.5, 100, seeds), InputError);
  CHECK_THROWS_AS(evaluate(spec, 1.0, 5, seeds), InputError);
  CHECK_THROWS_AS(evaluate(spec, 1.0, 100, std::vector<std::uint64_t>{}),
                  InputError);
}
