#include "doctest.h"

#include <cmath>
#include <vector>

#include "seqpred/errors.hpp"
#include "seqpred/processes.hpp"

using namespace seqpred;

namespace {

MarkovSpec binary_chain() {
  MarkovSpec m;
  m.state_values = {0.0, 1.0};
  m.transition = {{0.7, 0.3}, {0.2, 0.8}};
  return m;
}

FunctionOfMarkovSpec three_state_hmm() {
  FunctionOfMarkovSpec f;
  f.chain.state_values = {0.0, 1.0, 2.0};
  f.chain.transition = {
      {0.5, 0.3, 0.2}, {0.1, 0.6, 0.3}, {0.25, 0.25, 0.5}};
  f.distinguished_state = 1;
  return f;
}

}  // namespace

TEST_CASE("stationary distribution of the pinned chain") {
  const auto pi = stationary_distribution(binary_chain().transition);
  REQUIRE(pi.size() == 2);
  CHECK(std::fabs(pi[0] - 0.4) <= 1e-12);
  CHECK(std::fabs(pi[1] - 0.6) <= 1e-12);
}

TEST_CASE("stationary distribution structural errors") {
  CHECK_THROWS_AS(stationary_distribution({{1.0, 0.0}, {0.0, 1.0}}),
                  StructureError);
  CHECK_THROWS_AS(stationary_distribution({{0.0, 1.0}, {1.0, 0.0}}),
                  StructureError);  // period 2
  CHECK_THROWS_AS(stationary_distribution({{0.5, 0.5}, {0.5, 0.6}}),
                  InputError);  // row sums off
}

TEST_CASE("doubly stochastic chain is uniform") {
  const std::vector<std::vector<double>> doubly = {
      {0.2, 0.3, 0.5}, {0.5, 0.2, 0.3}, {0.3, 0.5, 0.2}};
  const auto pi = stationary_distribution(doubly);
  for (const double x : pi) CHECK(std::fabs(x - 1.0 / 3.0) <= 1e-12);
}

TEST_CASE("spec validation") {
  CHECK_NOTHROW(validate_spec(ProcessSpec{binary_chain()}));
  CHECK_NOTHROW(validate_spec(ProcessSpec{IidSpec{{0, 1}, {0.5, 0.5}}}));
  CHECK_NOTHROW(validate_spec(ProcessSpec{three_state_hmm()}));
  CHECK_NOTHROW(validate_spec(ProcessSpec{Ar1Spec{0.5, 1.0}}));

  CHECK_THROWS_AS(validate_spec(ProcessSpec{IidSpec{{0, 1}, {0.6, 0.5}}}),
                  InputError);
  CHECK_THROWS_AS(validate_spec(ProcessSpec{IidSpec{{0, 1}, {0.5}}}),
                  InputError);
  CHECK_THROWS_AS(validate_spec(ProcessSpec{Ar1Spec{1.0, 1.0}}), InputError);
  CHECK_THROWS_AS(validate_spec(ProcessSpec{Ar1Spec{0.5, 0.0}}), InputError);

  MarkovSpec dup = binary_chain();
  dup.state_values = {1.0, 1.0};
  CHECK_THROWS_AS(validate_spec(ProcessSpec{dup}), InputError);

  MarkovSpec reducible = binary_chain();
  reducible.transition = {{1.0, 0.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(validate_spec(ProcessSpec{reducible}), StructureError);

  FunctionOfMarkovSpec bad = three_state_hmm();
  bad.distinguished_state = 3;
  CHECK_THROWS_AS(validate_spec(ProcessSpec{bad}), InputError);
}

TEST_CASE("iid path empirical mean") {
  const ProcessSpec spec = IidSpec{{0.0, 1.0}, {0.5, 0.5}};
  const ProcessPath path = sample_path(spec, 100000, 1);
  double sum = 0.0;
  for (const double v : path.values) sum += v;
  CHECK(std::fabs(sum / 1e5 - 0.5) <= 0.01);
}

TEST_CASE("markov path empirical mean matches the stationary law") {
  const ProcessPath path = sample_path(ProcessSpec{binary_chain()}, 100000, 2);
  double sum = 0.0;
  for (const double v : path.values) sum += v;
  CHECK(std::fabs(sum / 1e5 - 0.6) <= 0.01);
}

TEST_CASE("ar1 path lag-1 autocorrelation") {
  const ProcessPath path = sample_path(ProcessSpec{Ar1Spec{0.5, 1.0}},
                                       100000, 3);
  double mean = 0.0;
  for (const double v : path.values) mean += v;
  mean /= 1e5;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    const double c = path.values[i] - mean;
    den += c * c;
    if (i + 1 < path.values.size())
      num += c * (path.values[i + 1] - mean);
  }
  CHECK(std::fabs(num / den - 0.5) <= 0.02);
}

TEST_CASE("paths regenerate bit for bit") {
  const std::vector<ProcessSpec> specs = {
      ProcessSpec{binary_chain()}, ProcessSpec{three_state_hmm()},
      ProcessSpec{Ar1Spec{}}, ProcessSpec{IidSpec{{0, 1}, {0.3, 0.7}}}};
  for (const auto& spec : specs) {
    const ProcessPath a = sample_path(spec, 500, 77);
    const ProcessPath b = sample_path(spec, 500, 77);
    CHECK(a.values == b.values);
    CHECK(a.hidden == b.hidden);
    const ProcessPath c = sample_path(spec, 500, 78);
    CHECK(a.values != c.values);
  }
}

TEST_CASE("marginal is stationary along the path") {
  const ProcessSpec spec{binary_chain()};
  double at_start = 0.0;
  double at_middle = 0.0;
  const int seeds = 10000;
  for (int seed = 1; seed <= seeds; ++seed) {
    const ProcessPath path =
        sample_path(spec, 40, static_cast<std::uint64_t>(seed));
    at_start += path.values[0];
    at_middle += path.values[20];
  }
  CHECK(std::fabs(at_start / seeds - at_middle / seeds) <= 0.03);
}

TEST_CASE("markov conditional mean reads the transition row") {
  const ProcessSpec spec{binary_chain()};
  const std::vector<double> ends_in_one = {0.0, 1.0, 1.0};
  CHECK(markov_conditional_mean(spec, ends_in_one) == 0.8);
  const std::vector<double> ends_in_zero = {1.0, 0.0};
  CHECK(markov_conditional_mean(spec, ends_in_zero) == 0.3);

  const std::vector<double> bad = {0.0, 2.0};
  CHECK_THROWS_AS(markov_conditional_mean(spec, bad), DomainError);
  CHECK_THROWS_AS(markov_conditional_mean(spec, std::vector<double>{}),
                  InputError);
}

TEST_CASE("iid conditional mean ignores the history") {
  const ProcessSpec spec = IidSpec{{0.0, 1.0}, {0.7, 0.3}};
  const std::vector<double> history = {1.0, 0.0, 0.0};
  CHECK(markov_conditional_mean(spec, history) == doctest::Approx(0.3));
  const std::vector<double> bad = {0.5};
  CHECK_THROWS_AS(markov_conditional_mean(spec, bad), DomainError);
}

TEST_CASE("filter collapses to a point mass after observing a one") {
  const FunctionOfMarkovSpec f = three_state_hmm();
  const std::vector<double> history = {0.0, 1.0};
  const double expected = f.chain.transition[1][1];
  CHECK(std::fabs(hmm_filter_conditional_mean(f, history) - expected) <=
        1e-15);
}

TEST_CASE("filter initialization uses the stationary law") {
  const FunctionOfMarkovSpec f = three_state_hmm();
  const auto pi = stationary_distribution(f.chain.transition);
  // P(X_0 = 1) = pi(s); conditioning X_0 = 0 renormalizes off s
  std::vector<double> cond(3, 0.0);
  double mass = 0.0;
  for (std::size_t j = 0; j < 3; ++j)
    if (j != f.distinguished_state) {
      cond[j] = pi[j];
      mass += pi[j];
    }
  double expected = 0.0;
  for (std::size_t j = 0; j < 3; ++j)
    expected += cond[j] / mass * f.chain.transition[j][f.distinguished_state];
  const std::vector<double> history = {0.0};
  CHECK(std::fabs(hmm_filter_conditional_mean(f, history) - expected) <=
        1e-15);
}

TEST_CASE("filter equals hidden-path enumeration") {
  const FunctionOfMarkovSpec f = three_state_hmm();
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const ProcessPath path = sample_path(ProcessSpec{f}, 12, seed);
    for (std::size_t i = 1; i <= path.values.size(); ++i) {
      const auto history = std::span<const double>(path.values).first(i);
      const double filtered = hmm_filter_conditional_mean(f, history);
      const double enumerated = hmm_enumeration_conditional_mean(f, history);
      CHECK(std::fabs(filtered - enumerated) <= 1e-12);
    }
  }
}

TEST_CASE("filter rejects impossible observations") {
  FunctionOfMarkovSpec f;
  f.chain.state_values = {0.0, 1.0};
  f.chain.transition = {{0.0, 1.0}, {0.5, 0.5}};  // state 0 always leaves
  f.distinguished_state = 0;
  // two consecutive visits to state 0 have probability zero
  const std::vector<double> impossible = {1.0, 1.0};
  CHECK_THROWS_AS(hmm_filter_conditional_mean(f, impossible),
                  ConsistencyError);
  const std::vector<double> not_binary = {0.5};
  CHECK_THROWS_AS(hmm_filter_conditional_mean(f, not_binary),
                  ConsistencyError);
}

TEST_CASE("ar1 conditional mean") {
  CHECK(ar1_conditional_mean(Ar1Spec{0.5, 1.0}, std::vector<double>{2.0}) ==
        1.0);
  CHECK(ar1_conditional_mean(Ar1Spec{0.0, 1.0},
                             std::vector<double>{5.0, -3.0}) == 0.0);
  CHECK_THROWS_AS(ar1_conditional_mean(Ar1Spec{}, std::vector<double>{}),
                  InputError);
}

TEST_CASE("ar1 conditional mean matches Monte Carlo on binned histories") {
  const Ar1Spec spec{0.5, 1.0};
  // average X_{i+1} over samples whose X_i falls in a narrow bin
  double sum_next = 0.0;
  std::int64_t count = 0;
  const double bin_lo = 0.9;
  const double bin_hi = 1.1;
  for (std::uint64_t seed = 1; seed <= 400; ++seed) {
    const ProcessPath path = sample_path(ProcessSpec{spec}, 2000, seed);
    for (std::size_t i = 0; i + 1 < path.values.size(); ++i) {
      if (path.values[i] >= bin_lo && path.values[i] < bin_hi) {
        sum_next += path.values[i + 1];
        ++count;
      }
    }
  }
  REQUIRE(count > 10000);
  // bin center 1.0 -> conditional mean near 0.5, sd 1 per sample
  CHECK(std::fabs(sum_next / static_cast<double>(count) - 0.5) <= 0.05);
}

TEST_CASE("function_of_markov is finitarily Markovian in the window") {
  // conditional frequency of a 1 after (1,0,0) vs after (0,1,0,0): once the
  // window reaches back to the last 1, more context does not move the law
  const FunctionOfMarkovSpec f = three_state_hmm();
  double hits_short = 0.0, total_short = 0.0;
  double hits_long = 0.0, total_long = 0.0;
  for (std::uint64_t seed = 1; seed <= 400; ++seed) {
    const ProcessPath path = sample_path(ProcessSpec{f}, 3000, seed);
    const auto& v = path.values;
    for (std::size_t i = 3; i + 1 < v.size(); ++i) {
      if (v[i - 2] == 1.0 && v[i - 1] == 0.0 && v[i] == 0.0) {
        total_short += 1.0;
        hits_short += v[i + 1];
        if (v[i - 3] == 0.0) {
          total_long += 1.0;
          hits_long += v[i + 1];
        }
      }
    }
  }
  REQUIRE(total_long > 5000.0);
  CHECK(std::fabs(hits_short / total_short - hits_long / total_long) <= 0.02);
}

TEST_CASE("spec names") {
  CHECK(spec_name(ProcessSpec{binary_chain()}) == "markov");
  CHECK(spec_name(ProcessSpec{IidSpec{}}) == "iid");
  CHECK(spec_name(ProcessSpec{three_state_hmm()}) == "function_of_markov");
  CHECK(spec_name(ProcessSpec{Ar1Spec{}}) == "ar1");
  CHECK(spec_name(ProcessSpec{OdometerRefSpec{}}) == "odometer");
}
