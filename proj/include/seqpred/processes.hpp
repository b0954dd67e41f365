#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace seqpred {

struct IidSpec {
  std::vector<double> values;
  std::vector<double> probs;
};

struct MarkovSpec {
  std::vector<double> state_values;
  std::vector<std::vector<double>> transition;  // row-stochastic, order 1
};

struct FunctionOfMarkovSpec {
  MarkovSpec chain;
  std::size_t distinguished_state = 0;  // emitted value is 1 on this state
};

struct Ar1Spec {
  double a = 0.5;     // |a| < 1
  double sigma = 1.0; // innovation standard deviation, > 0
};

// References an odometer process by its schedule l_3 < l_4 < ... < l_K;
// construction and sampling live in the odometer module.
struct OdometerRefSpec {
  std::vector<std::int64_t> ls;
};

using ProcessSpec =
    std::variant<IidSpec, MarkovSpec, FunctionOfMarkovSpec, Ar1Spec,
                 OdometerRefSpec>;

struct ProcessPath {
  ProcessSpec spec;
  std::uint64_t seed = 0;
  std::vector<double> values;
  std::vector<std::size_t> hidden;  // hidden states, function_of_markov only
};

std::string spec_name(const ProcessSpec& spec);

// Throws InputError / StructureError when the spec is malformed; markov
// chains must be irreducible and aperiodic.
void validate_spec(const ProcessSpec& spec);

// Unique left fixed probability vector of an irreducible aperiodic
// row-stochastic matrix. Throws StructureError otherwise.
std::vector<double> stationary_distribution(
    const std::vector<std::vector<double>>& matrix);

// Initial state from the stationary law, then the transition law; AR(1)
// starts from its stationary normal distribution. Bit-for-bit reproducible
// from (spec, n, seed).
ProcessPath sample_path(const ProcessSpec& spec, std::int64_t n,
                        std::uint64_t seed);

// Exact conditional mean of the next sample given history, for iid and
// order-1 markov specs. History values must lie in the state alphabet.
double markov_conditional_mean(const ProcessSpec& spec,
                               std::span<const double> history);

// Exact conditional mean for the indicator-of-a-state process, by forward
// filtering over hidden states. Zero-probability histories throw
// ConsistencyError.
double hmm_filter_conditional_mean(const FunctionOfMarkovSpec& spec,
                                   std::span<const double> history);

// Enumeration oracle for small instances: sums over all hidden paths.
double hmm_enumeration_conditional_mean(const FunctionOfMarkovSpec& spec,
                                        std::span<const double> history);

double ar1_conditional_mean(const Ar1Spec& spec,
                            std::span<const double> history);

}  // namespace seqpred
