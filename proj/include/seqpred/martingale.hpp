#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqpred/rng.hpp"

namespace seqpred {

// Difference generators:
//   zero             Z = 0
//   fair_coin        Z = +/-1 with equal probability
//   uniform          Z = U - 1/2, U uniform on [0,1)
//   pareto           Z = S * (1-U)^(-1/alpha), S a fair sign
//   heavy_quantized  X = S * 2^J with P(J=j) proportional to 2^-j j^-3,
//                    Z = level-0 quantization of X (exactly centered)
// The first four are conditionally centered with a finite p-th moment for
// every p < alpha (bounded generators for every p); heavy_quantized has
// E|X| log+|X| finite but infinite variance.
struct MartingaleSpec {
  std::string generator = "fair_coin";
  double moment_p = 2.0;
  double pareto_alpha = 2.0;
};

void validate_martingale_spec(const MartingaleSpec& spec);

// One centered difference Z_n; consumes draws from rng.
double martingale_difference(const MartingaleSpec& spec, RngStream& rng);

struct AverageTrajectory {
  std::uint64_t seed = 0;
  std::vector<std::int64_t> grid;
  std::vector<double> averages;
  double final_average = 0.0;
  double sup_abs_average = 0.0;
};

std::vector<AverageTrajectory> simulate_running_averages(
    const MartingaleSpec& spec, std::int64_t n_max,
    std::span<const std::uint64_t> seeds);

struct SupEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t num_seeds = 0;
};

// Monte Carlo estimate of the expected p-th power of the running-average
// supremum, with the standard error of the seed mean.
SupEstimate estimate_sup_average(const MartingaleSpec& spec,
                                 std::int64_t n_max,
                                 std::span<const std::uint64_t> seeds,
                                 double p);

}  // namespace seqpred
