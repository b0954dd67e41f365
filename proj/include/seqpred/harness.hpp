#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqpred/processes.hpp"

namespace seqpred {

struct CesaroReport {
  ProcessSpec spec;
  double p = 1.0;
  std::vector<std::int64_t> grid;
  std::vector<std::uint64_t> seeds;
  // Running Cesaro averages at each grid point, one row per seed:
  // (1/t) sum_{i<=t} |prediction_i - reference_i|^p with the conditional
  // mean as reference for err_vs_oracle and the realized sample for
  // err_vs_realized.
  std::vector<std::vector<double>> err_vs_oracle;
  std::vector<std::vector<double>> err_vs_realized;
  // Mean over seeds, summed in value order so any seed permutation
  // produces identical bytes.
  std::vector<double> agg_err_vs_oracle;
  std::vector<double> agg_err_vs_realized;
  std::optional<double> reference_limit;
};

// Powers of two up to horizon, plus the horizon itself.
std::vector<std::int64_t> time_grid(std::int64_t horizon);

// Walks each seeded path: predicts sample i from the first i samples,
// queries the exact conditional-mean oracle, and accumulates both error
// series from i = 1 to the horizon. Seeds run independently (in parallel
// when parallelism > 1) and reduce deterministically. Throws
// CapabilityError when the spec has no exact oracle at desk scale.
CesaroReport evaluate(const ProcessSpec& spec, double p, std::int64_t horizon,
                      std::span<const std::uint64_t> seeds,
                      int parallelism = 0);

// Closed-form limit of the realized-error Cesaro average: central absolute
// moment for iid, the two-sided switching moment for {0,1} markov chains,
// and the Gaussian absolute moment of the innovation for ar1. Other specs
// throw CapabilityError.
double limit_reference(const ProcessSpec& spec, double p);

// CSV with header t,p,seed,err_vs_oracle,err_vs_realized,reference_limit:
// one row per grid point per seed plus a seed=agg row, floats at 17
// significant digits.
void write_report(const CesaroReport& report, const std::string& path);

struct ReportRow {
  std::int64_t t = 0;
  double p = 1.0;
  std::string seed;  // decimal integer or "agg"
  double err_vs_oracle = 0.0;
  double err_vs_realized = 0.0;
  std::optional<double> reference_limit;
};

std::vector<ReportRow> read_report_rows(const std::string& path);

}  // namespace seqpred
