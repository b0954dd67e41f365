#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqpred/processes.hpp"
#include "seqpred/rng.hpp"

namespace seqpred {

// Every field has a default; config-file values override defaults and CLI
// flags override both. The rendered form of this struct is what every
// successful run prints, and load_config accepts every key it prints.
struct RunConfig {
  std::string subcommand;
  std::string process = "markov";
  std::vector<double> iid_values = {0.0, 1.0};
  std::vector<double> iid_probs = {0.5, 0.5};
  std::vector<double> state_values = {0.0, 1.0};
  std::vector<std::vector<double>> transition = {{0.7, 0.3}, {0.2, 0.8}};
  std::int64_t distinguished_state = 0;
  double ar1_a = 0.5;
  double ar1_sigma = 1.0;
  std::vector<std::int64_t> schedule = {5, 9, 15};
  double p = 1.0;
  std::int64_t horizon = 10000;
  std::int64_t seeds = 5;  // runs use seeds 1..seeds
  std::uint64_t seed = 1;  // base seed for certificate searches
  int k = 3;
  int k_max = 5;
  double slack = 0.1;
  std::string scheme = "sample_mean";
  std::int64_t adversary_horizon = 4096;
  std::int64_t adversary_seeds = 256;
  std::string generator = "fair_coin";
  double pareto_alpha = 2.0;
  double moment = 1.5;
  std::int64_t n_max = 1000000;
  std::string data;
  std::string out;
  int parallelism = 0;  // 0 = all available workers
  std::string rng = std::string(RngStream::identity());
};

RunConfig default_config();

// Line-oriented `key = value` overlay on the defaults; `#` starts a
// comment. Unknown keys and malformed values fail with the line number.
RunConfig load_config(const std::string& path);

// One key worth of load_config, shared with it; throws InputError.
void apply_config_value(RunConfig& cfg, const std::string& key,
                        const std::string& value);

// Text block that load_config parses back into an identical config.
std::string render_config(const RunConfig& cfg);

ProcessSpec process_from_config(const RunConfig& cfg);

// Exit code 0 on success, 1 on input/config errors, 2 on capability or
// budget errors, 3 on I/O errors.
int run_main(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace seqpred
