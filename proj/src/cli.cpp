#include "seqpred/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "seqpred/errors.hpp"
#include "seqpred/harness.hpp"
#include "seqpred/martingale.hpp"
#include "seqpred/odometer.hpp"
#include "seqpred/predictor.hpp"

namespace seqpred {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.empty()) throw InputError(what + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw InputError(what + ": cannot parse number from '" + t + "'");
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t.empty()) throw InputError(what + ": empty integer");
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size())
    throw InputError(what + ": cannot parse integer from '" + t + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> values;
  for (const auto& part : split(text, ','))
    values.push_back(parse_double(part, what));
  return values;
}

std::vector<std::int64_t> parse_int_list(const std::string& text,
                                         const std::string& what) {
  std::vector<std::int64_t> values;
  for (const auto& part : split(text, ','))
    values.push_back(parse_int(part, what));
  return values;
}

std::vector<std::vector<double>> parse_matrix(const std::string& text,
                                              const std::string& what) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(text, ';'))
    rows.push_back(parse_double_list(row, what));
  return rows;
}

template <typename T>
std::string join_numbers(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, double>)
      out += fmt17(values[i]);
    else
      out += std::to_string(values[i]);
  }
  return out;
}

std::string join_matrix(const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ';';
    out += join_numbers(rows[i]);
  }
  return out;
}

std::vector<std::uint64_t> seed_list(std::int64_t count) {
  if (count < 1) throw InputError("seed count must be >= 1");
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(count));
  for (std::int64_t s = 1; s <= count; ++s)
    seeds.push_back(static_cast<std::uint64_t>(s));
  return seeds;
}

std::string resolve_out(const std::string& out, const std::string& fallback) {
  std::string path = out.empty() ? fallback : out;
  if (path.empty() || path.front() == '/') return path;
  const char* dir = std::getenv("SEQPRED_OUT_DIR");
  if (dir != nullptr && *dir != '\0') return std::string(dir) + "/" + path;
  return path;
}

std::vector<double> read_data_file(const std::string& path) {
  if (path.empty())
    throw InputError("predict: no data file given (use --data)");
  std::ifstream in(path);
  if (!in) throw IoError("predict: cannot open " + path);
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    values.push_back(
        parse_double(text, path + ":" + std::to_string(line_no)));
  }
  return values;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const CapabilityError*>(&e) != nullptr ||
      dynamic_cast<const BudgetError*>(&e) != nullptr ||
      dynamic_cast<const SearchError*>(&e) != nullptr ||
      dynamic_cast<const DepthError*>(&e) != nullptr)
    return 2;
  return 1;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

std::string certificate_text(const DivergenceCertificate& c) {
  std::ostringstream out;
  out << "divergence certificate k=" << c.k << '\n'
      << "  a_k = " << c.a_k << '\n'
      << "  l_k = " << c.l_k << '\n'
      << "  seed_used = " << c.seed_used << '\n'
      << "  attempts = " << c.attempts << '\n'
      << "  i0 = " << c.i0 << '\n'
      << "  special_time = " << c.special_time << '\n'
      << "  window_conditional = " << fmt12(c.window_conditional) << '\n'
      << "  window_closed_form = " << fmt12(c.window_closed_form) << '\n'
      << "  full_past_value = " << fmt12(c.full_past_value) << '\n'
      << "  cesaro_value = " << fmt12(c.cesaro_value) << '\n'
      << "  bound = " << fmt12(c.bound) << '\n'
      << "  slack = " << fmt12(c.slack) << '\n'
      << "  pass = " << (c.pass ? "true" : "false") << '\n';
  return out.str();
}

std::string scheme_certificate_text(const SchemeCertificate& c,
                                    const std::string& scheme_name) {
  std::ostringstream out;
  out << "scheme certificate k=" << c.k << " scheme=" << scheme_name << '\n'
      << "  a_k = " << c.a_k << '\n'
      << "  l_k = " << c.l_k << '\n'
      << "  seed_used = " << c.seed_used << '\n'
      << "  attempts = " << c.attempts << '\n'
      << "  i0 = " << c.i0 << '\n'
      << "  special_time = " << c.special_time << '\n'
      << "  window_conditional = " << fmt12(c.window_conditional) << '\n'
      << "  scheme_value = " << fmt12(c.scheme_value) << '\n'
      << "  cesaro_value = " << fmt12(c.cesaro_value) << '\n'
      << "  bound = " << fmt12(c.bound) << '\n'
      << "  slack = " << fmt12(c.slack) << '\n'
      << "  pass = " << (c.pass ? "true" : "false") << '\n';
  return out.str();
}

int cmd_predict(const RunConfig& cfg) {
  const std::vector<double> values = read_data_file(cfg.data);
  const Prediction pred = forward_predict(values);
  std::cout << "samples = " << values.size() << '\n'
            << "prediction = " << fmt17(pred.value) << '\n'
            << "fallback_used = " << (pred.fallback_used ? "true" : "false")
            << '\n'
            << "kappa = " << pred.trace.kappa << '\n'
            << "taus = " << join_numbers(pred.trace.taus) << '\n'
            << "lambdas = " << join_numbers(pred.trace.lambdas) << '\n'
            << "picked_values = " << join_numbers(pred.trace.picked_values)
            << '\n';
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  const ProcessSpec spec = process_from_config(cfg);
  const auto seeds = seed_list(cfg.seeds);
  const CesaroReport report =
      evaluate(spec, cfg.p, cfg.horizon, seeds, cfg.parallelism);
  const std::string path = resolve_out(cfg.out, "report.csv");
  write_report(report, path);
  const std::size_t last = report.grid.size() - 1;
  std::cout << "process = " << spec_name(spec) << '\n'
            << "T = " << report.grid[last] << '\n'
            << "err_vs_oracle(T) agg = " << fmt12(report.agg_err_vs_oracle[last])
            << '\n'
            << "err_vs_realized(T) agg = "
            << fmt12(report.agg_err_vs_realized[last]) << '\n';
  if (report.reference_limit)
    std::cout << "reference_limit = " << fmt12(*report.reference_limit)
              << '\n';
  else
    std::cout << "reference_limit = none\n";
  std::cout << "wrote " << path << '\n';
  return 0;
}

int cmd_certify(const RunConfig& cfg) {
  OdometerSchedule s;
  s.ls = cfg.schedule;
  const DivergenceCertificate cert =
      divergence_certificate(s, cfg.k, cfg.seed, cfg.slack);
  const std::string text = certificate_text(cert);
  std::cout << text;
  const std::string path = resolve_out(cfg.out, "");
  if (!path.empty()) {
    write_text_file(path, text);
    std::cout << "wrote " << path << '\n';
  }
  return 0;
}

int cmd_adversary(const RunConfig& cfg) {
  const auto scheme = make_scheme(cfg.scheme);
  AdversaryParams params;
  params.k_max = cfg.k_max;
  params.horizon = cfg.adversary_horizon;
  params.num_seeds = static_cast<int>(cfg.adversary_seeds);
  params.seed = cfg.seed;
  const AdversaryResult result = build_adversarial_schedule(*scheme, params);
  std::ostringstream out;
  out << "scheme = " << scheme->name() << '\n'
      << "schedule = " << join_numbers(result.schedule.ls) << '\n';
  for (const auto& stage : result.stages)
    out << "stage k=" << stage.k << " N_k=" << stage.n_k
        << " l_k=" << stage.l_k << '\n';
  const SchemeCertificate cert =
      certify_scheme(result.schedule, cfg.k, *scheme, cfg.seed, cfg.slack);
  out << scheme_certificate_text(cert, scheme->name());
  const std::string text = out.str();
  std::cout << text;
  const std::string path = resolve_out(cfg.out, "");
  if (!path.empty()) {
    write_text_file(path, text);
    std::cout << "wrote " << path << '\n';
  }
  return 0;
}

void write_martingale_csv(const std::vector<AverageTrajectory>& trajectories,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << "n,seed,running_average,sup_abs_average\n";
  for (const auto& traj : trajectories)
    for (std::size_t g = 0; g < traj.grid.size(); ++g)
      out << traj.grid[g] << ',' << traj.seed << ','
          << fmt17(traj.averages[g]) << ',' << fmt17(traj.sup_abs_average)
          << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

int cmd_martingale(const RunConfig& cfg) {
  MartingaleSpec spec;
  spec.generator = cfg.generator;
  spec.moment_p = cfg.moment;
  spec.pareto_alpha = cfg.pareto_alpha;
  const auto seeds = seed_list(cfg.seeds);
  const auto trajectories =
      simulate_running_averages(spec, cfg.n_max, seeds);
  for (const auto& traj : trajectories)
    std::cout << "seed " << traj.seed << ": final_average = "
              << fmt12(traj.final_average)
              << " sup_abs_average = " << fmt12(traj.sup_abs_average) << '\n';
  const SupEstimate est = estimate_sup_average(spec, cfg.n_max, seeds, cfg.p);
  std::cout << "sup_estimate(p=" << fmt12(cfg.p) << ") = "
            << fmt12(est.estimate) << " +/- " << fmt12(est.std_error)
            << " over " << est.num_seeds << " seeds\n";
  const std::string path = resolve_out(cfg.out, "");
  if (!path.empty()) {
    write_martingale_csv(trajectories, path);
    std::cout << "wrote " << path << '\n';
  }
  return 0;
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

void apply_config_value(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "subcommand") {
    cfg.subcommand = value;
  } else if (key == "process") {
    cfg.process = value;
  } else if (key == "iid_values") {
    cfg.iid_values = parse_double_list(value, key);
  } else if (key == "iid_probs") {
    cfg.iid_probs = parse_double_list(value, key);
  } else if (key == "state_values") {
    cfg.state_values = parse_double_list(value, key);
  } else if (key == "transition") {
    cfg.transition = parse_matrix(value, key);
  } else if (key == "distinguished_state") {
    cfg.distinguished_state = parse_int(value, key);
  } else if (key == "ar1_a") {
    cfg.ar1_a = parse_double(value, key);
  } else if (key == "ar1_sigma") {
    cfg.ar1_sigma = parse_double(value, key);
  } else if (key == "schedule") {
    cfg.schedule = parse_int_list(value, key);
  } else if (key == "p") {
    cfg.p = parse_double(value, key);
  } else if (key == "horizon") {
    cfg.horizon = parse_int(value, key);
  } else if (key == "seeds") {
    cfg.seeds = parse_int(value, key);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(value, key));
  } else if (key == "k") {
    cfg.k = static_cast<int>(parse_int(value, key));
  } else if (key == "k_max") {
    cfg.k_max = static_cast<int>(parse_int(value, key));
  } else if (key == "slack") {
    cfg.slack = parse_double(value, key);
  } else if (key == "scheme") {
    cfg.scheme = value;
  } else if (key == "adversary_horizon") {
    cfg.adversary_horizon = parse_int(value, key);
  } else if (key == "adversary_seeds") {
    cfg.adversary_seeds = parse_int(value, key);
  } else if (key == "generator") {
    cfg.generator = value;
  } else if (key == "pareto_alpha") {
    cfg.pareto_alpha = parse_double(value, key);
  } else if (key == "moment") {
    cfg.moment = parse_double(value, key);
  } else if (key == "n_max") {
    cfg.n_max = parse_int(value, key);
  } else if (key == "data") {
    cfg.data = value;
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "parallelism") {
    cfg.parallelism = static_cast<int>(parse_int(value, key));
  } else if (key == "rng") {
    if (value != RngStream::identity())
      throw InputError("unsupported rng: " + value);
    cfg.rng = value;
  } else {
    throw InputError("unknown config key: " + key);
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_config: cannot open " + path);
  RunConfig cfg = default_config();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = line;
    const std::size_t hash = text.find('#');
    if (hash != std::string::npos) text.resize(hash);
    text = trim(text);
    if (text.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw InputError(where + ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw InputError(where + ": empty key");
    try {
      apply_config_value(cfg, key, value);
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  return cfg;
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "subcommand = " << cfg.subcommand << '\n'
      << "process = " << cfg.process << '\n'
      << "iid_values = " << join_numbers(cfg.iid_values) << '\n'
      << "iid_probs = " << join_numbers(cfg.iid_probs) << '\n'
      << "state_values = " << join_numbers(cfg.state_values) << '\n'
      << "transition = " << join_matrix(cfg.transition) << '\n'
      << "distinguished_state = " << cfg.distinguished_state << '\n'
      << "ar1_a = " << fmt17(cfg.ar1_a) << '\n'
      << "ar1_sigma = " << fmt17(cfg.ar1_sigma) << '\n'
      << "schedule = " << join_numbers(cfg.schedule) << '\n'
      << "p = " << fmt17(cfg.p) << '\n'
      << "horizon = " << cfg.horizon << '\n'
      << "seeds = " << cfg.seeds << '\n'
      << "seed = " << cfg.seed << '\n'
      << "k = " << cfg.k << '\n'
      << "k_max = " << cfg.k_max << '\n'
      << "slack = " << fmt17(cfg.slack) << '\n'
      << "scheme = " << cfg.scheme << '\n'
      << "adversary_horizon = " << cfg.adversary_horizon << '\n'
      << "adversary_seeds = " << cfg.adversary_seeds << '\n'
      << "generator = " << cfg.generator << '\n'
      << "pareto_alpha = " << fmt17(cfg.pareto_alpha) << '\n'
      << "moment = " << fmt17(cfg.moment) << '\n'
      << "n_max = " << cfg.n_max << '\n'
      << "data = " << cfg.data << '\n'
      << "out = " << cfg.out << '\n'
      << "parallelism = " << cfg.parallelism << '\n'
      << "rng = " << cfg.rng << '\n';
  return out.str();
}

ProcessSpec process_from_config(const RunConfig& cfg) {
  if (cfg.process == "iid") return IidSpec{cfg.iid_values, cfg.iid_probs};
  if (cfg.process == "markov")
    return MarkovSpec{cfg.state_values, cfg.transition};
  if (cfg.process == "function_of_markov") {
    if (cfg.distinguished_state < 0)
      throw InputError("distinguished_state must be >= 0");
    return FunctionOfMarkovSpec{
        MarkovSpec{cfg.state_values, cfg.transition},
        static_cast<std::size_t>(cfg.distinguished_state)};
  }
  if (cfg.process == "ar1") return Ar1Spec{cfg.ar1_a, cfg.ar1_sigma};
  if (cfg.process == "odometer") return OdometerRefSpec{cfg.schedule};
  throw InputError("unknown process: " + cfg.process);
}

int run_main(int argc, char** argv) {
  CLI::App app{"pattern-recurrence sequential prediction toolkit"};
  app.require_subcommand(1);

  struct Flags {
    std::string config, process, schedule, scheme, generator, data, out;
    double p = 0.0, slack = 0.0, alpha = 0.0, moment = 0.0;
    std::int64_t horizon = 0, seeds = 0, n_max = 0, adversary_horizon = 0,
                 adversary_seeds = 0;
    int k = 0, k_max = 0, parallelism = 0;
    std::uint64_t seed = 0;
  } f;

  auto* predict = app.add_subcommand(
      "predict", "one-shot forward prediction from a data file");
  predict->add_option("--config", f.config, "config file");
  predict->add_option("--data", f.data, "data file, one real per line");

  auto* eval = app.add_subcommand("evaluate", "harness run producing a CSV");
  eval->add_option("--config", f.config, "config file");
  eval->add_option("--process", f.process,
                   "iid|markov|function_of_markov|ar1|odometer");
  eval->add_option("--p", f.p, "error exponent");
  eval->add_option("--T", f.horizon, "horizon");
  eval->add_option("--seeds", f.seeds, "number of seeds (runs 1..N)");
  eval->add_option("--schedule", f.schedule, "odometer schedule, e.g. 5,9,15");
  eval->add_option("--out", f.out, "output CSV path");
  eval->add_option("--parallelism", f.parallelism, "worker count, 0 = auto");

  auto* certify =
      app.add_subcommand("certify", "divergence certificate for a schedule");
  certify->add_option("--config", f.config, "config file");
  certify->add_option("--schedule", f.schedule, "schedule, e.g. 5,9,15");
  certify->add_option("--k", f.k, "certificate level");
  certify->add_option("--slack", f.slack, "pass slack in (0,1)");
  certify->add_option("--seed", f.seed, "search base seed");
  certify->add_option("--out", f.out, "also write the report here");

  auto* adversary = app.add_subcommand(
      "adversary", "build a schedule against a baseline scheme");
  adversary->add_option("--config", f.config, "config file");
  adversary->add_option("--scheme", f.scheme, "zero|sample_mean|last_value");
  adversary->add_option("--k-max", f.k_max, "last stage to build");
  adversary->add_option("--k", f.k, "stage to certify afterwards");
  adversary->add_option("--slack", f.slack, "pass slack in (0,1)");
  adversary->add_option("--horizon", f.adversary_horizon,
                        "per-seed simulation length");
  adversary->add_option("--stage-seeds", f.adversary_seeds,
                        "seeds per stage estimate");
  adversary->add_option("--seed", f.seed, "base seed");
  adversary->add_option("--out", f.out, "also write the report here");

  auto* martingale = app.add_subcommand("martingale", "running-average lab");
  martingale->add_option("--config", f.config, "config file");
  martingale->add_option("--generator", f.generator,
                         "zero|fair_coin|uniform|pareto|heavy_quantized");
  martingale->add_option("--alpha", f.alpha, "pareto tail index");
  martingale->add_option("--moment", f.moment, "certified moment exponent");
  martingale->add_option("--n-max", f.n_max, "trajectory length");
  martingale->add_option("--p", f.p, "sup moment exponent");
  martingale->add_option("--seeds", f.seeds, "number of seeds (runs 1..N)");
  martingale->add_option("--out", f.out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  const auto given = [&sub](const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  try {
    RunConfig cfg = default_config();
    if (given("--config")) cfg = load_config(f.config);
    cfg.subcommand = sub->get_name();
    if (given("--process")) cfg.process = f.process;
    if (given("--p")) cfg.p = f.p;
    if (given("--T")) cfg.horizon = f.horizon;
    if (given("--seeds")) cfg.seeds = f.seeds;
    if (given("--schedule"))
      cfg.schedule = parse_int_list(f.schedule, "--schedule");
    if (given("--out")) cfg.out = f.out;
    if (given("--parallelism")) cfg.parallelism = f.parallelism;
    if (given("--data")) cfg.data = f.data;
    if (given("--k")) cfg.k = f.k;
    if (given("--slack")) cfg.slack = f.slack;
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--scheme")) cfg.scheme = f.scheme;
    if (given("--k-max")) cfg.k_max = f.k_max;
    if (given("--horizon")) cfg.adversary_horizon = f.adversary_horizon;
    if (given("--stage-seeds")) cfg.adversary_seeds = f.adversary_seeds;
    if (given("--generator")) cfg.generator = f.generator;
    if (given("--alpha")) cfg.pareto_alpha = f.alpha;
    if (given("--moment")) cfg.moment = f.moment;
    if (given("--n-max")) cfg.n_max = f.n_max;

    std::cout << "# effective config\n" << render_config(cfg) << '\n';

    if (cfg.subcommand == "predict") return cmd_predict(cfg);
    if (cfg.subcommand == "evaluate") return cmd_evaluate(cfg);
    if (cfg.subcommand == "certify") return cmd_certify(cfg);
    if (cfg.subcommand == "adversary") return cmd_adversary(cfg);
    if (cfg.subcommand == "martingale") return cmd_martingale(cfg);
    throw InputError("unknown subcommand: " + cfg.subcommand);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("seqpred");
  for (const auto& a : args) storage.push_back(a);
  std::vector<char*> argv;
  argv.reserve(storage.size());
  for (auto& s : storage) argv.push_back(s.data());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace seqpred
