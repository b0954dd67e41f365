#include "seqpred/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <thread>

#include "seqpred/errors.hpp"
#include "seqpred/odometer.hpp"
#include "seqpred/predictor.hpp"

namespace seqpred {

namespace {

double error_power(double diff, double p) {
  if (p == 1.0) return std::fabs(diff);
  if (p == 2.0) return diff * diff;
  return std::pow(std::fabs(diff), p);
}

// Consumes path samples one at a time; next(X_{i-1}) returns the exact
// conditional mean of X_i given everything consumed so far.
class ConditionalOracle {
 public:
  virtual ~ConditionalOracle() = default;
  virtual double next(double observed) = 0;
};

class ConstantMeanOracle final : public ConditionalOracle {
 public:
  explicit ConstantMeanOracle(double mean) : mean_(mean) {}
  double next(double) override { return mean_; }

 private:
  double mean_;
};

class MarkovOracle final : public ConditionalOracle {
 public:
  explicit MarkovOracle(const MarkovSpec& spec) : spec_(spec) {
    row_means_.reserve(spec_.transition.size());
    for (const auto& row : spec_.transition) {
      double m = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j)
        m += row[j] * spec_.state_values[j];
      row_means_.push_back(m);
    }
  }
  double next(double observed) override {
    for (std::size_t i = 0; i < spec_.state_values.size(); ++i)
      if (spec_.state_values[i] == observed) return row_means_[i];
    throw DomainError("observed value is not in the state alphabet");
  }

 private:
  MarkovSpec spec_;
  std::vector<double> row_means_;
};

class HmmOracle final : public ConditionalOracle {
 public:
  explicit HmmOracle(const FunctionOfMarkovSpec& spec)
      : spec_(spec), predictive_(stationary_distribution(spec.chain.transition)) {}
  double next(double observed) override {
    if (observed != 0.0 && observed != 1.0)
      throw ConsistencyError("observation outside {0,1} has probability zero");
    const std::size_t s = spec_.distinguished_state;
    const auto& p = spec_.chain.transition;
    const std::size_t m = p.size();
    double mass = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if ((j == s) != (observed == 1.0)) predictive_[j] = 0.0;
      mass += predictive_[j];
    }
    if (mass <= 0.0)
      throw ConsistencyError("zero-probability observation history");
    std::vector<double> next_pred(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (predictive_[j] == 0.0) continue;
      const double w = predictive_[j] / mass;
      for (std::size_t t = 0; t < m; ++t) next_pred[t] += w * p[j][t];
    }
    predictive_ = std::move(next_pred);
    return predictive_[s];
  }

 private:
  FunctionOfMarkovSpec spec_;
  std::vector<double> predictive_;
};

class Ar1Oracle final : public ConditionalOracle {
 public:
  explicit Ar1Oracle(const Ar1Spec& spec) : a_(spec.a) {}
  double next(double observed) override { return a_ * observed; }

 private:
  double a_;
};

// Tracks the survivor set of initial prefixes consistent with the observed
// window; the conditional mean is the survivor average of f one step ahead.
class OdometerOracle final : public ConditionalOracle {
 public:
  explicit OdometerOracle(const OdometerSchedule& schedule)
      : schedule_(schedule) {
    const std::int64_t big = schedule_.ls.back();
    mask_ = (1ull << big) - 1;
    survivors_.resize(static_cast<std::size_t>(mask_) + 1);
    for (std::uint64_t m0 = 0; m0 <= mask_; ++m0)
      survivors_[static_cast<std::size_t>(m0)] = m0;
  }
  double next(double observed) override {
    std::size_t keep = 0;
    for (std::size_t i = 0; i < survivors_.size(); ++i) {
      const std::uint64_t m0 = survivors_[i];
      if (eval_f_low_bits((m0 + time_) & mask_, schedule_) == observed)
        survivors_[keep++] = m0;
    }
    survivors_.resize(keep);
    if (survivors_.empty())
      throw ConsistencyError("zero-probability observation history");
    ++time_;
    double sum = 0.0;
    for (const std::uint64_t m0 : survivors_)
      sum += eval_f_low_bits((m0 + time_) & mask_, schedule_);
    return sum / static_cast<double>(survivors_.size());
  }

 private:
  OdometerSchedule schedule_;
  std::uint64_t mask_ = 0;
  std::uint64_t time_ = 0;
  std::vector<std::uint64_t> survivors_;
};

std::unique_ptr<ConditionalOracle> make_oracle(const ProcessSpec& spec) {
  if (const auto* iid = std::get_if<IidSpec>(&spec)) {
    double mu = 0.0;
    for (std::size_t i = 0; i < iid->values.size(); ++i)
      mu += iid->values[i] * iid->probs[i];
    return std::make_unique<ConstantMeanOracle>(mu);
  }
  if (const auto* m = std::get_if<MarkovSpec>(&spec))
    return std::make_unique<MarkovOracle>(*m);
  if (const auto* f = std::get_if<FunctionOfMarkovSpec>(&spec))
    return std::make_unique<HmmOracle>(*f);
  if (const auto* ar = std::get_if<Ar1Spec>(&spec))
    return std::make_unique<Ar1Oracle>(*ar);
  if (const auto* o = std::get_if<OdometerRefSpec>(&spec)) {
    if (o->ls.empty()) return std::make_unique<ConstantMeanOracle>(0.0);
    if (o->ls.back() > kEnumerationCap)
      throw CapabilityError(
          "no exact oracle: odometer l_K exceeds the enumeration cap of 24");
    OdometerSchedule s;
    s.ls = o->ls;
    return std::make_unique<OdometerOracle>(s);
  }
  throw CapabilityError("no oracle for this process spec");
}

struct SeedSeries {
  std::vector<double> oracle_avgs;
  std::vector<double> realized_avgs;
};

SeedSeries run_one_seed(const ProcessSpec& spec, double p, std::int64_t horizon,
                        const std::vector<std::int64_t>& grid,
                        std::uint64_t seed) {
  ProcessPath path = sample_path(spec, horizon + 1, seed);
  auto oracle = make_oracle(spec);
  SequentialPredictor predictor;
  predictor.push(path.values[0]);
  double conditional_mean = oracle->next(path.values[0]);
  SeedSeries series;
  series.oracle_avgs.resize(grid.size(), 0.0);
  series.realized_avgs.resize(grid.size(), 0.0);
  double acc_oracle = 0.0;
  double acc_realized = 0.0;
  std::size_t gi = 0;
  for (std::int64_t i = 1; i <= horizon; ++i) {
    const double predicted = predictor.predict().value;
    const double realized = path.values[static_cast<std::size_t>(i)];
    acc_oracle += error_power(predicted - conditional_mean, p);
    acc_realized += error_power(predicted - realized, p);
    if (gi < grid.size() && grid[gi] == i) {
      series.oracle_avgs[gi] = acc_oracle / static_cast<double>(i);
      series.realized_avgs[gi] = acc_realized / static_cast<double>(i);
      ++gi;
    }
    if (i < horizon) {
      predictor.push(realized);
      conditional_mean = oracle->next(realized);
    }
  }
  return series;
}

double sorted_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

void format_double(char* buf, std::size_t cap, double v) {
  std::snprintf(buf, cap, "%.17g", v);
}

}  // namespace

std::vector<std::int64_t> time_grid(std::int64_t horizon) {
  if (horizon < 1) throw InputError("time_grid: horizon must be >= 1");
  std::vector<std::int64_t> grid;
  for (std::int64_t t = 1; t <= horizon && t > 0; t *= 2) grid.push_back(t);
  if (grid.empty() || grid.back() != horizon) grid.push_back(horizon);
  return grid;
}

CesaroReport evaluate(const ProcessSpec& spec, double p, std::int64_t horizon,
                      std::span<const std::uint64_t> seeds, int parallelism) {
  validate_spec(spec);
  if (!(p >= 1.0)) throw InputError("evaluate: p must be >= 1");
  if (horizon < 10) throw InputError("evaluate: horizon must be >= 10");
  if (seeds.empty()) throw InputError("evaluate: need at least one seed");
  make_oracle(spec);  // fail fast on capability holes before any long run
  CesaroReport report;
  report.spec = spec;
  report.p = p;
  report.grid = time_grid(horizon);
  report.seeds.assign(seeds.begin(), seeds.end());
  const std::size_t n = seeds.size();
  std::vector<SeedSeries> per_seed(n);
  std::vector<std::exception_ptr> failures(n);
  int workers = parallelism > 0
                    ? parallelism
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i)
      per_seed[i] = run_one_seed(spec, p, horizon, report.grid, seeds[i]);
  } else {
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= n) return;
        try {
          per_seed[i] = run_one_seed(spec, p, horizon, report.grid, seeds[i]);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& failure : failures)
      if (failure) std::rethrow_exception(failure);
  }
  report.err_vs_oracle.resize(n);
  report.err_vs_realized.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.err_vs_oracle[i] = std::move(per_seed[i].oracle_avgs);
    report.err_vs_realized[i] = std::move(per_seed[i].realized_avgs);
  }
  report.agg_err_vs_oracle.resize(report.grid.size());
  report.agg_err_vs_realized.resize(report.grid.size());
  std::vector<double> column(n);
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    for (std::size_t i = 0; i < n; ++i) column[i] = report.err_vs_oracle[i][g];
    report.agg_err_vs_oracle[g] = sorted_mean(column);
    for (std::size_t i = 0; i < n; ++i)
      column[i] = report.err_vs_realized[i][g];
    report.agg_err_vs_realized[g] = sorted_mean(column);
  }
  try {
    report.reference_limit = limit_reference(spec, p);
  } catch (const CapabilityError&) {
    report.reference_limit = std::nullopt;
  }
  return report;
}

double limit_reference(const ProcessSpec& spec, double p) {
  if (!(p >= 1.0)) throw InputError("limit_reference: p must be >= 1");
  if (const auto* iid = std::get_if<IidSpec>(&spec)) {
    double mu = 0.0;
    for (std::size_t i = 0; i < iid->values.size(); ++i)
      mu += iid->values[i] * iid->probs[i];
    double moment = 0.0;
    for (std::size_t i = 0; i < iid->values.size(); ++i)
      moment += iid->probs[i] * error_power(iid->values[i] - mu, p);
    return moment;
  }
  if (const auto* m = std::get_if<MarkovSpec>(&spec)) {
    auto sorted = m->state_values;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::vector<double>{0.0, 1.0})
      throw CapabilityError(
          "limit_reference: markov closed form requires state values {0,1}");
    std::size_t one = m->state_values[0] == 1.0 ? 0 : 1;
    auto pi = stationary_distribution(m->transition);
    double limit = 0.0;
    for (std::size_t s = 0; s < 2; ++s) {
      const double q = m->transition[s][one];
      limit += pi[s] * (q * error_power(1.0 - q, p) +
                        (1.0 - q) * error_power(q, p));
    }
    return limit;
  }
  if (const auto* ar = std::get_if<Ar1Spec>(&spec)) {
    const double abs_moment = std::pow(2.0, p / 2.0) *
                              std::tgamma((p + 1.0) / 2.0) /
                              std::sqrt(std::acos(-1.0));
    return std::pow(ar->sigma, p) * abs_moment;
  }
  throw CapabilityError("limit_reference: no closed form for this spec");
}

void write_report(const CesaroReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_report: cannot open " + path);
  out << "t,p,seed,err_vs_oracle,err_vs_realized,reference_limit\n";
  char a[40];
  char b[40];
  char c[40];
  char ref[40];
  ref[0] = '\0';
  if (report.reference_limit)
    format_double(ref, sizeof ref, *report.reference_limit);
  format_double(c, sizeof c, report.p);
  const std::string p_text = c;
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    for (std::size_t i = 0; i < report.seeds.size(); ++i) {
      format_double(a, sizeof a, report.err_vs_oracle[i][g]);
      format_double(b, sizeof b, report.err_vs_realized[i][g]);
      out << report.grid[g] << ',' << p_text << ',' << report.seeds[i] << ','
          << a << ',' << b << ',' << ref << '\n';
    }
    format_double(a, sizeof a, report.agg_err_vs_oracle[g]);
    format_double(b, sizeof b, report.agg_err_vs_realized[g]);
    out << report.grid[g] << ',' << p_text << ",agg," << a << ',' << b << ','
        << ref << '\n';
  }
  out.flush();
  if (!out) throw IoError("write_report: write failed for " + path);
}

std::vector<ReportRow> read_report_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_report_rows: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "t,p,seed,err_vs_oracle,err_vs_realized,reference_limit")
    throw InputError("read_report_rows: unexpected header in " + path);
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 6)
      throw InputError("read_report_rows: malformed row: " + line);
    ReportRow row;
    row.t = std::strtoll(fields[0].c_str(), nullptr, 10);
    row.p = std::strtod(fields[1].c_str(), nullptr);
    row.seed = fields[2];
    row.err_vs_oracle = std::strtod(fields[3].c_str(), nullptr);
    row.err_vs_realized = std::strtod(fields[4].c_str(), nullptr);
    if (!fields[5].empty())
      row.reference_limit = std::strtod(fields[5].c_str(), nullptr);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace seqpred
