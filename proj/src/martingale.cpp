#include "seqpred/martingale.hpp"

#include <algorithm>
#include <cmath>

#include "seqpred/errors.hpp"
#include "seqpred/harness.hpp"
#include "seqpred/quantizer.hpp"

namespace seqpred {

namespace {

constexpr int kHeavyTailMaxExponent = 50;

const std::vector<double>& heavy_tail_weights() {
  static const std::vector<double> weights = [] {
    std::vector<double> w;
    w.reserve(kHeavyTailMaxExponent);
    for (int j = 1; j <= kHeavyTailMaxExponent; ++j)
      w.push_back(std::ldexp(1.0, -j) / (static_cast<double>(j) * j * j));
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    return w;
  }();
  return weights;
}

bool known_generator(const std::string& name) {
  return name == "zero" || name == "fair_coin" || name == "uniform" ||
         name == "pareto" || name == "heavy_quantized";
}

}  // namespace

void validate_martingale_spec(const MartingaleSpec& spec) {
  if (!known_generator(spec.generator))
    throw InputError("unknown martingale generator: " + spec.generator);
  if (spec.generator == "pareto") {
    if (!(spec.pareto_alpha > 1.0))
      throw InputError("pareto generator needs alpha > 1 for a finite mean");
    if (!(spec.moment_p < spec.pareto_alpha))
      throw InputError(
          "pareto generator has no finite p-th moment unless p < alpha");
  }
  if (!(spec.moment_p > 1.0))
    throw InputError("martingale spec needs moment_p > 1");
}

double martingale_difference(const MartingaleSpec& spec, RngStream& rng) {
  if (spec.generator == "zero") return 0.0;
  if (spec.generator == "fair_coin") return rng.next_bit() ? 1.0 : -1.0;
  if (spec.generator == "uniform") return rng.next_uniform01() - 0.5;
  if (spec.generator == "pareto") {
    const double sign = rng.next_bit() ? 1.0 : -1.0;
    const double u = rng.next_uniform01();
    return sign * std::pow(1.0 - u, -1.0 / spec.pareto_alpha);
  }
  if (spec.generator == "heavy_quantized") {
    const auto& weights = heavy_tail_weights();
    const int j = 1 + static_cast<int>(rng.next_index(weights));
    const double sign = rng.next_bit() ? 1.0 : -1.0;
    const double x = sign * std::ldexp(1.0, j);
    return dequantize(quantize(x, 0));
  }
  throw InputError("unknown martingale generator: " + spec.generator);
}

std::vector<AverageTrajectory> simulate_running_averages(
    const MartingaleSpec& spec, std::int64_t n_max,
    std::span<const std::uint64_t> seeds) {
  validate_martingale_spec(spec);
  if (n_max < 100)
    throw InputError("simulate_running_averages: n_max must be >= 100");
  if (seeds.empty())
    throw InputError("simulate_running_averages: need at least one seed");
  const std::vector<std::int64_t> grid = time_grid(n_max);
  std::vector<AverageTrajectory> trajectories;
  trajectories.reserve(seeds.size());
  for (const std::uint64_t seed : seeds) {
    RngStream rng(seed);
    AverageTrajectory traj;
    traj.seed = seed;
    traj.grid = grid;
    traj.averages.resize(grid.size(), 0.0);
    double sum = 0.0;
    double sup = 0.0;
    std::size_t gi = 0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
      sum += martingale_difference(spec, rng);
      const double avg = sum / static_cast<double>(n);
      sup = std::max(sup, std::fabs(avg));
      if (gi < grid.size() && grid[gi] == n) {
        traj.averages[gi] = avg;
        ++gi;
      }
    }
    traj.final_average = traj.averages.back();
    traj.sup_abs_average = sup;
    trajectories.push_back(std::move(traj));
  }
  return trajectories;
}

SupEstimate estimate_sup_average(const MartingaleSpec& spec,
                                 std::int64_t n_max,
                                 std::span<const std::uint64_t> seeds,
                                 double p) {
  if (!(p >= 1.0)) throw InputError("estimate_sup_average: p must be >= 1");
  const auto trajectories = simulate_running_averages(spec, n_max, seeds);
  std::vector<double> powered;
  powered.reserve(trajectories.size());
  for (const auto& traj : trajectories)
    powered.push_back(p == 1.0 ? traj.sup_abs_average
                               : std::pow(traj.sup_abs_average, p));
  std::sort(powered.begin(), powered.end());
  double sum = 0.0;
  for (double v : powered) sum += v;
  const double n = static_cast<double>(powered.size());
  SupEstimate est;
  est.num_seeds = powered.size();
  est.estimate = sum / n;
  if (powered.size() > 1) {
    double ss = 0.0;
    for (double v : powered) ss += (v - est.estimate) * (v - est.estimate);
    est.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return est;
}

}  // namespace seqpred
