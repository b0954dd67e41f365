#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace seqpred {

// One run of the recurrence recursion on a data window. Positions are
// counted from the right edge: the last sample is position -1. taus[j-1]
// holds tau_j, lambdas holds lambda_0 = 1 through lambda_kappa, and
// picked_values[j-1] is the sample at position -tau_j.
struct RecurrenceTrace {
  std::vector<std::int64_t> taus;
  std::vector<std::int64_t> lambdas;
  std::int64_t kappa = 0;
  std::vector<double> picked_values;
};

struct Prediction {
  double value = 0.0;
  bool fallback_used = false;
  RecurrenceTrace trace;
};

// Greedy recursion: at level k, tau_k is the smallest back-shift at which
// the level-k quantized suffix of length lambda_{k-1} recurs, subject to
// lambda_k = lambda_{k-1} + tau_k fitting in the window. Stops at the first
// level with no admissible recurrence.
RecurrenceTrace compute_recurrence_trace(std::span<const double> window);

// Mean of the picked values; 0.0 with fallback_used when kappa = 0.
Prediction backward_estimate(std::span<const double> window);

// Same computation read as a prediction of the next sample after the
// history array.
Prediction forward_predict(std::span<const double> history);

// Supplies samples at negative time for the idealized estimator:
// at_negative(m) returns the sample at position -m, m >= 1. Implementations
// generate lazily but must return stable values across repeated calls.
class PastAccessor {
 public:
  virtual ~PastAccessor() = default;
  virtual double at_negative(std::int64_t m) = 0;
};

inline constexpr std::int64_t kDefaultDepthCap = 10'000'000;

// Idealized k-level backward estimator on a two-sided path: runs the
// recursion without a window bound, pulling as much past as the recurrence
// search demands, and averages the k picked values. Throws DepthError once
// the search would touch positions beyond depth_cap.
double r_k_infinite(PastAccessor& past, int k,
                    std::int64_t depth_cap = kDefaultDepthCap);

// Incremental wrapper for long forward runs: push samples one at a time and
// predict the next. Maintains per-level integer cell caches so repeated
// predictions avoid requantizing the whole history; results are exactly
// equal to forward_predict on the accumulated history.
class SequentialPredictor {
 public:
  void push(double x);
  Prediction predict() const;
  std::int64_t size() const { return static_cast<std::int64_t>(history_.size()); }
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
  // cells_[k-1][i] is the level-k cell id of history_[i]; a level whose
  // ids would not be exactly representable falls back to direct comparison.
  mutable std::vector<std::vector<std::int64_t>> cells_;
  mutable std::vector<char> cell_level_ok_;
  bool ensure_cells(std::int64_t level) const;
};

}  // namespace seqpred
