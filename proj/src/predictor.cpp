#include "seqpred/predictor.hpp"

#include <cmath>

#include "seqpred/errors.hpp"
#include "seqpred/quantizer.hpp"

namespace seqpred {

namespace {

// Signed cell id matching same_cell semantics: magnitude floor(|x| 2^k),
// sign attached only when the magnitude is nonzero (the center cell is
// shared). Returns false when the id would leave the exact integer range.
bool try_cell_id(double x, std::int64_t level, std::int64_t& out) {
  if (level > 62) return false;
  double scaled = std::ldexp(std::fabs(x), static_cast<int>(level));
  if (scaled >= kMaxQuantizerIndex) return false;
  auto m = static_cast<std::int64_t>(std::floor(scaled));
  out = (x < 0.0 && m > 0) ? -m : m;
  return true;
}

std::int64_t find_tau_direct(std::span<const double> w, std::int64_t lambda,
                             std::int64_t level) {
  const auto t = static_cast<std::int64_t>(w.size());
  for (std::int64_t s = 1; s + lambda <= t; ++s) {
    bool match = true;
    for (std::int64_t j = 0; j < lambda; ++j) {
      if (!same_cell(w[t - 1 - j], w[t - 1 - s - j], level)) {
        match = false;
        break;
      }
    }
    if (match) return s;
  }
  return 0;
}

std::int64_t find_tau_cells(const std::int64_t* q, std::int64_t t,
                            std::int64_t lambda) {
  for (std::int64_t s = 1; s + lambda <= t; ++s) {
    bool match = true;
    for (std::int64_t j = 0; j < lambda; ++j) {
      if (q[t - 1 - j] != q[t - 1 - s - j]) {
        match = false;
        break;
      }
    }
    if (match) return s;
  }
  return 0;
}

Prediction make_prediction(RecurrenceTrace trace) {
  Prediction p;
  if (trace.kappa == 0) {
    p.value = 0.0;
    p.fallback_used = true;
  } else {
    double sum = 0.0;
    for (double v : trace.picked_values) sum += v;
    p.value = sum / static_cast<double>(trace.kappa);
    p.fallback_used = false;
  }
  p.trace = std::move(trace);
  return p;
}

}  // namespace

RecurrenceTrace compute_recurrence_trace(std::span<const double> window) {
  if (window.empty())
    throw InputError("compute_recurrence_trace: window must be nonempty");
  const auto t = static_cast<std::int64_t>(window.size());
  RecurrenceTrace trace;
  trace.lambdas.push_back(1);
  std::int64_t lambda = 1;
  for (std::int64_t level = 1;; ++level) {
    std::int64_t tau = find_tau_direct(window, lambda, level);
    if (tau == 0) break;
    lambda += tau;
    trace.taus.push_back(tau);
    trace.lambdas.push_back(lambda);
    trace.picked_values.push_back(window[t - tau]);
  }
  trace.kappa = static_cast<std::int64_t>(trace.taus.size());
  return trace;
}

Prediction backward_estimate(std::span<const double> window) {
  return make_prediction(compute_recurrence_trace(window));
}

Prediction forward_predict(std::span<const double> history) {
  return make_prediction(compute_recurrence_trace(history));
}

double r_k_infinite(PastAccessor& past, int k, std::int64_t depth_cap) {
  if (k < 1) throw InputError("r_k_infinite: k must be >= 1");
  if (depth_cap < 1) throw InputError("r_k_infinite: depth cap must be >= 1");
  std::vector<double> buf;  // buf[m-1] holds the sample at position -m
  auto sample = [&](std::int64_t m) {
    if (m > depth_cap) throw DepthError("r_k_infinite: depth cap exceeded");
    while (static_cast<std::int64_t>(buf.size()) < m)
      buf.push_back(past.at_negative(static_cast<std::int64_t>(buf.size()) + 1));
    return buf[m - 1];
  };
  std::int64_t lambda = 1;
  double sum = 0.0;
  for (int level = 1; level <= k; ++level) {
    std::int64_t tau = 0;
    for (std::int64_t s = 1;; ++s) {
      if (lambda + s > depth_cap)
        throw DepthError("r_k_infinite: depth cap exceeded");
      bool match = true;
      for (std::int64_t j = 0; j < lambda; ++j) {
        if (!same_cell(sample(1 + j), sample(1 + s + j), level)) {
          match = false;
          break;
        }
      }
      if (match) {
        tau = s;
        break;
      }
    }
    sum += sample(tau);
    lambda += tau;
  }
  return sum / static_cast<double>(k);
}

void SequentialPredictor::push(double x) { history_.push_back(x); }

bool SequentialPredictor::ensure_cells(std::int64_t level) const {
  if (level > kMaxQuantizerLevel) return false;
  auto idx = static_cast<std::size_t>(level - 1);
  if (cells_.size() <= idx) {
    cells_.resize(idx + 1);
    cell_level_ok_.resize(idx + 1, 1);
  }
  if (!cell_level_ok_[idx]) return false;
  auto& col = cells_[idx];
  while (col.size() < history_.size()) {
    std::int64_t id = 0;
    if (!try_cell_id(history_[col.size()], level, id)) {
      cell_level_ok_[idx] = 0;
      col.clear();
      return false;
    }
    col.push_back(id);
  }
  return true;
}

Prediction SequentialPredictor::predict() const {
  if (history_.empty())
    throw InputError("SequentialPredictor::predict: no history yet");
  const auto t = static_cast<std::int64_t>(history_.size());
  RecurrenceTrace trace;
  trace.lambdas.push_back(1);
  std::int64_t lambda = 1;
  for (std::int64_t level = 1;; ++level) {
    std::int64_t tau =
        ensure_cells(level)
            ? find_tau_cells(cells_[static_cast<std::size_t>(level - 1)].data(),
                             t, lambda)
            : find_tau_direct(history_, lambda, level);
    if (tau == 0) break;
    lambda += tau;
    trace.taus.push_back(tau);
    trace.lambdas.push_back(lambda);
    trace.picked_values.push_back(history_[t - tau]);
  }
  trace.kappa = static_cast<std::int64_t>(trace.taus.size());
  return make_prediction(std::move(trace));
}

}  // namespace seqpred
