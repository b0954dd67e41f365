#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqpred/processes.hpp"
#include "seqpred/rng.hpp"

namespace seqpred {

// Enumeration oracles materialize all 2^{l_K} bit prefixes; beyond this cap
// they refuse rather than approximate.
inline constexpr std::int64_t kEnumerationCap = 24;
// Largest l_K the evaluator accepts: 2^l must stay a finite double with
// headroom for the 3^{-a} factor.
inline constexpr std::int64_t kMaxScheduleL = 600;

// Splits k >= 3 uniquely as k = 2^a + b with 1 <= b <= 2^a.
std::pair<std::int64_t, std::int64_t> ak_bk(int k);

// The level sequence l_3 < l_4 < ... < l_K. Entry ls[0] belongs to k = 3.
struct OdometerSchedule {
  std::vector<std::int64_t> ls;
  int k_min() const { return 3; }
  int k_max() const { return 2 + static_cast<int>(ls.size()); }
  std::int64_t l(int k) const;
};

struct ScheduleViolation {
  int k = 0;
  int k_prime = 0;  // 0 for single-index constraints
  std::string message;
};

// Empty result means the schedule satisfies every separation and
// positivity constraint.
std::vector<ScheduleViolation> validate_schedule(const OdometerSchedule& s);

// One-sided fair-coin bit sequence, 1-based, sampled lazily and immutable
// once sampled. Bit i is always the i-th draw from the stream, so values do
// not depend on query order. A preset prefix pins the first bits exactly.
class BitTape {
 public:
  explicit BitTape(std::uint64_t seed) : rng_(seed) {}
  BitTape(std::vector<std::uint8_t> prefix, std::uint64_t tail_seed)
      : bits_(std::move(prefix)), rng_(tail_seed) {}
  std::uint8_t bit(std::int64_t i);
  std::int64_t extended_to() const {
    return static_cast<std::int64_t>(bits_.size());
  }

 private:
  std::vector<std::uint8_t> bits_;
  RngStream rng_;
};

// A point of the odometer orbit: the underlying tape plus how many times
// the add-one map has been applied. Reading bits resolves the addition with
// carry on demand, so the semigroup law holds exactly.
struct OdometerState {
  std::shared_ptr<BitTape> tape;
  std::uint64_t shift = 0;

  // Bits 1..len of the represented sequence, least significant first.
  std::vector<std::uint8_t> prefix(std::int64_t len) const;
  // Value of bits 1..len as an integer; len <= 63.
  std::uint64_t prefix_value(std::int64_t len) const;
};

OdometerState make_odometer_state(std::uint64_t seed);
OdometerState state_from_bits(std::vector<std::uint8_t> bits,
                              std::uint64_t tail_seed = 0);
OdometerState apply_T(const OdometerState& state, std::uint64_t n);

enum class OdoSet { C, D, E };

bool membership(const OdometerState& state, OdoSet which, int k,
                const OdometerSchedule& s);

// f = u + v with u = sum over scheduled k of 10^{-k} on D_k and v = sum of
// (2^{l_k}/3^{a_k}) on C_k. Depends only on bits 1..l_K.
double eval_f(const OdometerState& state, const OdometerSchedule& s);

// Same function evaluated on the integer formed by bits 1..l_K; requires
// l_K <= 63. This is the hot path for enumeration and path sampling, and it
// is bit-identical to eval_f by construction.
double eval_f_low_bits(std::uint64_t m, const OdometerSchedule& s);

// Shared value helpers so every evaluation path produces identical doubles.
double c_term(std::int64_t l, std::int64_t a);  // 2^l / 3^a
double d_term(int k);                           // 10^-k

// Exact expectations of the truncated u and v components.
double truncated_expected_u(const OdometerSchedule& s);
double truncated_expected_v(const OdometerSchedule& s);

// X_j = f(T^j omega) with omega drawn as i.i.d. fair bits.
ProcessPath sample_odometer_path(const OdometerSchedule& s, std::int64_t n,
                                 std::uint64_t seed);

// Enumerates all 2^{l_K} prefixes, keeps those whose generated window
// equals `observed` exactly, and averages f at time m over the survivors.
double brute_force_conditional_mean(const OdometerSchedule& s,
                                    std::span<const double> observed,
                                    std::int64_t m);

// Conditional mean of X at the special time of a level-k certificate, given
// the observed window: the window pins bits 1..l_k-1 and leaves the rest
// fair, which yields 2^{l_k-1} * sum_{j>=k} 3^{-a_j} plus the signal terms
// sum_{j>k} 10^{-j} 2^{l_k-l_j}.
double closed_form_window_conditional(const OdometerSchedule& s, int k);

struct DivergenceCertificate {
  int k = 0;
  std::int64_t a_k = 0;
  std::int64_t l_k = 0;
  std::uint64_t seed_used = 0;
  int attempts = 0;
  std::int64_t i0 = 0;
  std::int64_t special_time = 0;
  double window_conditional = 0.0;   // enumerated
  double window_closed_form = 0.0;   // recomputed independently
  double full_past_value = 0.0;      // realized f at the special time
  double cesaro_value = 0.0;         // |difference| / 2^{l_k - a_k}
  double bound = 0.0;                // (1/6)(4/3)^{a_k}
  double slack = 0.0;
  bool pass = false;
};

// Searches seeds seed, seed+1, ... for a realization in E_k (budget
// 2^{a_k+6} attempts), locates the D_k hitting time i0, and certifies the
// gap between the window-conditional and full-past-conditional values at
// the special time i0 + 2^{l_k-a_k-1}.
DivergenceCertificate divergence_certificate(const OdometerSchedule& s, int k,
                                             std::uint64_t seed,
                                             double slack = 0.1);

// Black-box prediction scheme h_m: history of length m -> prediction.
class Scheme {
 public:
  virtual ~Scheme() = default;
  virtual double predict(std::span<const double> history) const = 0;
  virtual std::string name() const = 0;
};

// Named baselines: zero, sample_mean, last_value.
std::unique_ptr<Scheme> make_scheme(std::string_view name);

class CallbackScheme : public Scheme {
 public:
  CallbackScheme(std::string name,
                 std::function<double(std::span<const double>)> fn)
      : name_(std::move(name)), fn_(std::move(fn)) {}
  double predict(std::span<const double> history) const override {
    return fn_(history);
  }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  std::function<double(std::span<const double>)> fn_;
};

struct AdversaryParams {
  int k_max = 5;
  std::int64_t horizon = 4096;  // per-seed simulation length when estimating N_k
  int num_seeds = 256;
  std::int64_t l_cap = kMaxScheduleL;
  std::uint64_t seed = 1;
};

struct AdversaryStage {
  int k = 0;
  std::int64_t n_k = 0;  // estimated quiet time for the H_k event
  std::int64_t l_k = 0;
};

struct AdversaryResult {
  OdometerSchedule schedule;
  std::vector<AdversaryStage> stages;
};

// Stage k simulates the process truncated at k-1, estimates the smallest
// N_k beyond which |h_m| <= m/10 holds with empirical confidence 1 - 2^-k,
// then picks the minimal l_k satisfying 2^{l_k - a_k} > 10 N_k, the growth
// constraint l_k - a_k > 10 l_{k-1}, and the separation constraints.
AdversaryResult build_adversarial_schedule(const Scheme& scheme,
                                           const AdversaryParams& params);

struct SchemeCertificate {
  int k = 0;
  std::int64_t a_k = 0;
  std::int64_t l_k = 0;
  std::uint64_t seed_used = 0;
  int attempts = 0;
  std::int64_t i0 = 0;
  std::int64_t special_time = 0;
  double window_conditional = 0.0;  // closed form
  double scheme_value = 0.0;        // h at the special time
  double cesaro_value = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool pass = false;
};

// Divergence certificate against a black-box scheme: same E-hit and special
// time as divergence_certificate, window conditional from the closed form
// (schedules built against schemes are far beyond the enumeration cap), and
// the scheme's own prediction in place of the full-past value.
SchemeCertificate certify_scheme(const OdometerSchedule& s, int k,
                                 const Scheme& scheme, std::uint64_t seed,
                                 double slack = 0.1);

}  // namespace seqpred
