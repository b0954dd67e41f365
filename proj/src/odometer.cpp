#include "seqpred/odometer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "seqpred/errors.hpp"

namespace seqpred {

namespace {

double pow3(std::int64_t a) {
  double r = 1.0;
  for (std::int64_t i = 0; i < a; ++i) r *= 3.0;
  return r;
}

std::uint64_t low_mask(std::int64_t width) {
  return width >= 64 ? ~0ull : (1ull << width) - 1;
}

std::string num(std::int64_t v) { return std::to_string(v); }

}  // namespace

std::pair<std::int64_t, std::int64_t> ak_bk(int k) {
  if (k < 3) throw InputError("ak_bk: k must be >= 3");
  std::int64_t a = 1;
  while ((std::int64_t{1} << (a + 1)) < k) ++a;
  return {a, k - (std::int64_t{1} << a)};
}

std::int64_t OdometerSchedule::l(int k) const {
  if (k < k_min() || k > k_max())
    throw InputError("schedule has no l_" + num(k));
  return ls[static_cast<std::size_t>(k - 3)];
}

std::vector<ScheduleViolation> validate_schedule(const OdometerSchedule& s) {
  std::vector<ScheduleViolation> out;
  for (int k = s.k_min(); k <= s.k_max(); ++k) {
    std::int64_t l = s.ls[static_cast<std::size_t>(k - 3)];
    auto [a, b] = ak_bk(k);
    if (l < 1)
      out.push_back({k, 0, "l_" + num(k) + " = " + num(l) + " must be >= 1"});
    else if (l - a < 1)
      out.push_back({k, 0,
                     "l_" + num(k) + " - a_" + num(k) + " = " + num(l - a) +
                         " must be >= 1"});
  }
  for (int k = s.k_min(); k <= s.k_max(); ++k) {
    for (int kp = k + 1; kp <= s.k_max(); ++kp) {
      auto [ap, bp] = ak_bk(kp);
      std::int64_t lk = s.ls[static_cast<std::size_t>(k - 3)];
      std::int64_t lp = s.ls[static_cast<std::size_t>(kp - 3)];
      if (!(lk < lp - 2 * ap))
        out.push_back({k, kp,
                       "l_" + num(k) + " = " + num(lk) + " must be < l_" +
                           num(kp) + " - 2 a_" + num(kp) + " = " +
                           num(lp - 2 * ap)});
    }
  }
  return out;
}

std::uint8_t BitTape::bit(std::int64_t i) {
  if (i < 1) throw InputError("BitTape::bit: positions are 1-based");
  while (static_cast<std::int64_t>(bits_.size()) < i)
    bits_.push_back(rng_.next_bit() ? 1 : 0);
  return bits_[static_cast<std::size_t>(i - 1)];
}

std::vector<std::uint8_t> OdometerState::prefix(std::int64_t len) const {
  if (len < 0) throw InputError("OdometerState::prefix: negative length");
  if (!tape) throw InputError("OdometerState::prefix: empty state");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(len));
  unsigned __int128 carry = shift;
  std::int64_t produced = 0;
  while (produced < len) {
    const int width = static_cast<int>(std::min<std::int64_t>(64, len - produced));
    std::uint64_t chunk = 0;
    for (int j = 0; j < width; ++j)
      chunk |= static_cast<std::uint64_t>(tape->bit(produced + j + 1)) << j;
    unsigned __int128 sum = static_cast<unsigned __int128>(chunk) + carry;
    const auto low = static_cast<std::uint64_t>(sum);
    for (int j = 0; j < width; ++j)
      out[static_cast<std::size_t>(produced + j)] = (low >> j) & 1u;
    carry = sum >> width;
    produced += width;
  }
  return out;
}

std::uint64_t OdometerState::prefix_value(std::int64_t len) const {
  if (len < 0 || len > 63)
    throw InputError("OdometerState::prefix_value: length must be in [0, 63]");
  auto bits = prefix(len);
  std::uint64_t v = 0;
  for (std::int64_t i = 0; i < len; ++i)
    v |= static_cast<std::uint64_t>(bits[static_cast<std::size_t>(i)]) << i;
  return v;
}

OdometerState make_odometer_state(std::uint64_t seed) {
  return {std::make_shared<BitTape>(seed), 0};
}

OdometerState state_from_bits(std::vector<std::uint8_t> bits,
                              std::uint64_t tail_seed) {
  for (auto b : bits)
    if (b != 0 && b != 1)
      throw InputError("state_from_bits: bits must be 0 or 1");
  return {std::make_shared<BitTape>(std::move(bits), tail_seed), 0};
}

OdometerState apply_T(const OdometerState& state, std::uint64_t n) {
  if (!state.tape) throw InputError("apply_T: empty state");
  if (n > ~std::uint64_t{0} - state.shift)
    throw RangeError("apply_T: accumulated shift overflows");
  return {state.tape, state.shift + n};
}

bool membership(const OdometerState& state, OdoSet which, int k,
                const OdometerSchedule& s) {
  const std::int64_t l = s.l(k);
  auto [a, b] = ak_bk(k);
  if (l - a < 1)
    throw InputError("membership: schedule has l_k - a_k < 1 at k=" + num(k));
  auto bits = state.prefix(l);
  auto all_ones = [&](std::int64_t from, std::int64_t to) {
    for (std::int64_t i = from; i <= to; ++i)
      if (!bits[static_cast<std::size_t>(i - 1)]) return false;
    return true;
  };
  switch (which) {
    case OdoSet::C:
      return all_ones(1, l - 1) && bits[static_cast<std::size_t>(l - 1)] == 0;
    case OdoSet::D:
      return all_ones(1, l - a - 1) &&
             bits[static_cast<std::size_t>(l - a - 1)] == 0 &&
             all_ones(l - a + 1, l - 1);
    case OdoSet::E:
      return bits[static_cast<std::size_t>(l - a - 1)] == 0 &&
             all_ones(l - a + 1, l - 1);
  }
  throw InputError("membership: unknown set");
}

double c_term(std::int64_t l, std::int64_t a) {
  return std::ldexp(1.0, static_cast<int>(l)) / pow3(a);
}

double d_term(int k) {
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= 10.0;
  return 1.0 / p;
}

double eval_f(const OdometerState& state, const OdometerSchedule& s) {
  if (s.ls.empty()) return 0.0;
  const std::int64_t L = s.ls.back();
  if (L > kMaxScheduleL)
    throw RangeError("eval_f: l_K exceeds the evaluator cap");
  auto bits = state.prefix(L);
  auto all_ones = [&](std::int64_t from, std::int64_t to) {
    for (std::int64_t i = from; i <= to; ++i)
      if (!bits[static_cast<std::size_t>(i - 1)]) return false;
    return true;
  };
  double f = 0.0;
  for (int k = s.k_min(); k <= s.k_max(); ++k) {
    const std::int64_t l = s.l(k);
    auto [a, b] = ak_bk(k);
    if (all_ones(1, l - a - 1) && bits[static_cast<std::size_t>(l - a - 1)] == 0 &&
        all_ones(l - a + 1, l - 1))
      f += d_term(k);
    if (all_ones(1, l - 1) && bits[static_cast<std::size_t>(l - 1)] == 0)
      f += c_term(l, a);
  }
  return f;
}

double eval_f_low_bits(std::uint64_t m, const OdometerSchedule& s) {
  if (s.ls.empty()) return 0.0;
  if (s.ls.back() > 63)
    throw RangeError("eval_f_low_bits: requires l_K <= 63");
  double f = 0.0;
  for (int k = s.k_min(); k <= s.k_max(); ++k) {
    const std::int64_t l = s.l(k);
    auto [a, b] = ak_bk(k);
    const std::uint64_t body = low_mask(l - 1);
    if ((m & body) == body - (1ull << (l - a - 1))) f += d_term(k);
    if ((m & low_mask(l)) == body) f += c_term(l, a);
  }
  return f;
}

double truncated_expected_u(const OdometerSchedule& s) {
  double e = 0.0;
  for (int k = s.k_min(); k <= s.k_max(); ++k)
    e += d_term(k) * std::ldexp(1.0, static_cast<int>(1 - s.l(k)));
  return e;
}

double truncated_expected_v(const OdometerSchedule& s) {
  double e = 0.0;
  for (int k = s.k_min(); k <= s.k_max(); ++k) {
    auto [a, b] = ak_bk(k);
    e += c_term(s.l(k), a) * std::ldexp(1.0, static_cast<int>(-s.l(k)));
  }
  return e;
}

ProcessPath sample_odometer_path(const OdometerSchedule& s, std::int64_t n,
                                 std::uint64_t seed) {
  if (n < 1) throw InputError("sample_odometer_path: n must be >= 1");
  auto violations = validate_schedule(s);
  if (!violations.empty())
    throw InputError("sample_odometer_path: " + violations.front().message);
  ProcessPath path;
  path.spec = OdometerRefSpec{s.ls};
  path.seed = seed;
  path.values.reserve(static_cast<std::size_t>(n));
  if (s.ls.empty()) {
    path.values.assign(static_cast<std::size_t>(n), 0.0);
    return path;
  }
  const std::int64_t L = s.ls.back();
  if (L <= 63) {
    BitTape tape(seed);
    std::uint64_t m0 = 0;
    for (std::int64_t i = 1; i <= L; ++i)
      m0 |= static_cast<std::uint64_t>(tape.bit(i)) << (i - 1);
    const std::uint64_t mask = low_mask(L);
    for (std::int64_t j = 0; j < n; ++j)
      path.values.push_back(
          eval_f_low_bits((m0 + static_cast<std::uint64_t>(j)) & mask, s));
  } else {
    if (L > kMaxScheduleL)
      throw RangeError("sample_odometer_path: l_K exceeds the evaluator cap");
    auto state = make_odometer_state(seed);
    for (std::int64_t j = 0; j < n; ++j)
      path.values.push_back(
          eval_f(apply_T(state, static_cast<std::uint64_t>(j)), s));
  }
  return path;
}

double brute_force_conditional_mean(const OdometerSchedule& s,
                                    std::span<const double> observed,
                                    std::int64_t m) {
  auto violations = validate_schedule(s);
  if (!violations.empty())
    throw InputError("brute_force_conditional_mean: " +
                     violations.front().message);
  if (m < 0 || m != static_cast<std::int64_t>(observed.size()))
    throw InputError(
        "brute_force_conditional_mean: horizon must equal observed length");
  if (s.ls.empty())
    throw InputError("brute_force_conditional_mean: empty schedule");
  const std::int64_t L = s.ls.back();
  if (L > kEnumerationCap)
    throw RangeError("brute_force_conditional_mean: l_K exceeds the "
                     "enumeration cap of 24");
  const std::uint64_t count = 1ull << L;
  const std::uint64_t mask = count - 1;
  double sum = 0.0;
  std::uint64_t survivors = 0;
  for (std::uint64_t m0 = 0; m0 < count; ++m0) {
    bool ok = true;
    for (std::int64_t j = 0; j < m; ++j) {
      if (eval_f_low_bits((m0 + static_cast<std::uint64_t>(j)) & mask, s) !=
          observed[static_cast<std::size_t>(j)]) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    ++survivors;
    sum += eval_f_low_bits((m0 + static_cast<std::uint64_t>(m)) & mask, s);
  }
  if (survivors == 0)
    throw ConsistencyError(
        "brute_force_conditional_mean: no prefix reproduces the window");
  return sum / static_cast<double>(survivors);
}

double closed_form_window_conditional(const OdometerSchedule& s, int k) {
  const std::int64_t l = s.l(k);
  double v = 0.0;
  for (int j = k; j <= s.k_max(); ++j) {
    auto [aj, bj] = ak_bk(j);
    v += c_term(l - 1, aj);
  }
  for (int j = k + 1; j <= s.k_max(); ++j)
    v += d_term(j) * std::ldexp(1.0, static_cast<int>(l - s.l(j)));
  return v;
}

namespace {

struct EHit {
  OdometerState state;
  std::uint64_t seed_used = 0;
  int attempts = 0;
  std::int64_t i0 = 0;
  std::int64_t special_time = 0;
};

EHit find_e_hit(const OdometerSchedule& s, int k, std::uint64_t seed) {
  auto [a, b] = ak_bk(k);
  const std::int64_t l = s.l(k);
  const int budget = 1 << std::min<std::int64_t>(a + 6, 20);
  EHit hit;
  bool found = false;
  for (int i = 0; i < budget; ++i) {
    hit.seed_used = seed + static_cast<std::uint64_t>(i);
    hit.state = make_odometer_state(hit.seed_used);
    hit.attempts = i + 1;
    if (membership(hit.state, OdoSet::E, k, s)) {
      found = true;
      break;
    }
  }
  if (!found)
    throw SearchError("no E_" + num(k) + " hit within " + num(budget) +
                      " seed attempts");
  if (l - a - 1 > 30)
    throw CapabilityError(
        "special time 2^{l_k - a_k - 1} is beyond the desk horizon");
  const std::uint64_t block = hit.state.prefix_value(l - a - 1);
  hit.i0 = static_cast<std::int64_t>(((1ull << (l - a - 1)) - 1) - block);
  if (!membership(apply_T(hit.state, static_cast<std::uint64_t>(hit.i0)),
                  OdoSet::D, k, s))
    throw ConsistencyError("divergence certificate: D_k hitting time mismatch");
  hit.special_time = hit.i0 + static_cast<std::int64_t>(1ull << (l - a - 1));
  return hit;
}

void require_valid(const OdometerSchedule& s, const char* who) {
  auto violations = validate_schedule(s);
  if (!violations.empty())
    throw InputError(std::string(who) + ": " + violations.front().message);
}

}  // namespace

DivergenceCertificate divergence_certificate(const OdometerSchedule& s, int k,
                                             std::uint64_t seed, double slack) {
  require_valid(s, "divergence_certificate");
  auto [a, b] = ak_bk(k);
  const std::int64_t l = s.l(k);
  const std::int64_t L = s.ls.back();
  if (L > kEnumerationCap)
    throw RangeError(
        "divergence_certificate: l_K exceeds the enumeration cap of 24");
  EHit hit = find_e_hit(s, k, seed);
  const std::uint64_t mask = low_mask(L);
  const std::uint64_t m0 = hit.state.prefix_value(L);
  std::vector<double> observed;
  observed.reserve(static_cast<std::size_t>(hit.special_time));
  for (std::int64_t j = 0; j < hit.special_time; ++j)
    observed.push_back(
        eval_f_low_bits((m0 + static_cast<std::uint64_t>(j)) & mask, s));
  DivergenceCertificate cert;
  cert.k = k;
  cert.a_k = a;
  cert.l_k = l;
  cert.seed_used = hit.seed_used;
  cert.attempts = hit.attempts;
  cert.i0 = hit.i0;
  cert.special_time = hit.special_time;
  cert.window_conditional =
      brute_force_conditional_mean(s, observed, hit.special_time);
  cert.window_closed_form = closed_form_window_conditional(s, k);
  cert.full_past_value = eval_f_low_bits(
      (m0 + static_cast<std::uint64_t>(hit.special_time)) & mask, s);
  cert.cesaro_value =
      std::fabs(cert.window_conditional - cert.full_past_value) /
      std::ldexp(1.0, static_cast<int>(l - a));
  cert.bound = std::ldexp(1.0, static_cast<int>(2 * a)) / (6.0 * pow3(a));
  cert.slack = slack;
  cert.pass = cert.cesaro_value >= (1.0 - slack) * cert.bound;
  return cert;
}

std::unique_ptr<Scheme> make_scheme(std::string_view name) {
  if (name == "zero")
    return std::make_unique<CallbackScheme>(
        "zero", [](std::span<const double>) { return 0.0; });
  if (name == "sample_mean")
    return std::make_unique<CallbackScheme>(
        "sample_mean", [](std::span<const double> h) {
          if (h.empty()) return 0.0;
          double sum = 0.0;
          for (double v : h) sum += v;
          return sum / static_cast<double>(h.size());
        });
  if (name == "last_value")
    return std::make_unique<CallbackScheme>(
        "last_value",
        [](std::span<const double> h) { return h.empty() ? 0.0 : h.back(); });
  throw InputError("unknown scheme: " + std::string(name));
}

AdversaryResult build_adversarial_schedule(const Scheme& scheme,
                                           const AdversaryParams& params) {
  if (params.k_max < 3)
    throw InputError("build_adversarial_schedule: k_max must be >= 3");
  if (params.horizon < 10)
    throw InputError("build_adversarial_schedule: horizon must be >= 10");
  if (params.num_seeds < 1)
    throw InputError("build_adversarial_schedule: num_seeds must be >= 1");
  AdversaryResult result;
  std::int64_t l_prev = 0;
  for (int k = 3; k <= params.k_max; ++k) {
    auto [a, b] = ak_bk(k);
    std::vector<std::int64_t> last_violation(
        static_cast<std::size_t>(params.num_seeds), 0);
    for (int i = 0; i < params.num_seeds; ++i) {
      const std::uint64_t stage_seed = params.seed +
                                       1000003ull * static_cast<std::uint64_t>(k) +
                                       static_cast<std::uint64_t>(i);
      ProcessPath path =
          sample_odometer_path(result.schedule, params.horizon, stage_seed);
      std::int64_t lv = 0;
      for (std::int64_t m = 1; m <= params.horizon; ++m) {
        double h = scheme.predict(
            std::span<const double>(path.values.data(), static_cast<std::size_t>(m)));
        if (std::fabs(h) > static_cast<double>(m) / 10.0) lv = m;
      }
      last_violation[static_cast<std::size_t>(i)] = lv;
    }
    std::sort(last_violation.begin(), last_violation.end());
    const double confidence = 1.0 - std::ldexp(1.0, -k);
    auto rank = static_cast<std::size_t>(
        std::ceil(confidence * static_cast<double>(params.num_seeds)));
    rank = std::min(std::max<std::size_t>(rank, 1), last_violation.size());
    const std::int64_t quiet_after = last_violation[rank - 1];
    if (quiet_after >= params.horizon)
      throw BudgetError("build_adversarial_schedule: the scheme still "
                        "violates |h_m| <= m/10 at the simulation horizon");
    const std::int64_t n_k = quiet_after + 1;
    const auto growth = static_cast<std::int64_t>(
        std::bit_width(static_cast<std::uint64_t>(10 * n_k)));
    const std::int64_t l_k =
        std::max({a + growth, 10 * l_prev + a + 1, l_prev + 2 * a + 1, a + 1});
    if (l_k > params.l_cap)
      throw BudgetError("build_adversarial_schedule: required l_" + num(k) +
                        " = " + num(l_k) + " exceeds the cap " +
                        num(params.l_cap));
    result.schedule.ls.push_back(l_k);
    result.stages.push_back({k, n_k, l_k});
    l_prev = l_k;
  }
  require_valid(result.schedule, "build_adversarial_schedule result");
  return result;
}

SchemeCertificate certify_scheme(const OdometerSchedule& s, int k,
                                 const Scheme& scheme, std::uint64_t seed,
                                 double slack) {
  require_valid(s, "certify_scheme");
  auto [a, b] = ak_bk(k);
  const std::int64_t l = s.l(k);
  if (!s.ls.empty() && s.ls.back() > kMaxScheduleL)
    throw RangeError("certify_scheme: l_K exceeds the evaluator cap");
  EHit hit = find_e_hit(s, k, seed);
  std::vector<double> observed;
  observed.reserve(static_cast<std::size_t>(hit.special_time));
  for (std::int64_t j = 0; j < hit.special_time; ++j)
    observed.push_back(
        eval_f(apply_T(hit.state, static_cast<std::uint64_t>(j)), s));
  SchemeCertificate cert;
  cert.k = k;
  cert.a_k = a;
  cert.l_k = l;
  cert.seed_used = hit.seed_used;
  cert.attempts = hit.attempts;
  cert.i0 = hit.i0;
  cert.special_time = hit.special_time;
  cert.window_conditional = closed_form_window_conditional(s, k);
  cert.scheme_value = scheme.predict(observed);
  cert.cesaro_value =
      std::fabs(cert.window_conditional - cert.scheme_value) /
      std::ldexp(1.0, static_cast<int>(l - a));
  cert.bound = std::ldexp(1.0, static_cast<int>(2 * a)) / (6.0 * pow3(a));
  cert.slack = slack;
  cert.pass = cert.cesaro_value >= (1.0 - slack) * cert.bound;
  return cert;
}

}  // namespace seqpred
