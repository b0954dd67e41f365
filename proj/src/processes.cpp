#include "seqpred/processes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <queue>

#include "seqpred/errors.hpp"
#include "seqpred/odometer.hpp"
#include "seqpred/rng.hpp"

namespace seqpred {

namespace {

void check_probability_vector(std::span<const double> p, const char* what) {
  if (p.empty()) throw InputError(std::string(what) + ": empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw InputError(std::string(what) + ": negative entry");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw InputError(std::string(what) + ": entries do not sum to 1");
}

std::vector<std::vector<std::size_t>> positive_edges(
    const std::vector<std::vector<double>>& matrix) {
  std::vector<std::vector<std::size_t>> adj(matrix.size());
  for (std::size_t i = 0; i < matrix.size(); ++i)
    for (std::size_t j = 0; j < matrix[i].size(); ++j)
      if (matrix[i][j] > 0.0) adj[i].push_back(j);
  return adj;
}

std::vector<char> reachable_from(
    const std::vector<std::vector<std::size_t>>& adj, std::size_t start) {
  std::vector<char> seen(adj.size(), 0);
  std::queue<std::size_t> q;
  seen[start] = 1;
  q.push(start);
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    for (auto v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        q.push(v);
      }
  }
  return seen;
}

bool strongly_connected(const std::vector<std::vector<std::size_t>>& adj) {
  auto fwd = reachable_from(adj, 0);
  if (std::find(fwd.begin(), fwd.end(), 0) != fwd.end()) return false;
  std::vector<std::vector<std::size_t>> rev(adj.size());
  for (std::size_t u = 0; u < adj.size(); ++u)
    for (auto v : adj[u]) rev[v].push_back(u);
  auto bwd = reachable_from(rev, 0);
  return std::find(bwd.begin(), bwd.end(), 0) == bwd.end();
}

// Period of an irreducible chain: gcd over all edges of the BFS level
// defect level[u] + 1 - level[v]; the chain is aperiodic iff this is 1.
std::int64_t chain_period(const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<std::int64_t> level(adj.size(), -1);
  std::queue<std::size_t> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    for (auto v : adj[u])
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
  }
  std::int64_t g = 0;
  for (std::size_t u = 0; u < adj.size(); ++u)
    for (auto v : adj[u]) g = std::gcd(g, std::llabs(level[u] + 1 - level[v]));
  return g == 0 ? std::int64_t{1} : g;
}

void check_transition_matrix(const std::vector<std::vector<double>>& matrix) {
  if (matrix.empty()) throw InputError("transition matrix: empty");
  for (const auto& row : matrix) {
    if (row.size() != matrix.size())
      throw InputError("transition matrix: not square");
    check_probability_vector(row, "transition matrix row");
  }
  auto adj = positive_edges(matrix);
  if (!strongly_connected(adj))
    throw StructureError("transition matrix: chain is reducible");
  if (chain_period(adj) != 1)
    throw StructureError("transition matrix: chain is periodic");
}

void check_markov(const MarkovSpec& m, bool require_distinct_values) {
  check_transition_matrix(m.transition);
  if (m.state_values.size() != m.transition.size())
    throw InputError("markov spec: state value count does not match matrix");
  if (require_distinct_values) {
    auto vals = m.state_values;
    std::sort(vals.begin(), vals.end());
    if (std::adjacent_find(vals.begin(), vals.end()) != vals.end())
      throw InputError("markov spec: state values must be distinct");
  }
}

std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                 std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-14)
      throw StructureError("stationary distribution: singular system");
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

std::size_t state_index(const MarkovSpec& m, double value) {
  for (std::size_t i = 0; i < m.state_values.size(); ++i)
    if (m.state_values[i] == value) return i;
  throw DomainError("history value is not in the state alphabet");
}

double iid_mean(const IidSpec& s) {
  double mu = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i)
    mu += s.values[i] * s.probs[i];
  return mu;
}

}  // namespace

std::string spec_name(const ProcessSpec& spec) {
  struct Visitor {
    std::string operator()(const IidSpec&) const { return "iid"; }
    std::string operator()(const MarkovSpec&) const { return "markov"; }
    std::string operator()(const FunctionOfMarkovSpec&) const {
      return "function_of_markov";
    }
    std::string operator()(const Ar1Spec&) const { return "ar1"; }
    std::string operator()(const OdometerRefSpec&) const { return "odometer"; }
  };
  return std::visit(Visitor{}, spec);
}

void validate_spec(const ProcessSpec& spec) {
  if (const auto* iid = std::get_if<IidSpec>(&spec)) {
    if (iid->values.size() != iid->probs.size())
      throw InputError("iid spec: value and probability counts differ");
    check_probability_vector(iid->probs, "iid probabilities");
    for (double v : iid->values)
      if (!std::isfinite(v)) throw InputError("iid spec: non-finite value");
  } else if (const auto* m = std::get_if<MarkovSpec>(&spec)) {
    check_markov(*m, true);
    for (double v : m->state_values)
      if (!std::isfinite(v)) throw InputError("markov spec: non-finite value");
  } else if (const auto* f = std::get_if<FunctionOfMarkovSpec>(&spec)) {
    check_markov(f->chain, false);
    if (f->distinguished_state >= f->chain.transition.size())
      throw InputError("function_of_markov spec: state index out of range");
  } else if (const auto* ar = std::get_if<Ar1Spec>(&spec)) {
    if (!(std::fabs(ar->a) < 1.0))
      throw InputError("ar1 spec: coefficient must satisfy |a| < 1");
    if (!(ar->sigma > 0.0) || !std::isfinite(ar->sigma))
      throw InputError("ar1 spec: sigma must be positive and finite");
  } else if (const auto* o = std::get_if<OdometerRefSpec>(&spec)) {
    OdometerSchedule s;
    s.ls = o->ls;
    auto violations = validate_schedule(s);
    if (!violations.empty())
      throw InputError("odometer spec: " + violations.front().message);
  }
}

std::vector<double> stationary_distribution(
    const std::vector<std::vector<double>>& matrix) {
  check_transition_matrix(matrix);
  const std::size_t n = matrix.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      a[i][j] = matrix[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0;
  b[n - 1] = 1.0;
  auto pi = solve_linear(std::move(a), std::move(b));
  double sum = 0.0;
  for (double& v : pi) {
    if (v < 0.0 && v > -1e-12) v = 0.0;
    sum += v;
  }
  for (double& v : pi) v /= sum;
  return pi;
}

ProcessPath sample_path(const ProcessSpec& spec, std::int64_t n,
                        std::uint64_t seed) {
  if (n < 1) throw InputError("sample_path: n must be >= 1");
  validate_spec(spec);
  if (const auto* o = std::get_if<OdometerRefSpec>(&spec)) {
    OdometerSchedule s;
    s.ls = o->ls;
    return sample_odometer_path(s, n, seed);
  }
  ProcessPath path;
  path.spec = spec;
  path.seed = seed;
  path.values.reserve(static_cast<std::size_t>(n));
  RngStream rng(seed);
  if (const auto* iid = std::get_if<IidSpec>(&spec)) {
    for (std::int64_t i = 0; i < n; ++i)
      path.values.push_back(iid->values[rng.next_index(iid->probs)]);
  } else if (const auto* m = std::get_if<MarkovSpec>(&spec)) {
    auto pi = stationary_distribution(m->transition);
    std::size_t state = rng.next_index(pi);
    path.values.push_back(m->state_values[state]);
    for (std::int64_t i = 1; i < n; ++i) {
      state = rng.next_index(m->transition[state]);
      path.values.push_back(m->state_values[state]);
    }
  } else if (const auto* f = std::get_if<FunctionOfMarkovSpec>(&spec)) {
    auto pi = stationary_distribution(f->chain.transition);
    path.hidden.reserve(static_cast<std::size_t>(n));
    std::size_t state = rng.next_index(pi);
    path.hidden.push_back(state);
    path.values.push_back(state == f->distinguished_state ? 1.0 : 0.0);
    for (std::int64_t i = 1; i < n; ++i) {
      state = rng.next_index(f->chain.transition[state]);
      path.hidden.push_back(state);
      path.values.push_back(state == f->distinguished_state ? 1.0 : 0.0);
    }
  } else if (const auto* ar = std::get_if<Ar1Spec>(&spec)) {
    double x = rng.next_normal() * ar->sigma / std::sqrt(1.0 - ar->a * ar->a);
    path.values.push_back(x);
    for (std::int64_t i = 1; i < n; ++i) {
      x = ar->a * x + ar->sigma * rng.next_normal();
      path.values.push_back(x);
    }
  }
  return path;
}

double markov_conditional_mean(const ProcessSpec& spec,
                               std::span<const double> history) {
  if (const auto* iid = std::get_if<IidSpec>(&spec)) {
    for (double v : history) {
      bool known = false;
      for (double w : iid->values) known = known || (w == v);
      if (!known) throw DomainError("history value is not in the alphabet");
    }
    return iid_mean(*iid);
  }
  if (const auto* m = std::get_if<MarkovSpec>(&spec)) {
    if (history.empty())
      throw InputError("markov_conditional_mean: history must be nonempty");
    for (double v : history) state_index(*m, v);
    std::size_t state = state_index(*m, history.back());
    double mean = 0.0;
    for (std::size_t j = 0; j < m->state_values.size(); ++j)
      mean += m->transition[state][j] * m->state_values[j];
    return mean;
  }
  throw InputError("markov_conditional_mean: spec must be iid or markov");
}

double hmm_filter_conditional_mean(const FunctionOfMarkovSpec& spec,
                                   std::span<const double> history) {
  check_markov(spec.chain, false);
  if (spec.distinguished_state >= spec.chain.transition.size())
    throw InputError("function_of_markov spec: state index out of range");
  const std::size_t s = spec.distinguished_state;
  const auto& p = spec.chain.transition;
  const std::size_t m = p.size();
  // predictive[j] is the probability of hidden state j at the next
  // unobserved time, given everything consumed so far.
  std::vector<double> predictive = stationary_distribution(p);
  std::vector<double> next(m, 0.0);
  for (double obs : history) {
    if (obs != 0.0 && obs != 1.0)
      throw ConsistencyError("observation outside {0,1} has probability zero");
    double mass = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      bool emits = (j == s) == (obs == 1.0);
      if (!emits) predictive[j] = 0.0;
      mass += predictive[j];
    }
    if (mass <= 0.0)
      throw ConsistencyError("zero-probability observation history");
    for (std::size_t j = 0; j < m; ++j) predictive[j] /= mass;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (predictive[j] == 0.0) continue;
      for (std::size_t t = 0; t < m; ++t) next[t] += predictive[j] * p[j][t];
    }
    predictive = next;
  }
  return predictive[s];
}

double hmm_enumeration_conditional_mean(const FunctionOfMarkovSpec& spec,
                                        std::span<const double> history) {
  check_markov(spec.chain, false);
  const std::size_t s = spec.distinguished_state;
  const auto& p = spec.chain.transition;
  const std::size_t m = p.size();
  const std::size_t steps = history.size();
  if (steps > 16)
    throw RangeError("hmm enumeration: history too long for exhaustion");
  auto pi = stationary_distribution(p);
  double numerator = 0.0;
  double denominator = 0.0;
  // Walk all hidden paths of length steps+1 with an odometer-style counter.
  std::vector<std::size_t> path(steps + 1, 0);
  while (true) {
    double w = pi[path[0]];
    for (std::size_t j = 1; j <= steps && w > 0.0; ++j)
      w *= p[path[j - 1]][path[j]];
    if (w > 0.0) {
      bool consistent = true;
      for (std::size_t j = 0; j < steps; ++j) {
        bool emits_one = path[j] == s;
        if (emits_one != (history[j] == 1.0)) {
          consistent = false;
          break;
        }
      }
      if (consistent) {
        denominator += w;
        if (path[steps] == s) numerator += w;
      }
    }
    std::size_t pos = 0;
    while (pos <= steps && ++path[pos] == m) {
      path[pos] = 0;
      ++pos;
    }
    if (pos > steps) break;
  }
  if (denominator <= 0.0)
    throw ConsistencyError("zero-probability observation history");
  return numerator / denominator;
}

double ar1_conditional_mean(const Ar1Spec& spec,
                            std::span<const double> history) {
  if (history.empty())
    throw InputError("ar1_conditional_mean: history must be nonempty");
  return spec.a * history.back();
}

}  // namespace seqpred
