#include "treesample/exact.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "treesample/errors.hpp"
#include "treesample/logmath.hpp"
#include "treesample/metrics.hpp"

namespace treesample {

namespace {

void check_cap(const FactorGraph& graph, std::uint64_t cap) {
  if (graph.domain_size() > cap)
    throw ResourceError("K^N = " + std::to_string(graph.domain_size()) +
                        " exceeds the exact-inference cap of " + std::to_string(cap));
}

// Advances a base-K odometer; the last digit moves fastest.
bool advance(std::vector<int>& digits, int base) {
  for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
    if (++digits[i] < base) return true;
    digits[i] = 0;
  }
  return false;
}

std::vector<double> all_log_densities(const FactorGraph& graph, std::uint64_t cap) {
  check_cap(graph, cap);
  std::vector<double> out;
  out.reserve(graph.domain_size());
  std::vector<int> x(graph.num_variables(), 0);
  do {
    out.push_back(log_unnormalized_density(graph, x));
  } while (advance(x, graph.num_states()));
  return out;
}

}  // namespace

ExactSolution::ExactSolution(int num_variables, int num_states,
                             std::vector<std::vector<double>> levels)
    : num_variables_(num_variables), num_states_(num_states), levels_(std::move(levels)) {
  log_z_ = logsumexp(levels_.at(0));
}

std::size_t ExactSolution::offset(std::span<const int> prefix) const {
  if (static_cast<int>(prefix.size()) >= num_variables_)
    throw InvalidInput("q_values needs a prefix shorter than N");
  std::size_t index = 0;
  for (int v : prefix) {
    if (v < 0 || v >= num_states_) throw InvalidInput("state value out of range");
    index = index * num_states_ + v;
  }
  return index * num_states_;
}

std::span<const double> ExactSolution::q_values(std::span<const int> prefix) const {
  const std::size_t at = offset(prefix);
  return std::span<const double>(levels_[prefix.size()]).subspan(at, num_states_);
}

double ExactSolution::value(std::span<const int> prefix) const {
  if (static_cast<int>(prefix.size()) == num_variables_) return 0.0;
  return logsumexp(q_values(prefix));
}

std::vector<double> ExactSolution::conditional(std::span<const int> prefix) const {
  const auto q = q_values(prefix);
  const double v = logsumexp(q);
  std::vector<double> out(q.size(), 0.0);
  if (v == kNegInf) return out;
  for (std::size_t a = 0; a < q.size(); ++a) out[a] = std::exp(q[a] - v);
  return out;
}

double ExactSolution::log_probability(std::span<const int> x) const {
  if (static_cast<int>(x.size()) != num_variables_)
    throw InvalidInput("log_probability needs a complete configuration");
  double total = 0.0;
  for (int n = 0; n < num_variables_; ++n) {
    const auto q = q_values(x.first(n));
    const double v = logsumexp(q);
    if (v == kNegInf || q[x[n]] == kNegInf) return kNegInf;
    total += q[x[n]] - v;
  }
  return total;
}

ExactSolution solve_exact(const FactorGraph& graph, std::uint64_t cap) {
  check_cap(graph, cap);
  const int n_vars = graph.num_variables();
  const int k = graph.num_states();
  std::vector<std::vector<double>> levels(n_vars);
  std::size_t width = 1;
  for (int n = 0; n < n_vars; ++n) {
    width *= k;
    levels[n].assign(width, 0.0);
  }
  // Backward over levels; only level n + 1 is read while filling level n.
  for (int n = n_vars - 1; n >= 0; --n) {
    std::vector<int> prefix(n + 1, 0);
    std::vector<double>& level = levels[n];
    std::size_t idx = 0;
    do {
      const double r = reward(graph, prefix);
      double q = r;
      if (n + 1 < n_vars) {
        const std::span<const double> children(levels[n + 1].data() + idx * k, k);
        q = extended_add(r, logsumexp(children));
      }
      level[idx++] = q;
    } while (advance(prefix, k));
  }
  return ExactSolution(n_vars, k, std::move(levels));
}

TargetStats brute_force_stats(const FactorGraph& graph, std::uint64_t cap) {
  const auto log_densities = all_log_densities(graph, cap);
  const double log_z = logsumexp(log_densities);
  if (log_z == kNegInf) throw ZeroMassError("target has zero total mass");
  double energy = 0.0;
  for (double lp : log_densities) energy += weighted_log(std::exp(lp - log_z), lp);
  return {log_z, energy, log_z - energy};
}

std::vector<std::vector<double>> brute_force_marginals(const FactorGraph& graph,
                                                       std::uint64_t cap) {
  const auto log_densities = all_log_densities(graph, cap);
  const double log_z = logsumexp(log_densities);
  if (log_z == kNegInf) throw ZeroMassError("target has zero total mass");
  const int n_vars = graph.num_variables();
  std::vector<std::vector<double>> marginals(n_vars, std::vector<double>(graph.num_states(), 0.0));
  std::vector<int> x(n_vars, 0);
  std::size_t idx = 0;
  do {
    const double p = std::exp(log_densities[idx++] - log_z);
    for (int d = 0; d < n_vars; ++d) marginals[graph.variable_at(d)][x[d]] += p;
  } while (advance(x, graph.num_states()));
  return marginals;
}

bool is_chain(const FactorGraph& graph) {
  for (const Factor& f : graph.factors()) {
    if (f.scope.size() > 2) return false;
    if (f.scope.size() == 2 &&
        std::abs(graph.position_of(f.scope[0]) - graph.position_of(f.scope[1])) != 1)
      return false;
  }
  return true;
}

std::optional<std::vector<int>> chain_ordering(const FactorGraph& graph) {
  if (is_chain(graph)) return std::vector<int>(graph.ordering().begin(), graph.ordering().end());
  const int n = graph.num_variables();
  std::vector<std::vector<int>> adj(n);
  for (const Factor& f : graph.factors()) {
    if (f.scope.size() > 2) return std::nullopt;
    if (f.scope.size() == 2) {
      auto& a = adj[f.scope[0]];
      if (std::find(a.begin(), a.end(), f.scope[1]) != a.end()) continue;
      a.push_back(f.scope[1]);
      adj[f.scope[1]].push_back(f.scope[0]);
    }
  }
  for (const auto& a : adj)
    if (a.size() > 2) return std::nullopt;
  std::vector<int> order;
  std::vector<std::uint8_t> seen(n, 0);
  auto walk = [&](int start) {
    int prev = -1;
    for (int v = start; v >= 0;) {
      seen[v] = 1;
      order.push_back(v);
      int next = -1;
      for (int u : adj[v])
        if (u != prev && !seen[u]) next = u;
      prev = v;
      v = next;
    }
  };
  for (int v = 0; v < n; ++v)
    if (!seen[v] && adj[v].size() < 2) walk(v);
  // Anything left lies on a cycle.
  if (static_cast<int>(order.size()) != n) return std::nullopt;
  return order;
}

std::vector<double> ChainSolution::conditional(std::span<const int> prefix, int num_states) const {
  const std::size_t d = prefix.size();
  std::vector<double> out(num_states);
  for (int b = 0; b < num_states; ++b) {
    const double lp = d == 0 ? log_conditionals[0][b]
                             : log_conditionals[d][prefix[d - 1] * num_states + b];
    out[b] = std::exp(lp);
  }
  return out;
}

ChainSolution solve_chain(const FactorGraph& graph) {
  if (!is_chain(graph)) throw InvalidInput("graph is not chain-structured under its ordering");
  const int n_vars = graph.num_variables();
  const int k = graph.num_states();
  const std::size_t kk = static_cast<std::size_t>(k) * k;

  // unary[d][b], pair[d][a * K + b] between depth d - 1 and d.
  std::vector<std::vector<double>> unary(n_vars, std::vector<double>(k, 0.0));
  std::vector<std::vector<double>> pair(n_vars, std::vector<double>(kk, 0.0));
  for (const Factor& f : graph.factors()) {
    if (f.scope.size() == 1) {
      auto& u = unary[graph.position_of(f.scope[0])];
      for (int b = 0; b < k; ++b) u[b] = extended_add(u[b], f.log_table[b]);
      continue;
    }
    const int p0 = graph.position_of(f.scope[0]);
    const int p1 = graph.position_of(f.scope[1]);
    const int d = std::max(p0, p1);
    const bool forward = p0 < p1;  // scope order matches depth order
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        const double v = forward ? f.log_table[a * k + b] : f.log_table[b * k + a];
        pair[d][a * k + b] = extended_add(pair[d][a * k + b], v);
      }
  }

  std::vector<std::vector<double>> beta(n_vars, std::vector<double>(k, 0.0));
  std::vector<double> terms(k);
  for (int d = n_vars - 1; d >= 1; --d) {
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b)
        terms[b] = extended_add(extended_add(pair[d][a * k + b], unary[d][b]), beta[d][b]);
      beta[d - 1][a] = logsumexp(terms);
    }
  }

  ChainSolution out;
  for (int b = 0; b < k; ++b) terms[b] = extended_add(unary[0][b], beta[0][b]);
  out.log_z = logsumexp(terms);
  if (out.log_z == kNegInf) throw ZeroMassError("chain target has zero total mass");

  out.log_conditionals.assign(n_vars, {});
  out.log_conditionals[0].resize(k);
  for (int b = 0; b < k; ++b) out.log_conditionals[0][b] = terms[b] - out.log_z;
  for (int d = 1; d < n_vars; ++d) {
    auto& table = out.log_conditionals[d];
    table.assign(kk, kNegInf);
    for (int a = 0; a < k; ++a) {
      if (beta[d - 1][a] == kNegInf) continue;
      for (int b = 0; b < k; ++b) {
        const double num = extended_add(extended_add(pair[d][a * k + b], unary[d][b]), beta[d][b]);
        table[a * k + b] = num == kNegInf ? kNegInf : num - beta[d - 1][a];
      }
    }
  }

  std::vector<std::vector<double>> alpha(n_vars, std::vector<double>(k, 0.0));
  alpha[0] = unary[0];
  for (int d = 1; d < n_vars; ++d)
    for (int b = 0; b < k; ++b) {
      for (int a = 0; a < k; ++a) terms[a] = extended_add(alpha[d - 1][a], pair[d][a * k + b]);
      alpha[d][b] = extended_add(unary[d][b], logsumexp(terms));
    }

  out.marginals.assign(n_vars, std::vector<double>(k, 0.0));
  double energy = 0.0;
  for (int d = 0; d < n_vars; ++d) {
    auto& marginal = out.marginals[graph.variable_at(d)];
    for (int b = 0; b < k; ++b) {
      const double lp = extended_add(alpha[d][b], beta[d][b]);
      marginal[b] = lp == kNegInf ? 0.0 : std::exp(lp - out.log_z);
      energy += weighted_log(marginal[b], unary[d][b]);
    }
    if (d == 0) continue;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        const double lp = extended_add(
            extended_add(extended_add(alpha[d - 1][a], pair[d][a * k + b]), unary[d][b]),
            beta[d][b]);
        const double p = lp == kNegInf ? 0.0 : std::exp(lp - out.log_z);
        energy += weighted_log(p, pair[d][a * k + b]);
      }
  }
  out.expected_energy = energy;
  out.entropy = out.log_z - energy;
  return out;
}

double exact_kl(const WeightedAtoms& approx, const FactorGraph& graph, double log_z) {
  const double delta = delta_kl_atoms(approx, graph);
  return delta == kPosInf ? kPosInf : delta + log_z;
}

Estimate exact_kl(const Sampler& approx, const FactorGraph& graph, double log_z,
                  std::size_t num_samples, std::uint64_t seed) {
  Estimate delta = delta_kl_sampler(approx, graph, num_samples, seed);
  if (delta.mean != kPosInf) delta.mean += log_z;
  return delta;
}

std::string exact_to_json(double log_z, const std::vector<std::vector<double>>& marginals) {
  nlohmann::ordered_json doc;
  doc["log_z"] = log_z;
  if (!marginals.empty()) doc["marginals"] = marginals;
  return doc.dump();
}

}  // namespace treesample
