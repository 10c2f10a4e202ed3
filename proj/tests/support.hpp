#pragma once

// Independent reference computations for tests. Nothing here calls the
// library's own inference code; the helpers recompute everything from the
// factor tables by direct enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "treesample/model.hpp"

namespace testing {

using treesample::Assignment;
using treesample::Factor;
using treesample::FactorGraph;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Random graph: one unary factor per variable plus `extra` factors over
/// random scopes of size 1..max_scope. Entries are N(0, 1), and with
/// probability neg_inf_prob an entry is -inf.
inline FactorGraph random_graph(int n, int k, std::uint64_t seed, int extra = 3, int max_scope = 3,
                                double neg_inf_prob = 0.0, bool shuffle_ordering = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto table = [&](std::size_t arity) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < arity; ++i) size *= k;
    std::vector<double> t(size);
    for (double& v : t) v = unit(rng) < neg_inf_prob ? kNegInf : normal(rng);
    return t;
  };
  std::vector<Factor> factors;
  for (int v = 0; v < n; ++v) factors.push_back(Factor{{v}, table(1)});
  std::uniform_int_distribution<int> arity_dist(1, std::max(1, std::min(max_scope, n)));
  for (int e = 0; e < extra; ++e) {
    const int arity = arity_dist(rng);
    std::vector<int> vars(n);
    for (int v = 0; v < n; ++v) vars[v] = v;
    std::shuffle(vars.begin(), vars.end(), rng);
    std::vector<int> scope(vars.begin(), vars.begin() + arity);
    std::sort(scope.begin(), scope.end());
    factors.push_back(Factor{scope, table(arity)});
  }
  std::vector<int> ordering;
  if (shuffle_ordering) {
    ordering.resize(n);
    for (int v = 0; v < n; ++v) ordering[v] = v;
    std::shuffle(ordering.begin(), ordering.end(), rng);
  }
  return FactorGraph(n, k, std::move(factors), ordering);
}

/// All K^N configurations, indexed by variable, in lexicographic order.
inline std::vector<Assignment> all_configurations(int n, int k) {
  std::vector<Assignment> out;
  Assignment x(n, 0);
  while (true) {
    out.push_back(x);
    int i = n - 1;
    while (i >= 0 && ++x[i] == k) x[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

/// sum_m psi_m(x) for x indexed by variable, by explicit row-major indexing.
inline double direct_log_density(const FactorGraph& g, const Assignment& x_by_var) {
  double total = 0.0;
  for (const Factor& f : g.factors()) {
    std::size_t idx = 0;
    for (int v : f.scope) idx = idx * g.num_states() + x_by_var[v];
    const double val = f.log_table[idx];
    if (val == kNegInf) return kNegInf;
    total += val;
  }
  return total;
}

inline double direct_log_z(const FactorGraph& g) {
  double max = kNegInf;
  std::vector<double> vals;
  for (const auto& x : all_configurations(g.num_variables(), g.num_states())) {
    vals.push_back(direct_log_density(g, x));
    max = std::max(max, vals.back());
  }
  if (max == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : vals) s += std::exp(v - max);
  return max + std::log(s);
}

/// Target probabilities over all_configurations order.
inline std::vector<double> direct_probabilities(const FactorGraph& g) {
  const double lz = direct_log_z(g);
  std::vector<double> p;
  for (const auto& x : all_configurations(g.num_variables(), g.num_states()))
    p.push_back(std::exp(direct_log_density(g, x) - lz));
  return p;
}

/// Marginals [variable][state] by enumeration.
inline std::vector<std::vector<double>> direct_marginals(const FactorGraph& g) {
  std::vector<std::vector<double>> m(g.num_variables(), std::vector<double>(g.num_states(), 0.0));
  const auto configs = all_configurations(g.num_variables(), g.num_states());
  const auto p = direct_probabilities(g);
  for (std::size_t i = 0; i < configs.size(); ++i)
    for (int v = 0; v < g.num_variables(); ++v) m[v][configs[i][v]] += p[i];
  return m;
}

/// P*(x_{ordering[d]} = . | depth-ordered prefix of length d) by enumeration.
inline std::vector<double> direct_conditional(const FactorGraph& g, const Assignment& prefix) {
  std::vector<double> mass(g.num_states(), 0.0);
  const double lz = direct_log_z(g);
  const std::size_t d = prefix.size();
  for (const auto& x : all_configurations(g.num_variables(), g.num_states())) {
    bool match = true;
    for (std::size_t i = 0; i < d && match; ++i) match = x[g.variable_at(static_cast<int>(i))] == prefix[i];
    if (!match) continue;
    mass[x[g.variable_at(static_cast<int>(d))]] += std::exp(direct_log_density(g, x) - lz);
  }
  double total = 0.0;
  for (double m : mass) total += m;
  for (double& m : mass) m /= total;
  return mass;
}

/// Random chain in identity ordering: unary factors and consecutive pairs.
inline FactorGraph random_chain(int n, int k, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<Factor> factors;
  for (int v = 0; v < n; ++v) {
    Factor f{{v}, std::vector<double>(k)};
    for (double& t : f.log_table) t = normal(rng);
    factors.push_back(std::move(f));
  }
  for (int v = 0; v + 1 < n; ++v) {
    Factor f{{v, v + 1}, std::vector<double>(static_cast<std::size_t>(k) * k)};
    for (double& t : f.log_table) t = normal(rng);
    factors.push_back(std::move(f));
  }
  return FactorGraph(n, k, std::move(factors));
}

/// All factors identically zero: one unary zero table per variable.
inline FactorGraph zero_graph(int n, int k) {
  std::vector<Factor> factors;
  for (int v = 0; v < n; ++v) factors.push_back(Factor{{v}, std::vector<double>(k, 0.0)});
  return FactorGraph(n, k, std::move(factors));
}

}  // namespace testing
