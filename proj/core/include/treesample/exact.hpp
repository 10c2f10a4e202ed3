#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treesample/distribution.hpp"
#include "treesample/model.hpp"

namespace treesample {

inline constexpr std::uint64_t kDefaultExactCap = 10'000'000;

/// Optimal soft-Bellman state-action values for every prefix of a graph.
///
/// q_values(x) for a prefix of length n < N is the K-vector
/// Q*_{n+1}(. | x) = R_{n+1}(x . a) + V*_{n+2}(x . a), and
/// value(x) = logsumexp of it. The target conditional of the next variable is
/// softmax(q_values(x)).
class ExactSolution {
 public:
  ExactSolution(int num_variables, int num_states, std::vector<std::vector<double>> levels);

  double log_z() const { return log_z_; }
  int num_variables() const { return num_variables_; }
  int num_states() const { return num_states_; }

  std::span<const double> q_values(std::span<const int> prefix) const;
  /// V*(prefix); 0 for a complete configuration.
  double value(std::span<const int> prefix) const;
  /// Probabilities of the next variable given the prefix.
  std::vector<double> conditional(std::span<const int> prefix) const;
  /// log gamma*(x) for a complete configuration.
  double log_probability(std::span<const int> x) const;

 private:
  std::size_t offset(std::span<const int> prefix) const;

  int num_variables_;
  int num_states_;
  // levels_[n] holds Q*_{n+1}(a | x_{<=n}) at index index(x_{<=n}) * K + a.
  std::vector<std::vector<double>> levels_;
  double log_z_;
};

/// Backward soft-Bellman dynamic programming over the full prefix tree.
/// Throws ResourceError when K^N exceeds the cap.
ExactSolution solve_exact(const FactorGraph& graph, std::uint64_t cap = kDefaultExactCap);

/// Summary statistics of the target distribution.
struct TargetStats {
  double log_z;
  double expected_energy;  // E_{P*}[sum psi]
  double entropy;          // H[P*]
};

/// log Z, E[sum psi] and H by direct enumeration of all K^N configurations.
TargetStats brute_force_stats(const FactorGraph& graph, std::uint64_t cap = kDefaultExactCap);
/// Per-variable marginals by direct enumeration.
std::vector<std::vector<double>> brute_force_marginals(const FactorGraph& graph,
                                                       std::uint64_t cap = kDefaultExactCap);

/// True when every factor has at most two scope variables and every pairwise
/// factor joins variables at adjacent ordering positions.
bool is_chain(const FactorGraph& graph);

/// A variable ordering under which the graph is a chain, if one exists: the
/// pairwise factors must form a disjoint union of paths. Prefers the graph's
/// own ordering when it already qualifies.
std::optional<std::vector<int>> chain_ordering(const FactorGraph& graph);

/// Linear-time forward-backward solution of a chain-structured graph.
struct ChainSolution {
  double log_z = 0.0;
  double expected_energy = 0.0;
  double entropy = 0.0;
  /// marginals[v][k] = P*(X_v = k), indexed by variable.
  std::vector<std::vector<double>> marginals;
  /// log_conditionals[0][b] = log P*(first = b);
  /// log_conditionals[d][a * K + b] = log P*(x_d = b | x_{d-1} = a), by depth.
  std::vector<std::vector<double>> log_conditionals;

  /// Probabilities of the next variable given a depth-ordered prefix.
  std::vector<double> conditional(std::span<const int> prefix, int num_states) const;
  TargetStats stats() const { return {log_z, expected_energy, entropy}; }
};

/// Throws InvalidInput if the graph is not a chain.
ChainSolution solve_chain(const FactorGraph& graph);

/// D_KL[approx || target] computed exactly over the atoms; +inf when an atom
/// lands on a zero-probability configuration.
double exact_kl(const WeightedAtoms& approx, const FactorGraph& graph, double log_z);

/// Monte Carlo D_KL[approx || target] from S draws of the sampler.
Estimate exact_kl(const Sampler& approx, const FactorGraph& graph, double log_z,
                  std::size_t num_samples, std::uint64_t seed);

/// {"log_z": ..., "marginals": [[...], ...]} for test fixtures.
std::string exact_to_json(double log_z, const std::vector<std::vector<double>>& marginals);

}  // namespace treesample
