#pragma once

#include <span>
#include <vector>

#include "treesample/distribution.hpp"
#include "treesample/model.hpp"

namespace treesample {

/// Default state-action values Q^phi used off-tree, to initialize freshly
/// expanded nodes and to scale the exploration bonus.
class PriorValueFunction {
 public:
  virtual ~PriorValueFunction() = default;
  /// Q^phi_{n+1}(. | prefix) for a depth-ordered prefix of length n < N.
  /// Always K finite values.
  virtual std::vector<double> values(const FactorGraph& graph,
                                     std::span<const int> prefix) const = 0;
};

/// (N - n - 1) log K for every action: the exact values when all factors
/// vanish.
class HeuristicPrior final : public PriorValueFunction {
 public:
  std::vector<double> values(const FactorGraph& graph, std::span<const int> prefix) const override;
};

/// One-hot state plus an "unassigned" flag per variable slot, N * (K + 1)
/// entries, slots indexed by variable.
std::vector<double> encode(const FactorGraph& graph, std::span<const int> prefix);
void encode_into(const FactorGraph& graph, std::span<const int> prefix, std::span<double> out);

/// Ancestral sampler that draws every step from softmax(Q^phi). Consumes no
/// budget.
class PriorSampler final : public Sampler {
 public:
  PriorSampler(const FactorGraph& graph, const PriorValueFunction& prior)
      : graph_(&graph), prior_(&prior) {}
  Assignment sample(Rng& rng) const override;
  double log_density(std::span<const int> x) const override;

 private:
  const FactorGraph* graph_;
  const PriorValueFunction* prior_;
};

}  // namespace treesample
