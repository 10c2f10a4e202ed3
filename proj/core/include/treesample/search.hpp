#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "treesample/distribution.hpp"
#include "treesample/model.hpp"
#include "treesample/prior.hpp"

namespace treesample {

/// A node x of the partial search tree and the statistics of its K children.
///
/// Node x at depth n caches R_n(x) and, for every action a, the visit count,
/// current value Q_{n+1}(a | x), prior value, completeness flag and link of
/// the child x . a.
struct TreeNode {
  int depth = 0;
  std::int32_t parent = -1;
  int action = -1;
  double reward = 0.0;
  std::uint32_t visits = 0;
  std::vector<double> q;
  std::vector<double> prior;  // empty for leaves and dead ends
  std::vector<std::uint32_t> child_visits;
  std::vector<std::uint8_t> child_complete;
  std::vector<std::int32_t> children;  // -1 when not expanded

  /// V(x) = logsumexp_a Q(a | x).
  double value() const;
  /// All children complete: the subtree under x is fully known.
  bool complete() const;
};

/// argmax over incomplete actions of
///   Q[a] + c * max(prior[a], eps) * sqrt(parent_visits) / (1 + visits[a]),
/// lowest index on ties. Throws std::logic_error if every action is complete.
int q_uct_select(std::span<const double> q, std::span<const double> prior,
                 std::span<const std::uint32_t> visits, std::span<const std::uint8_t> complete,
                 std::uint32_t parent_visits, double c, double epsilon);
int q_uct_select(const TreeNode& node, double c, double epsilon);

struct SearchConfig {
  std::uint64_t budget = 0;
  double c = 2.0;
  double epsilon = 0.1;
  CostMode cost_mode = CostMode::reward_eval;
  std::uint64_t seed = 0;
};

/// Partial prefix tree grown by budgeted Q-UCT traversals with soft-Bellman
/// backups. Also the resulting approximate distribution: sampling follows
/// softmax(Q) inside the tree and softmax(Q^phi) outside it.
///
/// The graph and prior must outlive the tree. The root is created without
/// charge; every other node costs one reward evaluation.
class SearchTree final : public Sampler {
 public:
  SearchTree(const FactorGraph& graph, const PriorValueFunction& prior, SearchConfig config);

  /// One traversal: select down to a missing node, expand it, back up.
  /// Returns false, changing nothing, when the root is complete or the
  /// remaining budget is below the worst-case cost of one expansion.
  bool traverse();
  /// Traverses until traverse() returns false.
  void build();

  const FactorGraph& graph() const { return *graph_; }
  const SearchConfig& config() const { return config_; }
  const BudgetLedger& ledger() const { return ledger_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::uint64_t expansions() const { return nodes_.size() - 1; }
  const TreeNode& node(std::size_t index) const { return nodes_[index]; }
  const TreeNode& root() const { return nodes_.front(); }
  bool root_complete() const { return root().complete(); }
  /// V_1(empty prefix); log Z once the root is complete.
  double root_value() const { return root().value(); }

  /// Index of the node for a depth-ordered prefix, or -1 if not in the tree.
  std::int32_t find(std::span<const int> prefix) const;
  Assignment prefix_of(std::size_t index) const;

  Assignment sample(Rng& rng) const override;
  double log_density(std::span<const int> x) const override;

 private:
  std::int32_t expand(std::span<const int> prefix, std::int32_t parent, int action);
  void backup(std::int32_t leaf);

  const FactorGraph* graph_;
  const PriorValueFunction* prior_;
  SearchConfig config_;
  BudgetLedger ledger_;
  std::uint64_t guard_cost_;
  std::vector<TreeNode> nodes_;
};

/// Debug dump: one entry per node with prefix, reward, visits, Q, child
/// visits and completeness flags. -inf is written as the string "-inf".
std::string tree_to_json(const SearchTree& tree);

/// Builds the tree to budget exhaustion or root completion.
SearchTree build_tree(const FactorGraph& graph, const PriorValueFunction& prior,
                      const SearchConfig& config);

}  // namespace treesample
