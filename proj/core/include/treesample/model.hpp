#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace treesample {

/// How oracle calls are billed against a budget.
///  - reward_eval: one unit per evaluation of a per-depth reward, even an empty one.
///  - factor_eval: one unit per factor summed into the reward.
enum class CostMode { reward_eval, factor_eval };

std::string_view to_string(CostMode mode);
CostMode parse_cost_mode(std::string_view name);

/// A log-domain factor over an ascending scope of 0-based variable indices.
/// The table is dense and row-major in the scope's variable values, so the
/// last scope variable varies fastest. Entries are finite or -inf.
struct Factor {
  std::vector<int> scope;
  std::vector<double> log_table;
};

/// Values in search-depth order: entry d is the state of variable ordering[d].
/// States are 0-based in [0, K).
using Assignment = std::vector<int>;

/// Immutable discrete factor graph with a fixed depth-to-variable ordering.
///
/// Depths are 1-based when talking about rewards: the reward at depth n is the
/// sum of the factors whose deepest scope variable sits at ordering position
/// n - 1, i.e. the factors that become computable once n values are assigned.
class FactorGraph {
 public:
  /// Validates every invariant and throws InvalidInput on violation. An empty
  /// ordering means identity.
  FactorGraph(int num_variables, int num_states, std::vector<Factor> factors,
              std::vector<int> ordering = {});

  int num_variables() const { return num_variables_; }
  int num_states() const { return num_states_; }
  std::size_t num_factors() const { return factors_.size(); }
  const std::vector<Factor>& factors() const { return factors_; }
  const Factor& factor(std::size_t m) const { return factors_[m]; }

  std::span<const int> ordering() const { return ordering_; }
  int variable_at(int position) const { return ordering_[position]; }
  int position_of(int variable) const { return position_[variable]; }

  /// M_n for n in [1, N].
  std::span<const std::size_t> factors_at_depth(int depth) const;
  /// max_n |M_n|.
  std::size_t max_factors_per_depth() const { return max_per_depth_; }
  /// Factors whose scope contains the variable.
  std::span<const std::size_t> factors_of_variable(int variable) const {
    return by_variable_[variable];
  }

  /// Same factors, different ordering.
  FactorGraph with_ordering(std::vector<int> ordering) const;

  /// Factor value given a depth-ordered prefix long enough to cover its scope.
  double factor_value(std::size_t m, std::span<const int> prefix) const;
  /// Factor value given values indexed by variable.
  double factor_value_by_variable(std::size_t m, std::span<const int> values) const;

  /// Total number of table entries, K^N, saturated at UINT64_MAX.
  std::uint64_t domain_size() const;

 private:
  int num_variables_;
  int num_states_;
  std::vector<Factor> factors_;
  std::vector<int> ordering_;
  std::vector<int> position_;
  std::vector<std::vector<std::size_t>> by_depth_;
  std::vector<std::vector<std::size_t>> by_variable_;
  std::size_t max_per_depth_ = 0;
};

/// R_n(prefix) with n = prefix.size() >= 1. -inf propagates.
double reward(const FactorGraph& graph, std::span<const int> prefix);

/// Budget charge of one evaluation of R_depth.
std::uint64_t reward_cost(const FactorGraph& graph, int depth, CostMode mode);

/// Cost of evaluating every reward along one complete configuration.
std::uint64_t rollout_cost(const FactorGraph& graph, CostMode mode);

/// sum_m psi_m(x) for a complete depth-ordered configuration.
double log_unnormalized_density(const FactorGraph& graph, std::span<const int> x);

Assignment to_variable_order(const FactorGraph& graph, std::span<const int> by_depth);
Assignment to_depth_order(const FactorGraph& graph, std::span<const int> by_variable);

/// Counts oracle spend against a fixed budget. Never exceeds the budget.
class BudgetLedger {
 public:
  explicit BudgetLedger(std::uint64_t budget, CostMode mode = CostMode::reward_eval)
      : budget_(budget), mode_(mode) {}

  /// Returns false, leaving the ledger untouched, if the charge would overdraw.
  bool charge(std::uint64_t amount) {
    if (amount > remaining()) return false;
    spent_ += amount;
    return true;
  }
  bool can_afford(std::uint64_t amount) const { return amount <= remaining(); }

  std::uint64_t budget() const { return budget_; }
  std::uint64_t spent() const { return spent_; }
  std::uint64_t remaining() const { return budget_ - spent_; }
  CostMode mode() const { return mode_; }

 private:
  std::uint64_t budget_;
  std::uint64_t spent_ = 0;
  CostMode mode_;
};

/// Single choke point through which reward evaluations are billed.
class RewardOracle {
 public:
  RewardOracle(const FactorGraph& graph, BudgetLedger& ledger)
      : graph_(&graph), ledger_(&ledger) {}

  /// R_n(prefix), or nullopt when the ledger cannot cover it.
  std::optional<double> evaluate(std::span<const int> prefix);
  std::uint64_t cost(int depth) const { return reward_cost(*graph_, depth, ledger_->mode()); }

  const FactorGraph& graph() const { return *graph_; }
  const BudgetLedger& ledger() const { return *ledger_; }

 private:
  const FactorGraph* graph_;
  BudgetLedger* ledger_;
};

/// JSON schema: {"n", "k", "ordering", "factors": [{"scope", "log_table"}]},
/// 0-based indices, -inf written as the string "-inf".
std::string graph_to_json(const FactorGraph& graph);
FactorGraph graph_from_json(std::string_view text);
void save_graph(const FactorGraph& graph, const std::string& path);
FactorGraph load_graph(const std::string& path);

}  // namespace treesample
