#include "treesample/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "treesample/errors.hpp"
#include "treesample/logmath.hpp"

namespace treesample {

double TreeNode::value() const { return logsumexp(q); }

bool TreeNode::complete() const {
  return std::all_of(child_complete.begin(), child_complete.end(),
                     [](std::uint8_t c) { return c != 0; });
}

int q_uct_select(std::span<const double> q, std::span<const double> prior,
                 std::span<const std::uint32_t> visits, std::span<const std::uint8_t> complete,
                 std::uint32_t parent_visits, double c, double epsilon) {
  const double sqrt_parent = std::sqrt(static_cast<double>(parent_visits));
  int best = -1;
  double best_score = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (complete[a]) continue;
    const double bonus = c * std::max(prior[a], epsilon) * sqrt_parent / (1.0 + visits[a]);
    const double score = q[a] + bonus;
    if (best < 0 || score > best_score) {
      best = static_cast<int>(a);
      best_score = score;
    }
  }
  if (best < 0) throw std::logic_error("q_uct_select called on a node whose children are all complete");
  return best;
}

int q_uct_select(const TreeNode& node, double c, double epsilon) {
  return q_uct_select(node.q, node.prior, node.child_visits, node.child_complete, node.visits, c,
                      epsilon);
}

SearchTree::SearchTree(const FactorGraph& graph, const PriorValueFunction& prior,
                       SearchConfig config)
    : graph_(&graph),
      prior_(&prior),
      config_(config),
      ledger_(config.budget, config.cost_mode),
      guard_cost_(config.cost_mode == CostMode::reward_eval ? 1 : graph.max_factors_per_depth()) {
  if (!(config_.c > 0.0)) throw InvalidInput("exploration constant c must be positive");
  if (!(config_.epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
  const int k = graph.num_states();
  TreeNode root;
  root.q = prior.values(graph, {});
  root.prior = root.q;
  root.child_visits.assign(k, 0);
  root.child_complete.assign(k, 0);
  root.children.assign(k, -1);
  nodes_.push_back(std::move(root));
}

std::int32_t SearchTree::expand(std::span<const int> prefix, std::int32_t parent, int action) {
  RewardOracle oracle(*graph_, ledger_);
  const auto r = oracle.evaluate(prefix);
  if (!r) throw std::logic_error("expansion started without budget to pay for it");

  const int k = graph_->num_states();
  const int depth = static_cast<int>(prefix.size());
  TreeNode node;
  node.depth = depth;
  node.parent = parent;
  node.action = action;
  node.reward = *r;
  node.child_visits.assign(k, 0);
  node.children.assign(k, -1);
  if (*r == kNegInf) {
    // Zero-mass branch: the whole subtree is worth -inf, nothing below matters.
    node.q.assign(k, kNegInf);
    node.child_complete.assign(k, 1);
  } else if (depth == graph_->num_variables()) {
    node.q.assign(k, -std::log(static_cast<double>(k)));
    node.child_complete.assign(k, 1);
  } else {
    node.prior = prior_->values(*graph_, prefix);
    node.q = node.prior;
    node.child_complete.assign(k, 0);
  }
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(std::move(node));
  nodes_[parent].children[action] = index;
  return index;
}

void SearchTree::backup(std::int32_t leaf) {
  std::int32_t child = leaf;
  while (true) {
    TreeNode& c = nodes_[child];
    c.visits += 1;
    if (c.parent < 0) break;
    const double v = c.value();
    const bool done = c.complete();
    const double reward = c.reward;
    const int a = c.action;
    TreeNode& p = nodes_[c.parent];
    p.q[a] = extended_add(reward, v);
    p.child_complete[a] = done ? 1 : 0;
    p.child_visits[a] += 1;
    child = c.parent;
  }
}

bool SearchTree::traverse() {
  if (root_complete()) return false;
  if (!ledger_.can_afford(guard_cost_)) return false;

  Assignment prefix;
  prefix.reserve(graph_->num_variables());
  std::int32_t current = 0;
  while (true) {
    const int a = q_uct_select(nodes_[current], config_.c, config_.epsilon);
    prefix.push_back(a);
    const std::int32_t next = nodes_[current].children[a];
    if (next < 0) {
      backup(expand(prefix, current, a));
      return true;
    }
    current = next;
  }
}

void SearchTree::build() {
  while (traverse()) {
  }
}

std::int32_t SearchTree::find(std::span<const int> prefix) const {
  std::int32_t current = 0;
  for (int a : prefix) {
    if (a < 0 || a >= graph_->num_states()) throw InvalidInput("state value out of range");
    current = nodes_[current].children[a];
    if (current < 0) return -1;
  }
  return current;
}

Assignment SearchTree::prefix_of(std::size_t index) const {
  Assignment out(nodes_[index].depth);
  for (auto i = static_cast<std::int32_t>(index); nodes_[i].parent >= 0; i = nodes_[i].parent)
    out[nodes_[i].depth - 1] = nodes_[i].action;
  return out;
}

Assignment SearchTree::sample(Rng& rng) const {
  const int n_vars = graph_->num_variables();
  Assignment x;
  x.reserve(n_vars);
  std::int32_t current = 0;
  for (int n = 0; n < n_vars; ++n) {
    int a;
    if (current >= 0) {
      a = sample_categorical(nodes_[current].q, rng);
      current = nodes_[current].children[a];
    } else {
      a = sample_categorical(prior_->values(*graph_, x), rng);
    }
    x.push_back(a);
  }
  return x;
}

double SearchTree::log_density(std::span<const int> x) const {
  const int n_vars = graph_->num_variables();
  if (static_cast<int>(x.size()) != n_vars) throw InvalidInput("log_density needs a complete configuration");
  double total = 0.0;
  std::int32_t current = 0;
  for (int n = 0; n < n_vars; ++n) {
    const int a = x[n];
    if (a < 0 || a >= graph_->num_states()) throw InvalidInput("state value out of range");
    double lq;
    double norm;
    if (current >= 0) {
      const auto& q = nodes_[current].q;
      norm = logsumexp(q);
      lq = q[a];
      current = nodes_[current].children[a];
    } else {
      const auto q = prior_->values(*graph_, x.first(n));
      norm = logsumexp(q);
      lq = q[a];
    }
    if (norm == kNegInf || lq == kNegInf) return kNegInf;
    total += lq - norm;
  }
  return total;
}

namespace {

nlohmann::ordered_json number(double v) {
  if (v == kNegInf) return "-inf";
  if (v == kPosInf) return "inf";
  return v;
}

}  // namespace

std::string tree_to_json(const SearchTree& tree) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < tree.node_count(); ++i) {
    const TreeNode& node = tree.node(i);
    nlohmann::ordered_json q = nlohmann::ordered_json::array();
    for (double v : node.q) q.push_back(number(v));
    nodes.push_back({{"prefix", tree.prefix_of(i)},
                     {"reward", number(node.reward)},
                     {"visits", node.visits},
                     {"q", q},
                     {"child_visits", node.child_visits},
                     {"child_complete", node.child_complete},
                     {"complete", node.complete()}});
  }
  nlohmann::ordered_json out{{"root_value", number(tree.root_value())},
                             {"root_complete", tree.root_complete()},
                             {"spent", tree.ledger().spent()},
                             {"nodes", nodes}};
  return out.dump();
}

SearchTree build_tree(const FactorGraph& graph, const PriorValueFunction& prior,
                      const SearchConfig& config) {
  SearchTree tree(graph, prior, config);
  tree.build();
  return tree;
}

}  // namespace treesample
