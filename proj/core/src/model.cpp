#include "treesample/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "treesample/errors.hpp"
#include "treesample/logmath.hpp"

namespace treesample {

std::string_view to_string(CostMode mode) {
  return mode == CostMode::reward_eval ? "reward_eval" : "factor_eval";
}

CostMode parse_cost_mode(std::string_view name) {
  if (name == "reward_eval") return CostMode::reward_eval;
  if (name == "factor_eval") return CostMode::factor_eval;
  throw InvalidInput("unknown cost mode '" + std::string(name) + "'");
}

namespace {

std::uint64_t saturating_pow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    out *= base;
  }
  return out;
}

std::vector<int> identity(int n) {
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace

FactorGraph::FactorGraph(int num_variables, int num_states, std::vector<Factor> factors,
                         std::vector<int> ordering)
    : num_variables_(num_variables), num_states_(num_states), factors_(std::move(factors)) {
  if (num_variables_ < 1) throw InvalidInput("factor graph needs at least one variable");
  if (num_states_ < 2) throw InvalidInput("factor graph needs at least two states per variable");
  ordering_ = ordering.empty() ? identity(num_variables_) : std::move(ordering);
  if (static_cast<int>(ordering_.size()) != num_variables_)
    throw InvalidInput("ordering length does not match the number of variables");

  position_.assign(num_variables_, -1);
  for (int d = 0; d < num_variables_; ++d) {
    const int v = ordering_[d];
    if (v < 0 || v >= num_variables_ || position_[v] != -1)
      throw InvalidInput("ordering is not a permutation of the variables");
    position_[v] = d;
  }

  by_depth_.assign(num_variables_, {});
  by_variable_.assign(num_variables_, {});
  for (std::size_t m = 0; m < factors_.size(); ++m) {
    const Factor& f = factors_[m];
    if (f.scope.empty()) throw InvalidInput("factor " + std::to_string(m) + " has an empty scope");
    for (std::size_t j = 0; j < f.scope.size(); ++j) {
      if (f.scope[j] < 0 || f.scope[j] >= num_variables_)
        throw InvalidInput("factor " + std::to_string(m) + " scope index out of range");
      if (j > 0 && f.scope[j] <= f.scope[j - 1])
        throw InvalidInput("factor " + std::to_string(m) + " scope is not strictly ascending");
    }
    const std::uint64_t expected = saturating_pow(num_states_, static_cast<int>(f.scope.size()));
    if (f.log_table.size() != expected)
      throw InvalidInput("factor " + std::to_string(m) + " table has the wrong length");
    for (double v : f.log_table)
      if (std::isnan(v) || v == kPosInf)
        throw InvalidInput("factor " + std::to_string(m) + " table holds NaN or +inf");

    int deepest = 0;
    for (int v : f.scope) {
      deepest = std::max(deepest, position_[v]);
      by_variable_[v].push_back(m);
    }
    by_depth_[deepest].push_back(m);
  }
  for (int v = 0; v < num_variables_; ++v)
    if (by_variable_[v].empty())
      throw InvalidInput("variable " + std::to_string(v) + " is not covered by any factor");
  for (const auto& level : by_depth_) max_per_depth_ = std::max(max_per_depth_, level.size());
}

std::span<const std::size_t> FactorGraph::factors_at_depth(int depth) const {
  if (depth < 1 || depth > num_variables_) throw InvalidInput("reward depth out of range");
  return by_depth_[depth - 1];
}

FactorGraph FactorGraph::with_ordering(std::vector<int> ordering) const {
  return FactorGraph(num_variables_, num_states_, factors_, std::move(ordering));
}

double FactorGraph::factor_value(std::size_t m, std::span<const int> prefix) const {
  const Factor& f = factors_[m];
  std::size_t index = 0;
  for (int v : f.scope) index = index * num_states_ + prefix[position_[v]];
  return f.log_table[index];
}

double FactorGraph::factor_value_by_variable(std::size_t m, std::span<const int> values) const {
  const Factor& f = factors_[m];
  std::size_t index = 0;
  for (int v : f.scope) index = index * num_states_ + values[v];
  return f.log_table[index];
}

std::uint64_t FactorGraph::domain_size() const {
  return saturating_pow(num_states_, num_variables_);
}

namespace {

void check_values(const FactorGraph& graph, std::span<const int> values) {
  for (int v : values)
    if (v < 0 || v >= graph.num_states()) throw InvalidInput("state value out of range");
}

}  // namespace

double reward(const FactorGraph& graph, std::span<const int> prefix) {
  const int n = static_cast<int>(prefix.size());
  if (n < 1 || n > graph.num_variables()) throw InvalidInput("reward needs a prefix of length 1..N");
  check_values(graph, prefix);
  double total = 0.0;
  for (std::size_t m : graph.factors_at_depth(n)) {
    total = extended_add(total, graph.factor_value(m, prefix));
    if (total == kNegInf) break;
  }
  return total;
}

std::uint64_t reward_cost(const FactorGraph& graph, int depth, CostMode mode) {
  if (mode == CostMode::reward_eval) return 1;
  return graph.factors_at_depth(depth).size();
}

std::uint64_t rollout_cost(const FactorGraph& graph, CostMode mode) {
  return mode == CostMode::reward_eval ? static_cast<std::uint64_t>(graph.num_variables())
                                       : graph.num_factors();
}

double log_unnormalized_density(const FactorGraph& graph, std::span<const int> x) {
  if (static_cast<int>(x.size()) != graph.num_variables())
    throw InvalidInput("log density needs a complete configuration");
  check_values(graph, x);
  double total = 0.0;
  for (std::size_t m = 0; m < graph.num_factors(); ++m) {
    total = extended_add(total, graph.factor_value(m, x));
    if (total == kNegInf) break;
  }
  return total;
}

Assignment to_variable_order(const FactorGraph& graph, std::span<const int> by_depth) {
  Assignment out(by_depth.size());
  for (std::size_t d = 0; d < by_depth.size(); ++d) out[graph.variable_at(static_cast<int>(d))] = by_depth[d];
  return out;
}

Assignment to_depth_order(const FactorGraph& graph, std::span<const int> by_variable) {
  Assignment out(by_variable.size());
  for (std::size_t v = 0; v < by_variable.size(); ++v) out[graph.position_of(static_cast<int>(v))] = by_variable[v];
  return out;
}

std::optional<double> RewardOracle::evaluate(std::span<const int> prefix) {
  if (!ledger_->charge(cost(static_cast<int>(prefix.size())))) return std::nullopt;
  return reward(*graph_, prefix);
}

// --- JSON -------------------------------------------------------------------

std::string graph_to_json(const FactorGraph& graph) {
  nlohmann::ordered_json doc;
  doc["n"] = graph.num_variables();
  doc["k"] = graph.num_states();
  doc["ordering"] = std::vector<int>(graph.ordering().begin(), graph.ordering().end());
  auto factors = nlohmann::ordered_json::array();
  for (const Factor& f : graph.factors()) {
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (double v : f.log_table) {
      if (v == kNegInf)
        table.push_back("-inf");
      else
        table.push_back(v);
    }
    factors.push_back({{"scope", f.scope}, {"log_table", std::move(table)}});
  }
  doc["factors"] = std::move(factors);
  return doc.dump();
}

FactorGraph graph_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed factor graph JSON: ") + e.what());
  }
  try {
    const int n = doc.at("n").get<int>();
    const int k = doc.at("k").get<int>();
    std::vector<int> ordering;
    if (doc.contains("ordering")) ordering = doc.at("ordering").get<std::vector<int>>();
    std::vector<Factor> factors;
    for (const auto& jf : doc.at("factors")) {
      Factor f;
      f.scope = jf.at("scope").get<std::vector<int>>();
      for (const auto& entry : jf.at("log_table")) {
        if (entry.is_string()) {
          if (entry.get<std::string>() != "-inf")
            throw InvalidInput("table entries may only use the string \"-inf\"");
          f.log_table.push_back(kNegInf);
        } else {
          f.log_table.push_back(entry.get<double>());
        }
      }
      factors.push_back(std::move(f));
    }
    return FactorGraph(n, k, std::move(factors), std::move(ordering));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("factor graph JSON does not match schema: ") + e.what());
  }
}

void save_graph(const FactorGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  out << graph_to_json(graph) << '\n';
}

FactorGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return graph_from_json(buf.str());
}

}  // namespace treesample
