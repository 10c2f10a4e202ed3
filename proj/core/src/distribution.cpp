#include "treesample/distribution.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include <json.hpp>

#include "treesample/errors.hpp"
#include "treesample/logmath.hpp"

namespace treesample {

int sample_categorical(std::span<const double> log_weights, Rng& rng) {
  const double norm = logsumexp(log_weights);
  if (norm == kNegInf) throw ZeroMassError("categorical draw over all -inf weights");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (log_weights[i] == kNegInf) continue;
    last_positive = static_cast<int>(i);
    cumulative += std::exp(log_weights[i] - norm);
    if (u < cumulative) return last_positive;
  }
  return last_positive;
}

WeightedAtoms WeightedAtoms::from_log_weights(const std::vector<Assignment>& configs,
                                              std::span<const double> log_weights) {
  if (configs.size() != log_weights.size()) throw InvalidInput("atom/weight length mismatch");
  WeightedAtoms out;
  const double norm = logsumexp(log_weights);
  if (norm == kNegInf) return out;
  std::map<Assignment, double> merged;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (log_weights[i] == kNegInf) continue;
    merged[configs[i]] += std::exp(log_weights[i] - norm);
  }
  double total = 0.0;
  for (const auto& [atom, w] : merged) total += w;
  for (auto& [atom, w] : merged) {
    if (w <= 0.0) continue;
    out.atoms.push_back(atom);
    out.weights.push_back(w / total);
  }
  return out;
}

WeightedAtoms WeightedAtoms::uniform(const std::vector<Assignment>& configs) {
  std::vector<double> zeros(configs.size(), 0.0);
  return from_log_weights(configs, zeros);
}

void write_atoms_jsonl(std::ostream& out, const WeightedAtoms& atoms, const FactorGraph& graph) {
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    nlohmann::ordered_json line;
    line["values"] = to_variable_order(graph, atoms.atoms[i]);
    line["weight"] = atoms.weights[i];
    out << line.dump() << '\n';
  }
}

WeightedAtoms read_atoms_jsonl(std::istream& in, const FactorGraph& graph) {
  std::vector<Assignment> configs;
  std::vector<double> log_weights;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto doc = nlohmann::json::parse(line);
      const auto values = doc.at("values").get<std::vector<int>>();
      if (static_cast<int>(values.size()) != graph.num_variables())
        throw InvalidInput("atom has the wrong number of values");
      configs.push_back(to_depth_order(graph, values));
      const double w = doc.at("weight").get<double>();
      if (!(w >= 0.0)) throw InvalidInput("atom weight must be non-negative");
      log_weights.push_back(w > 0.0 ? std::log(w) : kNegInf);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("malformed atom line: ") + e.what());
    }
  }
  return WeightedAtoms::from_log_weights(configs, log_weights);
}

}  // namespace treesample
