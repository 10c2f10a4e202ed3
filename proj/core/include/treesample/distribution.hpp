#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "treesample/model.hpp"

namespace treesample {

using Rng = std::mt19937_64;

/// Draws an index with probability softmax(log_weights). Throws ZeroMassError
/// if every entry is -inf.
int sample_categorical(std::span<const double> log_weights, Rng& rng);

/// Particle approximation sum_i p_i delta(x, x_i). Atoms are distinct
/// depth-ordered configurations sorted lexicographically; weights are positive
/// and sum to one.
struct WeightedAtoms {
  std::vector<Assignment> atoms;
  std::vector<double> weights;

  std::size_t size() const { return atoms.size(); }
  bool empty() const { return atoms.empty(); }

  /// Merges duplicates, drops zero-weight entries and normalizes. Log-weights
  /// may be -inf; if all of them are, the result is empty.
  static WeightedAtoms from_log_weights(const std::vector<Assignment>& configs,
                                        std::span<const double> log_weights);
  static WeightedAtoms uniform(const std::vector<Assignment>& configs);
};

/// One atom per line: {"values": [...by variable index...], "weight": w}.
void write_atoms_jsonl(std::ostream& out, const WeightedAtoms& atoms, const FactorGraph& graph);
WeightedAtoms read_atoms_jsonl(std::istream& in, const FactorGraph& graph);

/// Monte Carlo mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// A distribution over complete configurations that can be sampled and
/// whose log-density is exact.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual Assignment sample(Rng& rng) const = 0;
  virtual double log_density(std::span<const int> x) const = 0;
};

}  // namespace treesample
