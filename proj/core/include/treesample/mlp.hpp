#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treesample/distribution.hpp"
#include "treesample/model.hpp"
#include "treesample/prior.hpp"

namespace treesample {

struct MlpShape {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;

  std::size_t parameter_count() const;
  bool operator==(const MlpShape&) const = default;
};

/// Fully connected ReLU network with a linear output layer.
///
/// Parameters live in one flat array: for each layer, the weight matrix
/// (out x in, row-major) followed by the bias vector.
class Mlp {
 public:
  /// He-normal weights, zero biases.
  Mlp(MlpShape shape, std::uint64_t seed);
  Mlp(MlpShape shape, std::vector<double> parameters);

  const MlpShape& shape() const { return shape_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Throws std::domain_error if the output is not finite.
  std::vector<double> forward(std::span<const double> input) const;
  /// inputs holds `batch` rows of shape().input values; returns batch rows
  /// of shape().output values.
  std::vector<double> forward_batch(std::span<const double> inputs, std::size_t batch) const;

  /// Mean over the batch of the squared L2 distance between outputs and
  /// targets. When grad is non-empty it receives d loss / d parameters.
  double loss_and_gradient(std::span<const double> inputs, std::span<const double> targets,
                           std::size_t batch, std::span<double> grad) const;
  double loss(std::span<const double> inputs, std::span<const double> targets,
              std::size_t batch) const {
    return loss_and_gradient(inputs, targets, batch, {});
  }

 private:
  MlpShape shape_;
  std::vector<double> params_;
};

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::size_t size, AdamConfig config = {});

  void step(std::span<double> params, std::span<const double> grad);

  const AdamConfig& config() const { return config_; }
  std::uint64_t steps() const { return t_; }
  std::vector<double>& first_moment() { return m_; }
  std::vector<double>& second_moment() { return v_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  void set_steps(std::uint64_t t) { t_ = t; }

 private:
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Fixed-capacity FIFO of (input, target) rows.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int input_dim, int target_dim);

  void push(std::span<const double> input, std::span<const double> target);
  /// Uniform draws with replacement into row-major batch arrays.
  void sample(std::size_t batch, Rng& rng, std::vector<double>& inputs,
              std::vector<double>& targets) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int input_dim() const { return input_dim_; }
  int target_dim() const { return target_dim_; }
  /// Row i of the contents in insertion order (0 is the oldest).
  std::span<const double> input(std::size_t i) const;
  std::span<const double> target(std::size_t i) const;
  void clear();

 private:
  std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }

  std::size_t capacity_;
  int input_dim_;
  int target_dim_;
  std::size_t head_ = 0;  // oldest row
  std::size_t size_ = 0;
  std::vector<double> inputs_;
  std::vector<double> targets_;
};

/// Q^phi as an MLP over encode(graph, prefix).
class MLPValueFunction final : public PriorValueFunction {
 public:
  MLPValueFunction(int n, int k, std::vector<int> hidden, std::uint64_t seed);
  MLPValueFunction(int n, int k, Mlp mlp);

  std::vector<double> values(const FactorGraph& graph, std::span<const int> prefix) const override;

  int num_variables() const { return n_; }
  int num_states() const { return k_; }
  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }

 private:
  int n_;
  int k_;
  Mlp mlp_;
};

/// 4 x 256 hidden units.
std::vector<int> default_hidden_layers();

}  // namespace treesample
