#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "treesample/distribution.hpp"
#include "treesample/mlp.hpp"
#include "treesample/model.hpp"
#include "treesample/search.hpp"

namespace treesample {

enum class TrainAlgo { treesample, smc };

std::string_view to_string(TrainAlgo algo);
TrainAlgo parse_train_algo(std::string_view name);

struct TrainConfig {
  int episodes = 1;
  std::uint64_t budget_per_episode = 2500;
  int samples_per_episode = 128;
  /// Optimizer steps per episode; by default one per sample drawn.
  int train_steps_per_episode = 128;
  int batch_size = 128;
  double learning_rate = 3e-4;
  std::size_t replay_capacity = 10'000;
  double target_floor = -50.0;
  std::vector<int> hidden = default_hidden_layers();
  CostMode cost_mode = CostMode::reward_eval;
  // worker settings
  double c = 2.0;
  double epsilon = 0.1;
  double resample_threshold = 0.5;
  /// Samples for the prior-alone delta_kl estimate.
  int prior_eval_samples = 128;
  std::uint64_t seed = 0;
};

struct EpisodeMetrics {
  int episode = 0;
  /// delta_kl of the worker's approximation (search or SMC with Q^phi).
  double delta_kl = 0.0;
  double delta_kl_std_error = 0.0;
  /// delta_kl of softmax(Q^phi) ancestral sampling alone.
  double prior_delta_kl = 0.0;
  double prior_delta_kl_std_error = 0.0;
  double mean_loss = 0.0;
  int train_steps = 0;
  std::size_t rows_written = 0;
  std::size_t replay_size = 0;
  std::uint64_t spent = 0;
  bool degenerate = false;
};

std::string episode_csv_header();
std::string episode_csv_row(const EpisodeMetrics& m);

/// Worker/learner alternation on a single graph: each episode builds an
/// approximation with the current Q^phi, writes Q-regression targets to the
/// replay buffer, then runs the optimizer.
class Trainer {
 public:
  Trainer(const FactorGraph& graph, TrainConfig config, TrainAlgo algo);

  EpisodeMetrics run_episode();
  std::vector<EpisodeMetrics> run(int episodes);

  /// Number of completed episodes.
  int episode() const { return episode_; }
  const TrainConfig& config() const { return config_; }
  TrainAlgo algo() const { return algo_; }
  const MLPValueFunction& prior() const { return prior_; }
  const ReplayBuffer& replay() const { return replay_; }
  const Adam& optimizer() const { return adam_; }

  /// One optimizer step on a uniform minibatch; returns the pre-update loss.
  double train_step();

  /// Header line plus little-endian binary blocks: parameters, Adam moments
  /// and replay contents. Resuming continues bit-for-bit.
  void save_checkpoint(const std::filesystem::path& path) const;
  static Trainer resume(const FactorGraph& graph, const std::filesystem::path& path);

 private:
  void write_tree_targets(const SearchTree& tree, const std::vector<Assignment>& samples,
                          std::size_t& rows);

  const FactorGraph* graph_;
  TrainConfig config_;
  TrainAlgo algo_;
  MLPValueFunction prior_;
  Adam adam_;
  ReplayBuffer replay_;
  Rng rng_;
  int episode_ = 0;
  std::vector<double> batch_inputs_;
  std::vector<double> batch_targets_;
  std::vector<double> grad_;
};

/// Reads only the network from a training checkpoint.
MLPValueFunction load_prior_checkpoint(const std::filesystem::path& path);

}  // namespace treesample
