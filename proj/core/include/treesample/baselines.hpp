#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treesample/distribution.hpp"
#include "treesample/model.hpp"
#include "treesample/prior.hpp"

namespace treesample {

enum class ResamplingScheme { multinomial, systematic };

struct SmcConfig {
  std::uint64_t budget = 0;
  /// Resample when ESS < threshold * I. Zero never resamples (plain SIS).
  double resample_threshold = 0.5;
  ResamplingScheme scheme = ResamplingScheme::multinomial;
  CostMode cost_mode = CostMode::reward_eval;
  std::uint64_t seed = 0;
};

struct ParticleResult {
  WeightedAtoms atoms;
  /// Unbiased log of the Z estimate: sum over resampling epochs of
  /// log(mean incremental weight).
  double log_evidence = 0.0;
  std::size_t num_particles = 0;
  std::size_t resample_count = 0;
  std::uint64_t spent = 0;
  /// Every particle ended with zero weight; atoms is empty.
  bool degenerate = false;
};

/// Sequential importance sampling with proposal softmax(Q^phi). The particle
/// count is the largest I with I * rollout_cost <= budget. Throws BudgetError
/// if not even one particle fits.
ParticleResult sis(const FactorGraph& graph, const PriorValueFunction& proposal,
                   std::uint64_t budget, std::uint64_t seed,
                   CostMode cost_mode = CostMode::reward_eval);

/// SIS with ESS-triggered resampling after every step but the last.
ParticleResult smc(const FactorGraph& graph, const PriorValueFunction& proposal,
                   const SmcConfig& config);

/// (sum w)^2 / sum w^2 from log-weights; 0 when every weight is zero.
double effective_sample_size(std::span<const double> log_weights);

/// Ancestor indices drawn in proportion to the (normalized) probabilities.
std::vector<std::size_t> resample_indices(std::span<const double> probabilities,
                                          std::size_t count, ResamplingScheme scheme, Rng& rng);

struct GibbsConfig {
  std::uint64_t budget = 0;
  int sweeps = 10;  // N_gibbs
  CostMode cost_mode = CostMode::reward_eval;
  /// Charge per full-conditional computation. 0 means the default: K under
  /// reward_eval, K * |factors touching the site| under factor_eval.
  std::uint64_t conditional_cost = 0;
  std::uint64_t seed = 0;
};

struct ChainResult {
  WeightedAtoms atoms;
  std::size_t num_samples = 0;
  std::uint64_t spent = 0;
  /// Gibbs only: sites whose full conditional was all -inf and were redrawn
  /// uniformly.
  std::size_t zero_mass_restarts = 0;
};

/// Independent Gibbs chains from uniform starts, each swept N_gibbs times in
/// variable-index order and emitting its final state, until the budget can't
/// pay for another chain. Atoms are uniformly weighted before merging.
ChainResult gibbs(const FactorGraph& graph, const GibbsConfig& config);

struct BpConfig {
  std::uint64_t budget = 0;
  int message_rounds = 10;  // N_message
  CostMode cost_mode = CostMode::reward_eval;
  /// Charge per factor per message round.
  std::uint64_t cost_per_factor_round = 1;
  std::uint64_t seed = 0;
};

/// Approximate P(next variable | clamped prefix) from synchronous loopy
/// sum-product: variable-to-factor messages start uniform, clamped
/// variables send their atom, messages are normalized every round, no
/// damping. Returns probabilities over the K states of ordering[prefix.size()].
std::vector<double> bp_conditional(const FactorGraph& graph, std::span<const int> prefix,
                                   int message_rounds);

/// Samples variables one at a time in ordering, re-running message passing
/// after each clamp, until the budget can't pay for another sample.
ChainResult bp_sample(const FactorGraph& graph, const BpConfig& config);

}  // namespace treesample
