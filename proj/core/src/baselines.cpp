#include "treesample/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "treesample/errors.hpp"
#include "treesample/logmath.hpp"

namespace treesample {

double effective_sample_size(std::span<const double> log_weights) {
  const double lse = logsumexp(log_weights);
  if (lse == kNegInf) return 0.0;
  std::vector<double> doubled(log_weights.size());
  for (std::size_t i = 0; i < log_weights.size(); ++i) doubled[i] = 2.0 * log_weights[i];
  return std::exp(2.0 * lse - logsumexp(doubled));
}

std::vector<std::size_t> resample_indices(std::span<const double> probabilities, std::size_t count,
                                          ResamplingScheme scheme, Rng& rng) {
  double total = 0.0;
  for (double p : probabilities) total += p;
  if (!(total > 0.0)) throw ZeroMassError("resampling from all-zero weights");
  std::vector<std::size_t> out;
  out.reserve(count);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (scheme == ResamplingScheme::systematic) {
    const double step = total / static_cast<double>(count);
    double u = unit(rng) * step;
    double cumulative = probabilities[0];
    std::size_t i = 0;
    for (std::size_t draw = 0; draw < count; ++draw) {
      while (u >= cumulative && i + 1 < probabilities.size()) cumulative += probabilities[++i];
      out.push_back(i);
      u += step;
    }
    return out;
  }
  std::vector<double> cdf(probabilities.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) cdf[i] = (acc += probabilities[i]);
  for (std::size_t draw = 0; draw < count; ++draw) {
    const double u = unit(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t i = std::min<std::size_t>(it - cdf.begin(), probabilities.size() - 1);
    while (probabilities[i] <= 0.0 && i > 0) --i;  // never pick a zero-weight tail entry
    out.push_back(i);
  }
  return out;
}

ParticleResult smc(const FactorGraph& graph, const PriorValueFunction& proposal,
                   const SmcConfig& config) {
  if (config.resample_threshold < 0.0 || config.resample_threshold > 1.0)
    throw InvalidInput("resample threshold must lie in [0, 1]");
  const std::uint64_t per_particle = rollout_cost(graph, config.cost_mode);
  const std::size_t count = per_particle == 0 ? 0 : config.budget / per_particle;
  if (count == 0) throw BudgetError("budget cannot pay for a single particle rollout");

  const int n_vars = graph.num_variables();
  BudgetLedger ledger(config.budget, config.cost_mode);
  Rng rng(config.seed);
  std::vector<Assignment> particles(count);
  for (auto& p : particles) p.reserve(n_vars);
  std::vector<double> log_w(count, 0.0);

  ParticleResult out;
  out.num_particles = count;
  for (int n = 0; n < n_vars; ++n) {
    if (!ledger.charge(count * reward_cost(graph, n + 1, config.cost_mode)))
      throw std::logic_error("particle budget arithmetic is inconsistent");
    for (std::size_t i = 0; i < count; ++i) {
      Assignment& x = particles[i];
      const auto q = proposal.values(graph, x);
      const double norm = logsumexp(q);
      const int a = sample_categorical(q, rng);
      x.push_back(a);
      const double r = reward(graph, x);
      log_w[i] = extended_add(log_w[i], r == kNegInf ? kNegInf : r - (q[a] - norm));
    }
    if (n + 1 < n_vars && config.resample_threshold > 0.0) {
      const double ess = effective_sample_size(log_w);
      if (ess > 0.0 && ess < config.resample_threshold * static_cast<double>(count)) {
        const double lse = logsumexp(log_w);
        out.log_evidence += lse - std::log(static_cast<double>(count));
        std::vector<double> probs(count);
        for (std::size_t i = 0; i < count; ++i) probs[i] = std::exp(log_w[i] - lse);
        const auto ancestors = resample_indices(probs, count, config.scheme, rng);
        std::vector<Assignment> next(count);
        for (std::size_t i = 0; i < count; ++i) next[i] = particles[ancestors[i]];
        particles = std::move(next);
        std::fill(log_w.begin(), log_w.end(), 0.0);
        ++out.resample_count;
      }
    }
  }
  const double lse = logsumexp(log_w);
  out.spent = ledger.spent();
  if (lse == kNegInf) {
    out.degenerate = true;
    out.log_evidence = kNegInf;
    return out;
  }
  out.log_evidence += lse - std::log(static_cast<double>(count));
  out.atoms = WeightedAtoms::from_log_weights(particles, log_w);
  return out;
}

ParticleResult sis(const FactorGraph& graph, const PriorValueFunction& proposal,
                   std::uint64_t budget, std::uint64_t seed, CostMode cost_mode) {
  SmcConfig config;
  config.budget = budget;
  config.resample_threshold = 0.0;
  config.cost_mode = cost_mode;
  config.seed = seed;
  return smc(graph, proposal, config);
}

// --- Gibbs -------------------------------------------------------------------

ChainResult gibbs(const FactorGraph& graph, const GibbsConfig& config) {
  if (config.sweeps < 1) throw InvalidInput("Gibbs needs at least one sweep");
  const int n_vars = graph.num_variables();
  const int k = graph.num_states();

  std::vector<std::uint64_t> site_cost(n_vars);
  std::uint64_t sweep_cost = 0;
  for (int v = 0; v < n_vars; ++v) {
    if (config.conditional_cost > 0)
      site_cost[v] = config.conditional_cost;
    else if (config.cost_mode == CostMode::reward_eval)
      site_cost[v] = k;
    else
      site_cost[v] = static_cast<std::uint64_t>(k) * graph.factors_of_variable(v).size();
    sweep_cost += site_cost[v];
  }
  const std::uint64_t sample_cost = sweep_cost * static_cast<std::uint64_t>(config.sweeps);

  BudgetLedger ledger(config.budget, config.cost_mode);
  Rng rng(config.seed);
  std::uniform_int_distribution<int> uniform_state(0, k - 1);
  std::vector<Assignment> samples;
  ChainResult out;
  std::vector<int> x(n_vars);
  std::vector<double> logits(k);
  while (ledger.charge(sample_cost)) {
    for (int v = 0; v < n_vars; ++v) x[v] = uniform_state(rng);
    for (int sweep = 0; sweep < config.sweeps; ++sweep) {
      for (int v = 0; v < n_vars; ++v) {
        for (int b = 0; b < k; ++b) {
          x[v] = b;
          double total = 0.0;
          for (std::size_t m : graph.factors_of_variable(v))
            total = extended_add(total, graph.factor_value_by_variable(m, x));
          logits[b] = total;
        }
        if (logsumexp(logits) == kNegInf) {
          x[v] = uniform_state(rng);
          ++out.zero_mass_restarts;
        } else {
          x[v] = sample_categorical(logits, rng);
        }
      }
    }
    samples.push_back(to_depth_order(graph, x));
  }
  if (samples.empty()) throw BudgetError("budget cannot pay for a single Gibbs sample");
  out.num_samples = samples.size();
  out.spent = ledger.spent();
  out.atoms = WeightedAtoms::uniform(samples);
  return out;
}

// --- loopy BP ----------------------------------------------------------------

namespace {

// Log-domain sum-product on the factor graph. Edge e = (factor m, slot j).
class LoopyBp {
 public:
  explicit LoopyBp(const FactorGraph& graph) : graph_(graph), k_(graph.num_states()) {
    var_edges_.resize(graph.num_variables());
    for (std::size_t m = 0; m < graph.num_factors(); ++m) {
      offset_.push_back(edge_factor_.size());
      const auto& scope = graph.factor(m).scope;
      for (std::size_t j = 0; j < scope.size(); ++j) {
        var_edges_[scope[j]].push_back(edge_factor_.size());
        edge_factor_.push_back(m);
        edge_var_.push_back(scope[j]);
      }
    }
    to_factor_.assign(edge_factor_.size(), std::vector<double>(k_, 0.0));
    to_var_.assign(edge_factor_.size(), std::vector<double>(k_, 0.0));
  }

  void reset(std::span<const int> clamp) {
    for (std::size_t e = 0; e < edge_factor_.size(); ++e) {
      set_variable_message(e, clamp, /*uniform=*/true);
      std::fill(to_var_[e].begin(), to_var_[e].end(), 0.0);
    }
  }

  void round(std::span<const int> clamp) {
    for (std::size_t m = 0; m < graph_.num_factors(); ++m) update_factor(m);
    for (std::size_t e = 0; e < edge_factor_.size(); ++e) set_variable_message(e, clamp, false);
  }

  std::vector<double> belief(int variable) const {
    std::vector<double> log_b(k_, 0.0);
    for (std::size_t e : var_edges_[variable])
      for (int b = 0; b < k_; ++b) log_b[b] = extended_add(log_b[b], to_var_[e][b]);
    const double norm = logsumexp(log_b);
    if (norm == kNegInf) throw ZeroMassError("loopy BP belief has zero mass");
    for (double& v : log_b) v = std::exp(v - norm);
    return log_b;
  }

 private:
  static void normalize(std::vector<double>& msg) {
    const double norm = logsumexp(msg);
    if (norm == kNegInf || norm == kPosInf) return;
    for (double& v : msg) v -= norm;
  }

  void set_variable_message(std::size_t e, std::span<const int> clamp, bool uniform) {
    const int v = edge_var_[e];
    auto& msg = to_factor_[e];
    if (clamp[v] >= 0) {
      std::fill(msg.begin(), msg.end(), kNegInf);
      msg[clamp[v]] = 0.0;
      return;
    }
    std::fill(msg.begin(), msg.end(), 0.0);
    if (!uniform) {
      for (std::size_t other : var_edges_[v]) {
        if (other == e) continue;
        for (int b = 0; b < k_; ++b) msg[b] = extended_add(msg[b], to_var_[other][b]);
      }
    }
    normalize(msg);
  }

  void update_factor(std::size_t m) {
    const Factor& f = graph_.factor(m);
    const std::size_t arity = f.scope.size();
    const std::size_t base = offset_[m];
    for (std::size_t j = 0; j < arity; ++j)
      std::fill(to_var_[base + j].begin(), to_var_[base + j].end(), kNegInf);
    std::vector<int> digits(arity, 0);
    for (std::size_t idx = 0; idx < f.log_table.size(); ++idx) {
      for (std::size_t j = 0; j < arity; ++j) {
        double total = f.log_table[idx];
        for (std::size_t i = 0; i < arity && total != kNegInf; ++i)
          if (i != j) total = extended_add(total, to_factor_[base + i][digits[i]]);
        double& slot = to_var_[base + j][digits[j]];
        slot = logaddexp(slot, total);
      }
      for (int i = static_cast<int>(arity) - 1; i >= 0; --i) {
        if (++digits[i] < k_) break;
        digits[i] = 0;
      }
    }
    for (std::size_t j = 0; j < arity; ++j) normalize(to_var_[base + j]);
  }

  const FactorGraph& graph_;
  int k_;
  std::vector<std::size_t> offset_;
  std::vector<std::size_t> edge_factor_;
  std::vector<int> edge_var_;
  std::vector<std::vector<std::size_t>> var_edges_;
  std::vector<std::vector<double>> to_factor_;
  std::vector<std::vector<double>> to_var_;
};

std::vector<double> run_bp(LoopyBp& bp, const FactorGraph& graph, std::span<const int> prefix,
                           int rounds) {
  std::vector<int> clamp(graph.num_variables(), -1);
  for (std::size_t d = 0; d < prefix.size(); ++d) clamp[graph.variable_at(static_cast<int>(d))] = prefix[d];
  bp.reset(clamp);
  for (int r = 0; r < rounds; ++r) bp.round(clamp);
  return bp.belief(graph.variable_at(static_cast<int>(prefix.size())));
}

}  // namespace

std::vector<double> bp_conditional(const FactorGraph& graph, std::span<const int> prefix,
                                   int message_rounds) {
  if (static_cast<int>(prefix.size()) >= graph.num_variables())
    throw InvalidInput("bp_conditional needs a prefix shorter than N");
  if (message_rounds < 0) throw InvalidInput("message rounds must be non-negative");
  LoopyBp bp(graph);
  return run_bp(bp, graph, prefix, message_rounds);
}

ChainResult bp_sample(const FactorGraph& graph, const BpConfig& config) {
  if (config.message_rounds < 1) throw InvalidInput("BP sampling needs at least one message round");
  const int n_vars = graph.num_variables();
  const std::uint64_t step_cost = static_cast<std::uint64_t>(config.message_rounds) *
                                  graph.num_factors() * config.cost_per_factor_round;
  const std::uint64_t sample_cost = step_cost * n_vars;
  if (sample_cost == 0) throw InvalidInput("BP cost per sample must be positive");

  BudgetLedger ledger(config.budget, config.cost_mode);
  Rng rng(config.seed);
  LoopyBp bp(graph);
  std::vector<Assignment> samples;
  while (ledger.charge(sample_cost)) {
    Assignment x;
    x.reserve(n_vars);
    for (int d = 0; d < n_vars; ++d) {
      const auto probs = run_bp(bp, graph, x, config.message_rounds);
      std::vector<double> logits(probs.size());
      for (std::size_t b = 0; b < probs.size(); ++b)
        logits[b] = probs[b] > 0.0 ? std::log(probs[b]) : kNegInf;
      x.push_back(sample_categorical(logits, rng));
    }
    samples.push_back(std::move(x));
  }
  if (samples.empty()) throw BudgetError("budget cannot pay for a single BP sample");
  ChainResult out;
  out.num_samples = samples.size();
  out.spent = ledger.spent();
  out.atoms = WeightedAtoms::uniform(samples);
  return out;
}

}  // namespace treesample
