#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treesample/baselines.hpp"
#include "treesample/exact.hpp"
#include "treesample/generators.hpp"
#include "treesample/metrics.hpp"
#include "treesample/model.hpp"
#include "treesample/prior.hpp"

namespace treesample {

enum class Method { treesample, sis, smc, gibbs, bp };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

/// Method hyperparameters per instance family, from our own tuning runs.
struct Preset {
  double c = 2.0;
  double epsilon = 0.1;
  double resample_threshold = 0.5;
  int gibbs_sweeps = 10;
  int message_rounds = 10;
};

Preset preset_for(Family family);

struct RunConfig {
  Method method = Method::treesample;
  std::uint64_t budget = 10'000;
  CostMode cost_mode = CostMode::reward_eval;
  double c = 2.0;
  double epsilon = 0.1;
  double resample_threshold = 0.5;
  ResamplingScheme resampling = ResamplingScheme::multinomial;
  int gibbs_sweeps = 10;
  int message_rounds = 10;
  /// Monte Carlo samples for sampler-based metrics (TreeSample).
  std::size_t metric_samples = 10'000;
  std::uint64_t seed = 0;
  /// "heuristic" or a checkpoint path.
  std::string prior = "heuristic";
  std::uint64_t exact_cap = kDefaultExactCap;

  void apply(const Preset& preset);
};

/// Parses a JSON object; every key is optional and unknown keys are rejected
/// with InvalidInput.
RunConfig run_config_from_json(std::string_view text, RunConfig base = {});
std::string run_config_to_json(const RunConfig& config);

/// Exact target statistics when a chain ordering exists or K^N <= cap.
struct Oracle {
  std::string name;  // "chain" or "brute_force"
  TargetStats stats;
};
std::optional<Oracle> find_oracle(const FactorGraph& graph, std::uint64_t cap = kDefaultExactCap);

struct RunResult {
  EvalReport report;
  /// Set for the atom-producing methods.
  std::optional<WeightedAtoms> atoms;
  /// Set for TreeSample when requested.
  std::optional<std::string> tree_json;
};

/// Runs one method and evaluates it. Throws BudgetError when the budget
/// cannot pay for one unit of the method's work.
RunResult run_method(const FactorGraph& graph, const RunConfig& config,
                     const PriorValueFunction& prior, const std::optional<Oracle>& oracle,
                     bool dump_tree = false);

// --- benchmark sweeps ----------------------------------------------------------

struct BenchSpec {
  GeneratorSpec instance;  // seed is replaced per instance
  std::vector<Method> methods;
  std::vector<std::uint64_t> budgets;
  int instances = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  RunConfig run;  // method and budget are replaced per cell
};

struct BenchRow {
  Method method = Method::treesample;
  std::uint64_t budget = 0;
  int instance = 0;
  std::uint64_t instance_seed = 0;
  std::string graph_id;
  std::optional<EvalReport> report;
  std::string error;
};

/// Every (instance, method, budget) cell. Rows come back in canonical order
/// (method list order, then budget order, then instance) regardless of the
/// thread count.
std::vector<BenchRow> run_bench(const BenchSpec& spec);

std::string bench_rows_csv(const std::vector<BenchRow>& rows);
/// One line per (method, budget): count, failures, mean, stddev, median and
/// quartiles of kl (delta_kl when no oracle applied), plus median energy and
/// entropy deltas.
std::string bench_summary_csv(const std::vector<BenchRow>& rows);

/// Linear-interpolated quantile of unsorted values; q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace treesample
