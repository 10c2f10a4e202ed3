#include <benchmark/benchmark.h>

#include <vector>

#include "treesample/baselines.hpp"
#include "treesample/exact.hpp"
#include "treesample/generators.hpp"
#include "treesample/metrics.hpp"
#include "treesample/mlp.hpp"
#include "treesample/prior.hpp"
#include "treesample/search.hpp"

using namespace treesample;

namespace {

const HeuristicPrior kHeuristic;

void BM_BuildTree(benchmark::State& state) {
  const FactorGraph g = gen_chain(10, 5, 1);
  const auto budget = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    SearchTree tree = build_tree(g, kHeuristic, {budget, 0.5, 0.1, CostMode::reward_eval, 0});
    benchmark::DoNotOptimize(tree.root_value());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildTree)->Arg(1'000)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_TreeSampling(benchmark::State& state) {
  const FactorGraph g = gen_chain(10, 5, 1);
  const SearchTree tree = build_tree(g, kHeuristic, {10'000, 0.5, 0.1, CostMode::reward_eval, 0});
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(tree.sample(rng));
}
BENCHMARK(BM_TreeSampling);

void BM_Smc(benchmark::State& state) {
  const FactorGraph g = gen_chain(10, 5, 1);
  SmcConfig cfg;
  cfg.budget = static_cast<std::uint64_t>(state.range(0));
  cfg.resample_threshold = 0.9;
  for (auto _ : state) benchmark::DoNotOptimize(smc(g, kHeuristic, cfg).log_evidence);
}
BENCHMARK(BM_Smc)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_Gibbs(benchmark::State& state) {
  const FactorGraph g = gen_chain(10, 5, 1);
  GibbsConfig cfg;
  cfg.budget = 10'000;
  cfg.sweeps = 5;
  for (auto _ : state) benchmark::DoNotOptimize(gibbs(g, cfg).num_samples);
}
BENCHMARK(BM_Gibbs)->Unit(benchmark::kMillisecond);

void BM_BpConditional(benchmark::State& state) {
  const FactorGraph g = gen_fg1(20, 3, 2);
  const std::vector<int> prefix(10, 0);
  for (auto _ : state) benchmark::DoNotOptimize(bp_conditional(g, prefix, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BpConditional)->Arg(2)->Arg(10);

void BM_SolveExact(benchmark::State& state) {
  const FactorGraph g = gen_fg1(static_cast<int>(state.range(0)), 3, 4);
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(g).log_z());
}
BENCHMARK(BM_SolveExact)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_SolveChain(benchmark::State& state) {
  const FactorGraph g = gen_chain(static_cast<int>(state.range(0)), 5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_chain(g).log_z);
}
BENCHMARK(BM_SolveChain)->Arg(10)->Arg(100);

void BM_MlpForward(benchmark::State& state) {
  const int n = 20, k = 2;
  const Mlp net({n * (k + 1), default_hidden_layers(), k}, 1);
  const auto batch = static_cast<std::size_t>(state.range(0));
  const std::vector<double> inputs(batch * n * (k + 1), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(inputs, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(128);

void BM_MlpTrainStep(benchmark::State& state) {
  const int n = 20, k = 2;
  Mlp net({n * (k + 1), default_hidden_layers(), k}, 1);
  Adam adam(net.parameters().size());
  const std::size_t batch = 128;
  const std::vector<double> inputs(batch * n * (k + 1), 0.5), targets(batch * k, -3.0);
  std::vector<double> grad(net.parameters().size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.loss_and_gradient(inputs, targets, batch, grad));
    adam.step(net.parameters(), grad);
  }
}
BENCHMARK(BM_MlpTrainStep)->Unit(benchmark::kMillisecond);

void BM_DeltaKlSampler(benchmark::State& state) {
  const FactorGraph g = gen_chain(10, 5, 1);
  const SearchTree tree = build_tree(g, kHeuristic, {10'000, 0.5, 0.1, CostMode::reward_eval, 0});
  for (auto _ : state) benchmark::DoNotOptimize(delta_kl_sampler(tree, g, 10'000, 5).mean);
}
BENCHMARK(BM_DeltaKlSampler)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
