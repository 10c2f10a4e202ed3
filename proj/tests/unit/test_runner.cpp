#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "treesample/errors.hpp"
#include "treesample/generators.hpp"
#include "treesample/runner.hpp"

using namespace treesample;

namespace {

const HeuristicPrior kHeuristic;

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
  CHECK(all_methods().size() == 5);
  CHECK_THROWS_AS(parse_method("mcmc"), InvalidInput);
}

TEST_CASE("run config JSON") {
  const RunConfig c = run_config_from_json(R"({"method":"smc","budget":500,"resample_threshold":0.3})");
  CHECK(c.method == Method::smc);
  CHECK(c.budget == 500);
  CHECK(c.resample_threshold == 0.3);
  CHECK(c.c == RunConfig{}.c);
  CHECK_THROWS_AS(run_config_from_json(R"({"budgets":5})"), InvalidInput);
  CHECK_THROWS_AS(run_config_from_json(R"({"budget":"many"})"), InvalidInput);
  CHECK_THROWS_AS(run_config_from_json("[1]"), InvalidInput);
  CHECK_THROWS_AS(run_config_from_json(R"({"method":"nope"})"), InvalidInput);
  const RunConfig back = run_config_from_json(run_config_to_json(c));
  CHECK(run_config_to_json(back) == run_config_to_json(c));
}

TEST_CASE("presets fill method hyperparameters") {
  for (Family f : {Family::chains, Family::permuted_chains, Family::fg1, Family::fg2}) {
    RunConfig c;
    const Preset p = preset_for(f);
    c.apply(p);
    CHECK(c.c == p.c);
    CHECK(c.epsilon == p.epsilon);
    CHECK(c.resample_threshold == p.resample_threshold);
    CHECK(c.gibbs_sweeps == p.gibbs_sweeps);
    CHECK(c.message_rounds == p.message_rounds);
    CHECK(p.c > 0);
    CHECK(p.resample_threshold >= 0);
    CHECK(p.resample_threshold <= 1);
  }
}

TEST_CASE("oracle selection") {
  const auto chain = find_oracle(gen_chain(10, 5, 1));
  REQUIRE(chain);
  CHECK(chain->name == "chain");
  const auto perm = find_oracle(gen_permuted_chain(10, 5, 1));
  REQUIRE(perm);
  CHECK(perm->name == "chain");
  CHECK(std::abs(perm->stats.log_z) < 1e-9);
  const FactorGraph small = testing::random_graph(4, 3, 1, 4, 3);
  const auto bf = find_oracle(small);
  REQUIRE(bf);
  CHECK(bf->name == "brute_force");
  CHECK(bf->stats.log_z == doctest::Approx(testing::direct_log_z(small)).epsilon(1e-12));
  CHECK_FALSE(find_oracle(testing::random_graph(8, 3, 1, 6, 3), 100));
}

TEST_CASE("treesample on a factor-free target reports zero KL") {
  const FactorGraph g = testing::zero_graph(3, 3);
  RunConfig c;
  c.budget = 1000;
  c.metric_samples = 200;
  const RunResult r = run_method(g, c, kHeuristic, find_oracle(g));
  REQUIRE(r.report.kl);
  CHECK(std::abs(*r.report.kl) < 1e-9);
  CHECK(r.report.spent == 3 + 9 + 27);
  // unary factors only: a trivially chain-structured graph
  CHECK(r.report.oracle == std::optional<std::string>("chain"));
}

TEST_CASE("sis and smc without resampling agree") {
  const FactorGraph g = gen_chain(6, 3, 2);
  RunConfig c;
  c.budget = 600;
  c.seed = 5;
  c.method = Method::sis;
  const RunResult a = run_method(g, c, kHeuristic, find_oracle(g));
  c.method = Method::smc;
  c.resample_threshold = 0.0;
  const RunResult b = run_method(g, c, kHeuristic, find_oracle(g));
  CHECK(a.atoms->atoms == b.atoms->atoms);
  CHECK(a.atoms->weights == b.atoms->weights);
  CHECK(*a.report.kl == *b.report.kl);
}

TEST_CASE("chain runs use the chain oracle and respect the budget") {
  const FactorGraph g = gen_chain(10, 5, 1);
  const auto oracle = find_oracle(g);
  for (Method m : all_methods()) {
    RunConfig c;
    c.method = m;
    c.budget = 10'000;
    c.metric_samples = 500;
    c.apply(preset_for(Family::chains));
    const RunResult r = run_method(g, c, kHeuristic, oracle);
    CHECK(r.report.oracle == std::optional<std::string>("chain"));
    CHECK(r.report.kl.has_value());
    CHECK(r.report.spent <= 10'000);
    CHECK(*r.report.kl >= -1e-9);
  }
}

TEST_CASE("tiny budgets raise budget errors") {
  const FactorGraph g = gen_chain(10, 5, 1);
  for (Method m : all_methods()) {
    RunConfig c;
    c.method = m;
    c.budget = 0;
    CHECK_THROWS_AS(run_method(g, c, kHeuristic, std::nullopt), BudgetError);
  }
}

TEST_CASE("bench produces one row per cell in canonical order") {
  BenchSpec spec;
  spec.instance.family = Family::chains;
  spec.instance.n = 5;
  spec.instance.k = 3;
  spec.methods = {Method::sis, Method::treesample};
  spec.budgets = {200};
  spec.instances = 3;
  spec.seed = 10;
  spec.run.metric_samples = 200;
  const auto rows = run_bench(spec);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].method == Method::sis);
  CHECK(rows[3].method == Method::treesample);
  for (int i = 0; i < 3; ++i) CHECK(rows[i].instance == i);
  const std::string csv = bench_rows_csv(rows);
  CHECK(count_lines(csv) == 7);
  const std::string summary = bench_summary_csv(rows);
  CHECK(count_lines(summary) == 3);

  spec.threads = 3;
  CHECK(bench_rows_csv(run_bench(spec)) == csv);
}

TEST_CASE("bench records failing cells and continues") {
  BenchSpec spec;
  spec.instance.family = Family::chains;
  spec.instance.n = 4;
  spec.instance.k = 2;
  spec.methods = {Method::sis};
  spec.budgets = {1, 100};
  spec.instances = 2;
  const auto rows = run_bench(spec);
  REQUIRE(rows.size() == 4);
  CHECK_FALSE(rows[0].report);
  CHECK_FALSE(rows[0].error.empty());
  CHECK(rows[2].report);
}

TEST_CASE("quantiles interpolate linearly") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
  CHECK(quantile({7.0}, 0.9) == 7.0);
}
