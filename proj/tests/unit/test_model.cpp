#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "treesample/errors.hpp"
#include "treesample/logmath.hpp"
#include "treesample/model.hpp"

using namespace treesample;

TEST_CASE("logsumexp is overflow-safe and handles -inf") {
  std::vector<double> big{1000.0, 1000.0};
  CHECK(logsumexp(big) == doctest::Approx(1000.0 + std::log(2.0)));
  std::vector<double> all_neg{kNegInf, kNegInf};
  CHECK(logsumexp(all_neg) == kNegInf);
  std::vector<double> mixed{kNegInf, 0.0};
  CHECK(logsumexp(mixed) == 0.0);
  CHECK(logsumexp(std::vector<double>{}) == kNegInf);
  std::vector<double> tiny{-1000.0, -1000.0};
  CHECK(std::isfinite(logsumexp(tiny)));
  CHECK(extended_add(kNegInf, 5.0) == kNegInf);
  CHECK_THROWS_AS(log_softmax(all_neg), std::domain_error);
}

TEST_CASE("factor graph validation") {
  CHECK_THROWS_AS(FactorGraph(2, 2, {Factor{{0}, {0, 0}}}), InvalidInput);  // variable 1 uncovered
  CHECK_THROWS_AS(FactorGraph(2, 2, {Factor{{1, 0}, {0, 0, 0, 0}}}), InvalidInput);
  CHECK_THROWS_AS(FactorGraph(2, 2, {Factor{{0, 1}, {0, 0, 0}}}), InvalidInput);
  CHECK_THROWS_AS(FactorGraph(1, 2, {Factor{{0}, {0, std::nan("")}}}), InvalidInput);
  CHECK_THROWS_AS(FactorGraph(1, 2, {Factor{{0}, {0, kPosInf}}}), InvalidInput);
  CHECK_THROWS_AS(FactorGraph(2, 2, {Factor{{0, 1}, {0, 0, 0, 0}}}, {0, 0}), InvalidInput);
  CHECK_THROWS_AS(FactorGraph(1, 1, {Factor{{0}, {0}}}), InvalidInput);
  CHECK_NOTHROW(FactorGraph(1, 2, {Factor{{0}, {0, kNegInf}}}));
}

TEST_CASE("reward of a single unary factor is a table lookup") {
  const FactorGraph g(1, 2, {Factor{{0}, {0.3, -0.7}}});
  const std::vector<int> x{1};
  CHECK(reward(g, x) == -0.7);
  const std::vector<int> bad{2};
  CHECK_THROWS_AS(reward(g, bad), InvalidInput);
  CHECK_THROWS_AS(reward(g, std::vector<int>{}), InvalidInput);
}

TEST_CASE("rewards partition factors by deepest scope position") {
  // psi_a(x0, x2), psi_b(x1): M_1 empty, M_2 = {b}, M_3 = {a}.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<double> ta(4), tb(2);
  for (double& v : ta) v = normal(rng);
  for (double& v : tb) v = normal(rng);
  const FactorGraph g(3, 2, {Factor{{0, 2}, ta}, Factor{{1}, tb}});
  CHECK(g.factors_at_depth(1).empty());
  REQUIRE(g.factors_at_depth(2).size() == 1);
  CHECK(g.factors_at_depth(2)[0] == 1);
  REQUIRE(g.factors_at_depth(3).size() == 1);
  CHECK(g.factors_at_depth(3)[0] == 0);
  for (const auto& x : testing::all_configurations(3, 2)) {
    CHECK(reward(g, std::span<const int>(x.data(), 1)) == 0.0);
    const double total = reward(g, std::span<const int>(x.data(), 1)) +
                         reward(g, std::span<const int>(x.data(), 2)) + reward(g, x);
    CHECK(total == doctest::Approx(testing::direct_log_density(g, x)).epsilon(1e-15));
  }
}

TEST_CASE("reward cost under both modes") {
  const FactorGraph g(2, 2,
                      {Factor{{0}, {0, 0}}, Factor{{1}, {0, 0}}, Factor{{0, 1}, {0, 0, 0, 0}},
                       Factor{{1}, {1, 1}}});
  CHECK(reward_cost(g, 2, CostMode::factor_eval) == 3);
  CHECK(reward_cost(g, 2, CostMode::reward_eval) == 1);
  const FactorGraph h(2, 2, {Factor{{0, 1}, {0, 0, 0, 0}}});
  CHECK(reward_cost(h, 1, CostMode::factor_eval) == 0);
  CHECK(reward_cost(h, 1, CostMode::reward_eval) == 1);
  CHECK(rollout_cost(g, CostMode::reward_eval) == 2);
  CHECK(rollout_cost(g, CostMode::factor_eval) == 4);
}

TEST_CASE("rewards sum to the log density under any ordering") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const FactorGraph g = testing::random_graph(4, 3, seed, 4, 3, 0.05, true);
    std::mt19937_64 rng(seed + 100);
    std::uniform_int_distribution<int> state(0, 2);
    for (int trial = 0; trial < 100; ++trial) {
      Assignment by_var(4);
      for (int& v : by_var) v = state(rng);
      const Assignment x = to_depth_order(g, by_var);
      double total = 0.0;
      for (int n = 1; n <= 4; ++n) total = extended_add(total, reward(g, std::span<const int>(x.data(), n)));
      const double direct = testing::direct_log_density(g, by_var);
      const double lud = log_unnormalized_density(g, x);
      if (direct == kNegInf) {
        CHECK(total == kNegInf);
        CHECK(lud == kNegInf);
      } else {
        CHECK(total == doctest::Approx(direct).epsilon(1e-12));
        CHECK(lud == doctest::Approx(direct).epsilon(1e-12));
      }
    }
    std::size_t covered = 0;
    for (int n = 1; n <= 4; ++n) covered += g.factors_at_depth(n).size();
    CHECK(covered == g.num_factors());
  }
}

TEST_CASE("log density edge cases") {
  const FactorGraph zero = testing::zero_graph(3, 2);
  for (const auto& x : testing::all_configurations(3, 2)) CHECK(log_unnormalized_density(zero, x) == 0.0);
  const FactorGraph g(1, 2, {Factor{{0}, {kNegInf, 0.0}}});
  CHECK(log_unnormalized_density(g, std::vector<int>{0}) == kNegInf);
  CHECK_THROWS_AS(log_unnormalized_density(zero, std::vector<int>{0, 1}), InvalidInput);
}

TEST_CASE("budget ledger") {
  BudgetLedger ledger(10);
  for (int i = 0; i < 9; ++i) CHECK(ledger.charge(1));
  CHECK(ledger.charge(1));
  CHECK(ledger.spent() == 10);
  CHECK_FALSE(ledger.charge(1));
  CHECK(ledger.spent() == 10);
  BudgetLedger empty(10);
  CHECK(empty.charge(0));
  CHECK(empty.spent() == 0);
  CHECK_FALSE(empty.charge(11));
  CHECK(empty.spent() == 0);
}

TEST_CASE("reward oracle charges per cost mode and refuses overdraft") {
  const FactorGraph g(2, 2, {Factor{{0}, {0, 1}}, Factor{{0, 1}, {0, 1, 2, 3}}, Factor{{1}, {5, 6}}});
  BudgetLedger ledger(3, CostMode::factor_eval);
  RewardOracle oracle(g, ledger);
  const std::vector<int> x{1, 1};
  auto r = oracle.evaluate(x);
  REQUIRE(r);
  CHECK(*r == 9.0);
  CHECK(ledger.spent() == 2);
  CHECK_FALSE(oracle.evaluate(x));
  CHECK(ledger.spent() == 2);
  CHECK(oracle.evaluate(std::span<const int>(x.data(), 1)));
  CHECK(ledger.spent() == 3);
}

TEST_CASE("graph JSON round trip is bit-exact") {
  const FactorGraph g = testing::random_graph(5, 3, 11, 4, 3, 0.1, true);
  const FactorGraph back = graph_from_json(graph_to_json(g));
  REQUIRE(back.num_factors() == g.num_factors());
  CHECK(std::equal(back.ordering().begin(), back.ordering().end(), g.ordering().begin()));
  for (std::size_t m = 0; m < g.num_factors(); ++m) {
    CHECK(back.factor(m).scope == g.factor(m).scope);
    const auto& a = back.factor(m).log_table;
    const auto& b = g.factor(m).log_table;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::bit_cast<std::uint64_t>(a[i]) == std::bit_cast<std::uint64_t>(b[i]));
  }
  CHECK(graph_to_json(back) == graph_to_json(g));
  CHECK(graph_to_json(g).find("\"-inf\"") != std::string::npos);
}

TEST_CASE("graph JSON rejects malformed input") {
  CHECK_THROWS_AS(graph_from_json("{"), InvalidInput);
  CHECK_THROWS_AS(graph_from_json(R"({"n":1,"k":2,"ordering":[0],"factors":[{"scope":[0],"log_table":[0,"inf"]}]})"),
                  InvalidInput);
  CHECK_THROWS_AS(graph_from_json(R"({"n":1,"k":2,"ordering":[0],"factors":[{"scope":[1],"log_table":[0,0]}]})"),
                  InvalidInput);
  CHECK_NOTHROW(graph_from_json(R"({"n":1,"k":2,"ordering":[0],"factors":[{"scope":[0],"log_table":[0,"-inf"]}]})"));
}

TEST_CASE("depth and variable order conversions are inverse") {
  const FactorGraph g = testing::random_graph(5, 2, 3, 2, 2, 0.0, true);
  const Assignment by_var{1, 0, 1, 1, 0};
  const Assignment by_depth = to_depth_order(g, by_var);
  for (int d = 0; d < 5; ++d) CHECK(by_depth[d] == by_var[g.variable_at(d)]);
  CHECK(to_variable_order(g, by_depth) == by_var);
}
