#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "treesample/model.hpp"

namespace treesample {

enum class Family { chains, permuted_chains, fg1, fg2 };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

/// Everything a generator needs. Generation is a pure function of the spec.
struct GeneratorSpec {
  Family family = Family::chains;
  int n = 10;
  int k = 5;
  std::uint64_t seed = 0;

  // chains: unary potentials ~ GP with kernel
  //   variance * exp(-((dn)^2 + (dk)^2) / (2 bandwidth^2))
  double kernel_variance = 0.5;
  double kernel_bandwidth = 1.0;
  double pairwise_scale = 2.5;
  // permuted_chains
  double dirichlet_alpha = 1.0;
  // fg1 / fg2
  int max_clique = 4;
  int rejection_cap = 10'000;
  double fg2_scale = 2.0;
};

/// Dispatches on spec.family.
FactorGraph generate(const GeneratorSpec& spec);

/// N unary GP factors plus N - 1 torus-distance pairwise factors.
FactorGraph gen_chain(const GeneratorSpec& spec);
FactorGraph gen_chain(int n, int k, std::uint64_t seed);

/// Markov chain along a random permutation with Dirichlet CPTs and a
/// Dirichlet prior on the first chained variable; identity ordering.
FactorGraph gen_permuted_chain(const GeneratorSpec& spec);
FactorGraph gen_permuted_chain(int n, int k, std::uint64_t seed);

/// Connected Erdos-Renyi graph, p = 2 log(N) / N, one N(0, 1) factor per
/// maximal clique, ordering from fg1_ordering.
FactorGraph gen_fg1(const GeneratorSpec& spec);
FactorGraph gen_fg1(int n, int k, std::uint64_t seed);

/// Descending scope size (ties by factor index); unseen scope variables are
/// appended in scope order.
std::vector<int> fg1_ordering(const FactorGraph& graph);

/// Binary NOT (xor) factors on variable pairs plus MAJORITY factors on the
/// maximal cliques of a connected Erdos-Renyi graph over pairs, all scaled.
FactorGraph gen_fg2(const GeneratorSpec& spec);
FactorGraph gen_fg2(int n, std::uint64_t seed);

/// Torus distance on {0..K-1} with 0 and K-1 adjacent.
int torus_distance(int a, int b, int k);

/// 2 * xor table over (x, x') in row-major order, scaled.
std::vector<double> not_table(double scale);
/// scale if at least half of the scope variables are in state 1 (the second
/// state), else 0.
std::vector<double> majority_table(int arity, double scale);

// --- graph helpers -----------------------------------------------------------

using AdjacencyMatrix = std::vector<std::vector<std::uint8_t>>;

AdjacencyMatrix erdos_renyi(int n, double p, std::uint64_t seed);
bool is_connected(const AdjacencyMatrix& adj);
/// All maximal cliques (Bron-Kerbosch with pivoting), each sorted, in a
/// deterministic order.
std::vector<std::vector<int>> maximal_cliques(const AdjacencyMatrix& adj);

}  // namespace treesample
