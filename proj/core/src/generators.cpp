#include "treesample/generators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "treesample/distribution.hpp"
#include "treesample/errors.hpp"

namespace treesample {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::chains: return "chains";
    case Family::permuted_chains: return "permuted_chains";
    case Family::fg1: return "fg1";
    case Family::fg2: return "fg2";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "chains" || name == "chain") return Family::chains;
  if (name == "permuted_chains" || name == "permuted_chain") return Family::permuted_chains;
  if (name == "fg1") return Family::fg1;
  if (name == "fg2") return Family::fg2;
  throw InvalidInput("unknown family '" + std::string(name) + "'");
}

int torus_distance(int a, int b, int k) {
  const int d = std::abs(a - b);
  return std::min(d, k - d);
}

std::vector<double> not_table(double scale) { return {0.0, scale, scale, 0.0}; }

std::vector<double> majority_table(int arity, double scale) {
  std::vector<double> table(std::size_t{1} << arity, 0.0);
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    const int ones = std::popcount(idx);
    if (2 * ones >= arity) table[idx] = scale;
  }
  return table;
}

// --- chains ------------------------------------------------------------------

namespace {

void check_size(int n, int k) {
  if (n < 1) throw InvalidInput("generators need N >= 1");
  if (k < 2) throw InvalidInput("generators need K >= 2");
}

}  // namespace

FactorGraph gen_chain(const GeneratorSpec& spec) {
  check_size(spec.n, spec.k);
  const int n = spec.n;
  const int k = spec.k;
  if (static_cast<long>(n) * k > 10'000) throw InvalidInput("chain GP grid N*K must not exceed 10^4");
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const int dim = n * k;
  Eigen::MatrixXd cov(dim, dim);
  const double denom = 2.0 * spec.kernel_bandwidth * spec.kernel_bandwidth;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const double dn = i / k - j / k;
      const double dk = i % k - j % k;
      cov(i, j) = spec.kernel_variance * std::exp(-(dn * dn + dk * dk) / denom);
    }
  Eigen::MatrixXd lower;
  bool ok = false;
  for (double jitter = 1e-8; jitter <= 1e-2 && !ok; jitter *= 10.0) {
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(jittered);
    if (llt.info() == Eigen::Success) {
      lower = llt.matrixL();
      ok = true;
    }
  }
  if (!ok) throw GenerationError("chain GP kernel is not positive definite after jitter escalation");

  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) z(i) = normal(rng);
  const Eigen::VectorXd field = lower * z;

  std::vector<Factor> factors;
  for (int v = 0; v < n; ++v) {
    Factor f{{v}, std::vector<double>(k)};
    for (int s = 0; s < k; ++s) f.log_table[s] = field(v * k + s);
    factors.push_back(std::move(f));
  }
  for (int v = 0; v + 1 < n; ++v) {
    Factor f{{v, v + 1}, std::vector<double>(static_cast<std::size_t>(k) * k)};
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) f.log_table[a * k + b] = spec.pairwise_scale * torus_distance(a, b, k);
    factors.push_back(std::move(f));
  }
  return FactorGraph(n, k, std::move(factors));
}

FactorGraph gen_chain(int n, int k, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.family = Family::chains;
  spec.n = n;
  spec.k = k;
  spec.seed = seed;
  return gen_chain(spec);
}

// --- permuted chains -----------------------------------------------------------

namespace {

std::vector<double> dirichlet_log(int k, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> draws(k);
  double total = 0.0;
  for (double& d : draws) total += (d = gamma(rng));
  for (double& d : draws) d = std::log(d / total);
  return draws;
}

FactorGraph permuted_chain_from(const std::vector<int>& perm, int k, double alpha, Rng& rng) {
  const int n = static_cast<int>(perm.size());
  std::vector<Factor> factors;
  factors.push_back(Factor{{perm[0]}, dirichlet_log(k, alpha, rng)});
  for (int i = 1; i < n; ++i) {
    const int parent = perm[i - 1];
    const int child = perm[i];
    Factor f{{std::min(parent, child), std::max(parent, child)},
             std::vector<double>(static_cast<std::size_t>(k) * k)};
    for (int a = 0; a < k; ++a) {
      const auto row = dirichlet_log(k, alpha, rng);  // log P(child = b | parent = a)
      for (int b = 0; b < k; ++b) {
        const std::size_t idx = parent < child ? a * k + b : b * k + a;
        f.log_table[idx] = row[b];
      }
    }
    factors.push_back(std::move(f));
  }
  return FactorGraph(n, k, std::move(factors));
}

}  // namespace

FactorGraph gen_permuted_chain(const GeneratorSpec& spec) {
  check_size(spec.n, spec.k);
  if (!(spec.dirichlet_alpha > 0.0)) throw InvalidInput("Dirichlet concentration must be positive");
  Rng rng(spec.seed);
  std::vector<int> perm(spec.n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return permuted_chain_from(perm, spec.k, spec.dirichlet_alpha, rng);
}

FactorGraph gen_permuted_chain(int n, int k, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.family = Family::permuted_chains;
  spec.n = n;
  spec.k = k;
  spec.seed = seed;
  return gen_permuted_chain(spec);
}

// --- random graphs -------------------------------------------------------------

namespace {

AdjacencyMatrix erdos_renyi(int n, double p, Rng& rng) {
  AdjacencyMatrix adj(n, std::vector<std::uint8_t>(n, 0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (unit(rng) < p) adj[i][j] = adj[j][i] = 1;
  return adj;
}

using Mask = std::uint64_t;

void bron_kerbosch(const std::vector<Mask>& nbr, Mask r, Mask p, Mask x,
                   std::vector<std::vector<int>>& out) {
  if (p == 0 && x == 0) {
    std::vector<int> clique;
    for (Mask m = r; m; m &= m - 1) clique.push_back(std::countr_zero(m));
    out.push_back(std::move(clique));
    return;
  }
  // Pivot on the vertex of P u X with the most neighbours in P.
  int pivot = -1;
  int best = -1;
  for (Mask m = p | x; m; m &= m - 1) {
    const int u = std::countr_zero(m);
    const int c = std::popcount(p & nbr[u]);
    if (c > best) {
      best = c;
      pivot = u;
    }
  }
  for (Mask m = p & ~nbr[pivot]; m; m &= m - 1) {
    const int v = std::countr_zero(m);
    const Mask bit = Mask{1} << v;
    bron_kerbosch(nbr, r | bit, p & nbr[v], x & nbr[v], out);
    p &= ~bit;
    x |= bit;
  }
}

std::size_t largest(const std::vector<std::vector<int>>& cliques) {
  std::size_t out = 0;
  for (const auto& c : cliques) out = std::max(out, c.size());
  return out;
}

// Rejection-samples a connected graph whose maximal cliques are small enough.
std::vector<std::vector<int>> sample_clique_structure(int nodes, double p, const GeneratorSpec& spec,
                                                      Rng& rng) {
  for (int attempt = 0; attempt < spec.rejection_cap; ++attempt) {
    const auto adj = erdos_renyi(nodes, p, rng);
    if (!is_connected(adj)) continue;
    auto cliques = maximal_cliques(adj);
    if (static_cast<int>(largest(cliques)) > spec.max_clique) continue;
    return cliques;
  }
  throw GenerationError("no admissible random graph within " + std::to_string(spec.rejection_cap) +
                        " attempts");
}

}  // namespace

AdjacencyMatrix erdos_renyi(int n, double p, std::uint64_t seed) {
  Rng rng(seed);
  return erdos_renyi(n, p, rng);
}

bool is_connected(const AdjacencyMatrix& adj) {
  const std::size_t n = adj.size();
  if (n == 0) return true;
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v)
      if (adj[u][v] && !seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count == n;
}

std::vector<std::vector<int>> maximal_cliques(const AdjacencyMatrix& adj) {
  const int n = static_cast<int>(adj.size());
  if (n > 64) throw InvalidInput("clique enumeration supports at most 64 vertices");
  std::vector<Mask> nbr(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && adj[i][j]) nbr[i] |= Mask{1} << j;
  std::vector<std::vector<int>> out;
  if (n == 0) return out;
  const Mask all = n == 64 ? ~Mask{0} : (Mask{1} << n) - 1;
  bron_kerbosch(nbr, 0, all, 0, out);
  std::sort(out.begin(), out.end());
  return out;
}

// --- FactorGraphs1 ---------------------------------------------------------------

std::vector<int> fg1_ordering(const FactorGraph& graph) {
  std::vector<std::size_t> order(graph.num_factors());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return graph.factor(a).scope.size() > graph.factor(b).scope.size();
  });
  std::vector<std::uint8_t> seen(graph.num_variables(), 0);
  std::vector<int> out;
  for (std::size_t m : order)
    for (int v : graph.factor(m).scope)
      if (!seen[v]) {
        seen[v] = 1;
        out.push_back(v);
      }
  return out;
}

FactorGraph gen_fg1(const GeneratorSpec& spec) {
  check_size(spec.n, spec.k);
  if (spec.n > 64) throw InvalidInput("fg1 supports at most 64 variables");
  Rng rng(spec.seed);
  const double p = spec.n > 1 ? 2.0 * std::log(static_cast<double>(spec.n)) / spec.n : 0.0;
  const auto cliques = sample_clique_structure(spec.n, p, spec, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Factor> factors;
  for (const auto& clique : cliques) {
    Factor f{clique, {}};
    std::size_t size = 1;
    for (std::size_t i = 0; i < clique.size(); ++i) size *= spec.k;
    f.log_table.resize(size);
    for (double& v : f.log_table) v = normal(rng);
    factors.push_back(std::move(f));
  }
  FactorGraph graph(spec.n, spec.k, std::move(factors));
  return graph.with_ordering(fg1_ordering(graph));
}

FactorGraph gen_fg1(int n, int k, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.family = Family::fg1;
  spec.n = n;
  spec.k = k;
  spec.seed = seed;
  return gen_fg1(spec);
}

// --- FactorGraphs2 ---------------------------------------------------------------

FactorGraph gen_fg2(const GeneratorSpec& spec) {
  if (spec.n < 2 || spec.n % 2 != 0) throw InvalidInput("fg2 needs an even N >= 2");
  if (spec.k != 2) throw InvalidInput("fg2 is defined for binary variables only");
  if (spec.n > 128) throw InvalidInput("fg2 supports at most 128 variables");
  Rng rng(spec.seed);
  const int pairs = spec.n / 2;
  const double p = pairs > 1 ? 3.0 * std::log(static_cast<double>(pairs)) / spec.n : 0.0;
  const auto cliques = sample_clique_structure(pairs, p, spec, rng);

  std::vector<Factor> factors;
  for (int i = 0; i < pairs; ++i) factors.push_back(Factor{{2 * i, 2 * i + 1}, not_table(spec.fg2_scale)});
  std::bernoulli_distribution coin(0.5);
  for (const auto& clique : cliques) {
    Factor f;
    for (int pair : clique) f.scope.push_back(2 * pair + (coin(rng) ? 1 : 0));
    f.log_table = majority_table(static_cast<int>(f.scope.size()), spec.fg2_scale);
    factors.push_back(std::move(f));
  }
  return FactorGraph(spec.n, 2, std::move(factors));
}

FactorGraph gen_fg2(int n, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.family = Family::fg2;
  spec.n = n;
  spec.k = 2;
  spec.seed = seed;
  return gen_fg2(spec);
}

FactorGraph generate(const GeneratorSpec& spec) {
  switch (spec.family) {
    case Family::chains: return gen_chain(spec);
    case Family::permuted_chains: return gen_permuted_chain(spec);
    case Family::fg1: return gen_fg1(spec);
    case Family::fg2: return gen_fg2(spec);
  }
  throw InvalidInput("unknown family");
}

}  // namespace treesample
