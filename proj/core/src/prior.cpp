#include "treesample/prior.hpp"

#include <cmath>

#include "treesample/errors.hpp"
#include "treesample/logmath.hpp"

namespace treesample {

std::vector<double> HeuristicPrior::values(const FactorGraph& graph,
                                           std::span<const int> prefix) const {
  const int n = static_cast<int>(prefix.size());
  if (n >= graph.num_variables()) throw InvalidInput("prior needs a prefix shorter than N");
  const double v = (graph.num_variables() - n - 1) * std::log(static_cast<double>(graph.num_states()));
  return std::vector<double>(graph.num_states(), v);
}

void encode_into(const FactorGraph& graph, std::span<const int> prefix, std::span<double> out) {
  const int k = graph.num_states();
  const std::size_t width = static_cast<std::size_t>(k) + 1;
  if (out.size() != graph.num_variables() * width) throw InvalidInput("encoding buffer has the wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  for (int v = 0; v < graph.num_variables(); ++v) {
    const int pos = graph.position_of(v);
    double* slot = out.data() + v * width;
    if (pos < static_cast<int>(prefix.size()))
      slot[prefix[pos]] = 1.0;
    else
      slot[k] = 1.0;
  }
}

std::vector<double> encode(const FactorGraph& graph, std::span<const int> prefix) {
  std::vector<double> out(static_cast<std::size_t>(graph.num_variables()) * (graph.num_states() + 1));
  encode_into(graph, prefix, out);
  return out;
}

Assignment PriorSampler::sample(Rng& rng) const {
  Assignment x;
  x.reserve(graph_->num_variables());
  for (int n = 0; n < graph_->num_variables(); ++n) {
    const auto q = prior_->values(*graph_, x);
    x.push_back(sample_categorical(q, rng));
  }
  return x;
}

double PriorSampler::log_density(std::span<const int> x) const {
  double total = 0.0;
  for (int n = 0; n < graph_->num_variables(); ++n) {
    const auto q = prior_->values(*graph_, x.first(n));
    const double norm = logsumexp(q);
    if (norm == kNegInf || q[x[n]] == kNegInf) return kNegInf;
    total += q[x[n]] - norm;
  }
  return total;
}

}  // namespace treesample
