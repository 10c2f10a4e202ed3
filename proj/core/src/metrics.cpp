#include "treesample/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "treesample/errors.hpp"
#include "treesample/logmath.hpp"

namespace treesample {

double delta_kl_atoms(const WeightedAtoms& atoms, const FactorGraph& graph) {
  return atom_stats(atoms, graph).delta_kl;
}

ApproxStats atom_stats(const WeightedAtoms& atoms, const FactorGraph& graph) {
  if (atoms.empty()) throw InvalidInput("metrics need a non-empty atom set");
  ApproxStats out;
  double neg_entropy = 0.0;
  double energy = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double p = atoms.weights[i];
    if (p <= 0.0) continue;
    neg_entropy += p * std::log(p);
    const double lp = log_unnormalized_density(graph, atoms.atoms[i]);
    if (lp == kNegInf) {
      energy = kNegInf;
      continue;
    }
    if (energy != kNegInf) energy += p * lp;
  }
  out.energy = energy;
  out.entropy = -neg_entropy;
  out.delta_kl = energy == kNegInf ? kPosInf : neg_entropy - energy;
  out.samples = atoms.size();
  return out;
}

namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  bool infinite = false;
  double inf_value = 0.0;

  void add(double v) {
    if (std::isinf(v)) {
      infinite = true;
      inf_value = v;
      return;
    }
    sum += v;
    sum_sq += v * v;
  }
  double mean(std::size_t n) const { return infinite ? inf_value : sum / n; }
  double std_error(std::size_t n) const {
    if (infinite) return kPosInf;
    if (n < 2) return 0.0;
    const double m = sum / n;
    const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
    return std::sqrt(var / n);
  }
};

}  // namespace

ApproxStats sampler_stats(const Sampler& sampler, const FactorGraph& graph,
                          std::size_t num_samples, std::uint64_t seed) {
  if (num_samples == 0) throw InvalidInput("sampler metrics need at least one sample");
  Rng rng(seed);
  Moments energy, log_p, delta;
  for (std::size_t s = 0; s < num_samples; ++s) {
    const Assignment x = sampler.sample(rng);
    const double lp = sampler.log_density(x);
    const double e = log_unnormalized_density(graph, x);
    energy.add(e);
    log_p.add(lp);
    delta.add(e == kNegInf ? kPosInf : lp - e);
  }
  ApproxStats out;
  out.samples = num_samples;
  out.energy = energy.mean(num_samples);
  out.energy_std_error = energy.std_error(num_samples);
  out.entropy = -log_p.mean(num_samples);
  out.entropy_std_error = log_p.std_error(num_samples);
  out.delta_kl = delta.mean(num_samples);
  out.delta_kl_std_error = delta.std_error(num_samples);
  return out;
}

Estimate delta_kl_sampler(const Sampler& sampler, const FactorGraph& graph,
                          std::size_t num_samples, std::uint64_t seed) {
  const ApproxStats stats = sampler_stats(sampler, graph, num_samples, seed);
  return {stats.delta_kl, stats.delta_kl_std_error, stats.samples};
}

EnergyEntropy energy_entropy_deltas(const ApproxStats& approx, const TargetStats& target) {
  return {target.expected_energy - approx.energy, approx.entropy - target.entropy};
}

EvalReport make_report(std::string method, const ApproxStats& approx,
                       const std::optional<TargetStats>& target) {
  EvalReport r;
  r.method = std::move(method);
  r.delta_kl = approx.delta_kl;
  r.delta_kl_std_error = approx.delta_kl_std_error;
  r.num_samples = approx.samples;
  if (target) {
    r.log_z = target->log_z;
    r.kl = approx.delta_kl == kPosInf ? kPosInf : approx.delta_kl + target->log_z;
    const EnergyEntropy d = energy_entropy_deltas(approx, *target);
    r.delta_energy = d.delta_energy;
    r.delta_entropy = d.delta_entropy;
  }
  return r;
}

namespace {

nlohmann::ordered_json number(double v) {
  if (std::isnan(v)) return "nan";
  if (v == kPosInf) return "inf";
  if (v == kNegInf) return "-inf";
  return v;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (v == kPosInf) return "inf";
  if (v == kNegInf) return "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string csv_optional(const std::optional<double>& v) { return v ? csv_number(*v) : ""; }

}  // namespace

std::string report_to_json(const EvalReport& r, bool include_telemetry) {
  nlohmann::ordered_json doc;
  doc["method"] = r.method;
  doc["budget"] = r.budget;
  doc["spent"] = r.spent;
  doc["cost_mode"] = r.cost_mode;
  doc["delta_kl"] = number(r.delta_kl);
  doc["delta_kl_std_error"] = number(r.delta_kl_std_error);
  doc["num_samples"] = r.num_samples;
  doc["num_atoms"] = r.num_atoms;
  if (r.log_z) doc["log_z"] = number(*r.log_z);
  if (r.kl) doc["kl"] = number(*r.kl);
  if (r.delta_energy) doc["delta_energy"] = number(*r.delta_energy);
  if (r.delta_entropy) doc["delta_entropy"] = number(*r.delta_entropy);
  if (r.oracle) doc["oracle"] = *r.oracle;
  if (include_telemetry) doc["wall_clock_ms"] = r.wall_clock_ms;
  return doc.dump();
}

std::string report_csv_header() {
  return "method,graph,seed,budget,spent,cost_mode,delta_kl,delta_kl_std_error,kl,log_z,"
         "delta_energy,delta_entropy,num_samples,num_atoms";
}

std::string report_csv_row(const EvalReport& r, const std::string& graph_id, std::uint64_t seed) {
  std::ostringstream out;
  out << r.method << ',' << graph_id << ',' << seed << ',' << r.budget << ',' << r.spent << ','
      << r.cost_mode << ',' << csv_number(r.delta_kl) << ',' << csv_number(r.delta_kl_std_error)
      << ',' << csv_optional(r.kl) << ',' << csv_optional(r.log_z) << ','
      << csv_optional(r.delta_energy) << ',' << csv_optional(r.delta_entropy) << ','
      << r.num_samples << ',' << r.num_atoms;
  return out.str();
}

}  // namespace treesample
