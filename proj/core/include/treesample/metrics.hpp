#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treesample/distribution.hpp"
#include "treesample/exact.hpp"
#include "treesample/model.hpp"

namespace treesample {

// Throughout: D_KL[P || P*] = log Z + delta_kl, with
// delta_kl = E_P[log P(X)] - E_P[sum psi(X)] = -H[P] - E_P[sum psi].

/// delta_kl computed exactly over the atoms. +inf when a positive-weight atom
/// has zero target density.
double delta_kl_atoms(const WeightedAtoms& atoms, const FactorGraph& graph);

/// Monte Carlo delta_kl with standard error from S i.i.d. draws.
Estimate delta_kl_sampler(const Sampler& sampler, const FactorGraph& graph,
                          std::size_t num_samples, std::uint64_t seed);

/// Energy E_P[sum psi] and entropy H[P] of an approximation.
struct ApproxStats {
  double energy = 0.0;
  double entropy = 0.0;
  double delta_kl = 0.0;
  // Zero for atom-based (exact) statistics.
  double energy_std_error = 0.0;
  double entropy_std_error = 0.0;
  double delta_kl_std_error = 0.0;
  std::size_t samples = 0;
};

ApproxStats atom_stats(const WeightedAtoms& atoms, const FactorGraph& graph);
ApproxStats sampler_stats(const Sampler& sampler, const FactorGraph& graph,
                          std::size_t num_samples, std::uint64_t seed);

struct EnergyEntropy {
  double delta_energy;   // E_{P*}[sum psi] - E_P[sum psi], lower is better
  double delta_entropy;  // H[P] - H[P*], higher is better
};

EnergyEntropy energy_entropy_deltas(const ApproxStats& approx, const TargetStats& target);

/// One evaluated run of an inference method.
struct EvalReport {
  std::string method;
  std::uint64_t budget = 0;
  std::uint64_t spent = 0;
  std::string cost_mode;
  double delta_kl = 0.0;
  double delta_kl_std_error = 0.0;
  std::size_t num_samples = 0;
  std::size_t num_atoms = 0;
  std::optional<double> log_z;
  std::optional<double> kl;
  std::optional<double> delta_energy;
  std::optional<double> delta_entropy;
  std::optional<std::string> oracle;  // "chain" or "brute_force"
  double wall_clock_ms = 0.0;         // telemetry only
};

/// Builds a report from approximation statistics and an optional oracle.
EvalReport make_report(std::string method, const ApproxStats& approx,
                       const std::optional<TargetStats>& target);

/// Single JSON object. Non-finite numbers are written as "inf"/"-inf" strings.
/// With include_telemetry=false the wall-clock field is omitted.
std::string report_to_json(const EvalReport& report, bool include_telemetry = true);

/// CSV header and row; rows carry method, graph id and seed columns.
std::string report_csv_header();
std::string report_csv_row(const EvalReport& report, const std::string& graph_id,
                           std::uint64_t seed);

}  // namespace treesample
