#include "treesample/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "treesample/errors.hpp"
#include "treesample/logmath.hpp"
#include "treesample/search.hpp"

namespace treesample {

using json = nlohmann::ordered_json;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::treesample: return "treesample";
    case Method::sis: return "sis";
    case Method::smc: return "smc";
    case Method::gibbs: return "gibbs";
    case Method::bp: return "bp";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods())
    if (to_string(m) == name) return m;
  throw InvalidInput("unknown method '" + std::string(name) + "'");
}

std::vector<Method> all_methods() {
  return {Method::treesample, Method::sis, Method::smc, Method::gibbs, Method::bp};
}

// Chosen by median KL over 20 instances per family (seeds 1000-1019, B = 10^4).
// Acceptance runs use disjoint seeds. Epsilon does not matter for the heuristic
// prior; the fg2 value was picked for trained priors (instance seed 1000, B = 2500).
Preset preset_for(Family family) {
  switch (family) {
    case Family::chains: return Preset{0.5, 0.1, 0.9, 5, 2};
    case Family::permuted_chains: return Preset{1.0, 0.1, 0.5, 1, 2};
    case Family::fg1: return Preset{1.0, 0.1, 0.9, 5, 2};
    case Family::fg2: return Preset{5.0, 3.0, 0.3, 2, 2};
  }
  return Preset{};
}

void RunConfig::apply(const Preset& preset) {
  c = preset.c;
  epsilon = preset.epsilon;
  resample_threshold = preset.resample_threshold;
  gibbs_sweeps = preset.gibbs_sweeps;
  message_rounds = preset.message_rounds;
}

namespace {

ResamplingScheme parse_scheme(const std::string& name) {
  if (name == "multinomial") return ResamplingScheme::multinomial;
  if (name == "systematic") return ResamplingScheme::systematic;
  throw InvalidInput("unknown resampling scheme '" + name + "'");
}

template <typename T>
T get_field(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig run_config_from_json(std::string_view text, RunConfig base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("config must be a JSON object");
  RunConfig c = std::move(base);
  for (const auto& [key, value] : doc.items()) {
    if (key == "method") c.method = parse_method(get_field<std::string>(doc, "method"));
    else if (key == "budget") c.budget = get_field<std::uint64_t>(doc, "budget");
    else if (key == "cost_mode") c.cost_mode = parse_cost_mode(get_field<std::string>(doc, "cost_mode"));
    else if (key == "c") c.c = get_field<double>(doc, "c");
    else if (key == "epsilon") c.epsilon = get_field<double>(doc, "epsilon");
    else if (key == "resample_threshold") c.resample_threshold = get_field<double>(doc, "resample_threshold");
    else if (key == "resampling") c.resampling = parse_scheme(get_field<std::string>(doc, "resampling"));
    else if (key == "gibbs_sweeps") c.gibbs_sweeps = get_field<int>(doc, "gibbs_sweeps");
    else if (key == "message_rounds") c.message_rounds = get_field<int>(doc, "message_rounds");
    else if (key == "metric_samples") c.metric_samples = get_field<std::size_t>(doc, "metric_samples");
    else if (key == "seed") c.seed = get_field<std::uint64_t>(doc, "seed");
    else if (key == "prior") c.prior = get_field<std::string>(doc, "prior");
    else if (key == "exact_cap") c.exact_cap = get_field<std::uint64_t>(doc, "exact_cap");
    else throw InvalidInput("unknown config key '" + key + "'");
  }
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json doc{{"method", std::string(to_string(c.method))},
           {"budget", c.budget},
           {"cost_mode", std::string(to_string(c.cost_mode))},
           {"c", c.c},
           {"epsilon", c.epsilon},
           {"resample_threshold", c.resample_threshold},
           {"resampling", c.resampling == ResamplingScheme::multinomial ? "multinomial" : "systematic"},
           {"gibbs_sweeps", c.gibbs_sweeps},
           {"message_rounds", c.message_rounds},
           {"metric_samples", c.metric_samples},
           {"seed", c.seed},
           {"prior", c.prior},
           {"exact_cap", c.exact_cap}};
  return doc.dump();
}

std::optional<Oracle> find_oracle(const FactorGraph& graph, std::uint64_t cap) {
  if (const auto order = chain_ordering(graph))
    return Oracle{"chain", solve_chain(graph.with_ordering(*order)).stats()};
  if (graph.domain_size() <= cap) return Oracle{"brute_force", brute_force_stats(graph, cap)};
  return std::nullopt;
}

RunResult run_method(const FactorGraph& graph, const RunConfig& config,
                     const PriorValueFunction& prior, const std::optional<Oracle>& oracle,
                     bool dump_tree) {
  const auto start = std::chrono::steady_clock::now();
  RunResult out;
  ApproxStats stats;
  std::uint64_t spent = 0;
  std::size_t samples = 0;
  switch (config.method) {
    case Method::treesample: {
      const std::uint64_t unit = config.cost_mode == CostMode::reward_eval ? 1 : graph.max_factors_per_depth();
      if (config.budget < unit) throw BudgetError("budget cannot pay for a single tree expansion");
      if (config.metric_samples == 0) throw InvalidInput("metric_samples must be positive");
      const SearchTree tree =
          build_tree(graph, prior, SearchConfig{config.budget, config.c, config.epsilon, config.cost_mode, config.seed});
      spent = tree.ledger().spent();
      stats = sampler_stats(tree, graph, config.metric_samples, config.seed ^ 0x5851f42d4c957f2dULL);
      samples = config.metric_samples;
      if (dump_tree) out.tree_json = tree_to_json(tree);
      break;
    }
    case Method::sis:
    case Method::smc: {
      SmcConfig sc{config.budget, config.method == Method::sis ? 0.0 : config.resample_threshold,
                   config.resampling, config.cost_mode, config.seed};
      ParticleResult r = smc(graph, prior, sc);
      spent = r.spent;
      samples = r.num_particles;
      stats = r.degenerate ? ApproxStats{} : atom_stats(r.atoms, graph);
      if (r.degenerate) stats.delta_kl = kPosInf;
      out.atoms = std::move(r.atoms);
      break;
    }
    case Method::gibbs: {
      GibbsConfig gc{config.budget, config.gibbs_sweeps, config.cost_mode, 0, config.seed};
      ChainResult r = gibbs(graph, gc);
      spent = r.spent;
      samples = r.num_samples;
      stats = atom_stats(r.atoms, graph);
      out.atoms = std::move(r.atoms);
      break;
    }
    case Method::bp: {
      BpConfig bc{config.budget, config.message_rounds, config.cost_mode, 1, config.seed};
      ChainResult r = bp_sample(graph, bc);
      spent = r.spent;
      samples = r.num_samples;
      stats = atom_stats(r.atoms, graph);
      out.atoms = std::move(r.atoms);
      break;
    }
  }
  std::optional<TargetStats> target;
  if (oracle) target = oracle->stats;
  out.report = make_report(std::string(to_string(config.method)), stats, target);
  out.report.budget = config.budget;
  out.report.spent = spent;
  out.report.cost_mode = std::string(to_string(config.cost_mode));
  out.report.num_samples = samples;
  out.report.num_atoms = out.atoms ? out.atoms->size() : 0;
  if (oracle) out.report.oracle = oracle->name;
  out.report.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// --- benchmark sweeps ----------------------------------------------------------

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<BenchRow> run_bench(const BenchSpec& spec) {
  if (spec.instances < 1) throw InvalidInput("bench needs at least one instance");
  if (spec.methods.empty() || spec.budgets.empty()) throw InvalidInput("bench needs methods and budgets");

  struct Instance {
    std::optional<FactorGraph> graph;
    std::optional<Oracle> oracle;
    std::string id;
    std::uint64_t seed = 0;
    std::string error;
  };
  std::vector<Instance> instances(spec.instances);
  const std::size_t cells_per_instance = spec.methods.size() * spec.budgets.size();
  std::vector<BenchRow> rows(instances.size() * cells_per_instance);
  const HeuristicPrior prior;

  auto parallel_for = [&](std::size_t count, auto&& body) {
    const unsigned workers = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(count)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    };
    if (workers == 1) {
      work();
      return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  };

  parallel_for(instances.size(), [&](std::size_t i) {
    Instance& inst = instances[i];
    GeneratorSpec g = spec.instance;
    g.seed = spec.seed + i;
    inst.seed = g.seed;
    std::ostringstream id;
    id << to_string(g.family) << "_n" << g.n << "_k" << g.k << "_s" << g.seed;
    inst.id = id.str();
    try {
      inst.graph = generate(g);
      inst.oracle = find_oracle(*inst.graph, spec.run.exact_cap);
    } catch (const std::exception& e) {
      inst.error = e.what();
    }
  });

  // Cell index: instance-major so one worker tends to stay on one graph.
  parallel_for(rows.size(), [&](std::size_t cell) {
    const std::size_t i = cell / cells_per_instance;
    const std::size_t rest = cell % cells_per_instance;
    const std::size_t m = rest / spec.budgets.size();
    const std::size_t b = rest % spec.budgets.size();
    const Instance& inst = instances[i];
    BenchRow row;
    row.method = spec.methods[m];
    row.budget = spec.budgets[b];
    row.instance = static_cast<int>(i);
    row.instance_seed = inst.seed;
    row.graph_id = inst.id;
    if (!inst.graph) {
      row.error = inst.error;
    } else {
      RunConfig rc = spec.run;
      rc.method = row.method;
      rc.budget = row.budget;
      rc.seed = spec.run.seed + inst.seed;
      try {
        row.report = run_method(*inst.graph, rc, prior, inst.oracle).report;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
    const std::size_t out_index = (m * spec.budgets.size() + b) * instances.size() + i;
    rows[out_index] = std::move(row);
  });
  return rows;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (v == kPosInf) return "inf";
  if (v == kNegInf) return "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::string bench_rows_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << report_csv_header() << ",error\n";
  for (const BenchRow& r : rows) {
    if (r.report) {
      out << report_csv_row(*r.report, r.graph_id, r.instance_seed) << ",\n";
    } else {
      out << to_string(r.method) << ',' << r.graph_id << ',' << r.instance_seed << ',' << r.budget
          << ",,,,,,,,,,," << csv_escape(r.error) << '\n';
    }
  }
  return out.str();
}

std::string bench_summary_csv(const std::vector<BenchRow>& rows) {
  struct Cell {
    std::vector<double> metric, energy, entropy;
    bool exact = true;
    std::size_t failed = 0;
  };
  std::vector<std::pair<std::string, std::uint64_t>> order;
  std::map<std::pair<std::string, std::uint64_t>, Cell> cells;
  for (const BenchRow& r : rows) {
    const auto key = std::make_pair(std::string(to_string(r.method)), r.budget);
    if (!cells.count(key)) order.push_back(key);
    Cell& cell = cells[key];
    if (!r.report) {
      ++cell.failed;
      continue;
    }
    const EvalReport& rep = *r.report;
    if (!rep.kl) cell.exact = false;
    cell.metric.push_back(rep.kl ? *rep.kl : rep.delta_kl);
    if (rep.delta_energy) cell.energy.push_back(*rep.delta_energy);
    if (rep.delta_entropy) cell.entropy.push_back(*rep.delta_entropy);
  }
  std::ostringstream out;
  out << "method,budget,metric,count,failed,mean,stddev,median,q1,q3,median_delta_energy,median_delta_entropy\n";
  for (const auto& key : order) {
    const Cell& cell = cells[key];
    const auto& v = cell.metric;
    double mean = 0.0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    out << key.first << ',' << key.second << ',' << (cell.exact ? "kl" : "delta_kl") << ',' << v.size() << ','
        << cell.failed << ',' << (v.empty() ? "" : csv_double(mean)) << ',' << (v.empty() ? "" : csv_double(sd))
        << ',' << (v.empty() ? "" : csv_double(quantile(v, 0.5))) << ','
        << (v.empty() ? "" : csv_double(quantile(v, 0.25))) << ','
        << (v.empty() ? "" : csv_double(quantile(v, 0.75))) << ','
        << (cell.energy.empty() ? "" : csv_double(quantile(cell.energy, 0.5))) << ','
        << (cell.entropy.empty() ? "" : csv_double(quantile(cell.entropy, 0.5))) << '\n';
  }
  return out.str();
}

}  // namespace treesample
