#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treesample/errors.hpp"
#include "treesample/generators.hpp"
#include "treesample/model.hpp"
#include "treesample/runner.hpp"
#include "treesample/training.hpp"

namespace ts = treesample;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ts::InvalidInput("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ts::InvalidInput("cannot open '" + path + "' for writing");
  out << text;
}

std::vector<std::string> split(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream in(list);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

unsigned default_threads() {
  if (const char* env = std::getenv("TREESAMPLE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

void print_error(const char* kind, const std::string& message) {
  nlohmann::ordered_json doc{{"error", {{"type", kind}, {"message", message}}}};
  std::cout << doc.dump() << '\n';
}

struct GenerateArgs {
  std::string family;
  int n = 10;
  int k = 5;
  std::uint64_t seed = 0;
  std::string out;
};

struct RunArgs {
  std::string instance;
  std::string config;
  std::string preset;
  std::string method;
  std::uint64_t budget = 0;
  std::string cost_mode;
  double c = 0.0;
  double epsilon = 0.0;
  double t = -1.0;
  std::string resampling;
  int gibbs_sweeps = 0;
  int message_rounds = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string prior;
  std::uint64_t exact_cap = 0;
  std::string dump_tree;
  std::string atoms_out;
  bool no_telemetry = false;
};

struct BenchArgs {
  std::string family = "chains";
  int n = 10;
  int k = 5;
  std::string methods = "treesample,sis,smc,gibbs,bp";
  std::string budgets = "100,1000,10000";
  int instances = 10;
  std::uint64_t seed = 0;
  unsigned threads = default_threads();
  std::string config;
  std::size_t samples = 0;
  std::string cost_mode;
  std::string out;
  std::string summary;
};

struct TrainArgs {
  std::string instance;
  std::string algo = "treesample";
  ts::TrainConfig config;
  std::string hidden;
  std::string checkpoint;
  std::string curve;
  std::string cost_mode;
  bool resume = false;
};

ts::RunConfig resolve_run_config(CLI::App& cmd, const RunArgs& a) {
  ts::RunConfig rc;
  if (!a.preset.empty()) rc.apply(ts::preset_for(ts::parse_family(a.preset)));
  if (!a.config.empty()) rc = ts::run_config_from_json(read_file(a.config), rc);
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--method")) rc.method = ts::parse_method(a.method);
  if (given("--budget")) rc.budget = a.budget;
  if (given("--cost-mode")) rc.cost_mode = ts::parse_cost_mode(a.cost_mode);
  if (given("--c")) rc.c = a.c;
  if (given("--epsilon")) rc.epsilon = a.epsilon;
  if (given("--t")) rc.resample_threshold = a.t;
  if (given("--resampling"))
    rc = ts::run_config_from_json(nlohmann::json{{"resampling", a.resampling}}.dump(), rc);
  if (given("--gibbs-sweeps")) rc.gibbs_sweeps = a.gibbs_sweeps;
  if (given("--message-rounds")) rc.message_rounds = a.message_rounds;
  if (given("--samples")) rc.metric_samples = a.samples;
  if (given("--seed")) rc.seed = a.seed;
  if (given("--prior")) rc.prior = a.prior;
  if (given("--exact-cap")) rc.exact_cap = a.exact_cap;
  return rc;
}

int cmd_generate(const GenerateArgs& a) {
  ts::GeneratorSpec spec;
  spec.family = ts::parse_family(a.family);
  spec.n = a.n;
  spec.k = spec.family == ts::Family::fg2 ? 2 : a.k;
  spec.seed = a.seed;
  const auto graph = ts::generate(spec);
  if (a.out.empty() || a.out == "-")
    std::cout << ts::graph_to_json(graph) << '\n';
  else
    ts::save_graph(graph, a.out);
  return 0;
}

int cmd_run(CLI::App& cmd, const RunArgs& a) {
  const ts::RunConfig rc = resolve_run_config(cmd, a);
  const auto graph = ts::load_graph(a.instance);
  std::unique_ptr<ts::PriorValueFunction> prior;
  if (rc.prior == "heuristic")
    prior = std::make_unique<ts::HeuristicPrior>();
  else
    prior = std::make_unique<ts::MLPValueFunction>(ts::load_prior_checkpoint(rc.prior));
  const auto oracle = ts::find_oracle(graph, rc.exact_cap);
  const auto result = ts::run_method(graph, rc, *prior, oracle, !a.dump_tree.empty());
  if (!a.dump_tree.empty()) {
    if (!result.tree_json) throw ts::InvalidInput("--dump-tree applies to the treesample method only");
    write_file(a.dump_tree, *result.tree_json + "\n");
  }
  if (!a.atoms_out.empty()) {
    if (!result.atoms) throw ts::InvalidInput("--atoms-out applies to atom-producing methods only");
    std::ofstream out(a.atoms_out, std::ios::trunc);
    if (!out) throw ts::InvalidInput("cannot open '" + a.atoms_out + "' for writing");
    ts::write_atoms_jsonl(out, *result.atoms, graph);
  }
  std::cout << ts::report_to_json(result.report, !a.no_telemetry) << '\n';
  return 0;
}

int cmd_bench(CLI::App& cmd, const BenchArgs& a) {
  ts::BenchSpec spec;
  spec.instance.family = ts::parse_family(a.family);
  spec.instance.n = a.n;
  spec.instance.k = spec.instance.family == ts::Family::fg2 ? 2 : a.k;
  for (const auto& m : split(a.methods)) spec.methods.push_back(ts::parse_method(m));
  for (const auto& b : split(a.budgets)) {
    try {
      spec.budgets.push_back(std::stoull(b));
    } catch (const std::exception&) {
      throw ts::InvalidInput("bad budget '" + b + "'");
    }
  }
  spec.instances = a.instances;
  spec.seed = a.seed;
  spec.threads = a.threads;
  spec.run.apply(ts::preset_for(spec.instance.family));
  if (!a.config.empty()) spec.run = ts::run_config_from_json(read_file(a.config), spec.run);
  if (cmd.count("--samples")) spec.run.metric_samples = a.samples;
  if (cmd.count("--cost-mode")) spec.run.cost_mode = ts::parse_cost_mode(a.cost_mode);
  const auto rows = ts::run_bench(spec);
  const std::string rows_csv = ts::bench_rows_csv(rows);
  const std::string summary_csv = ts::bench_summary_csv(rows);
  if (a.out.empty())
    std::cout << rows_csv;
  else
    write_file(a.out, rows_csv);
  if (!a.summary.empty())
    write_file(a.summary, summary_csv);
  else if (a.out.empty())
    std::cout << '\n' << summary_csv;
  return 0;
}

int cmd_train(CLI::App& cmd, TrainArgs a) {
  const auto graph = ts::load_graph(a.instance);
  if (!a.hidden.empty()) {
    a.config.hidden.clear();
    for (const auto& h : split(a.hidden)) a.config.hidden.push_back(std::stoi(h));
  }
  if (cmd.count("--cost-mode")) a.config.cost_mode = ts::parse_cost_mode(a.cost_mode);
  const bool resuming = a.resume && !a.checkpoint.empty() && std::filesystem::exists(a.checkpoint);
  ts::Trainer trainer = resuming ? ts::Trainer::resume(graph, a.checkpoint)
                                 : ts::Trainer(graph, a.config, ts::parse_train_algo(a.algo));
  std::ofstream curve;
  if (!a.curve.empty()) {
    const bool append = resuming && std::filesystem::exists(a.curve);
    curve.open(a.curve, append ? std::ios::app : std::ios::trunc);
    if (!curve) throw ts::InvalidInput("cannot open '" + a.curve + "' for writing");
    if (!append) curve << ts::episode_csv_header() << '\n';
  }
  for (int e = 0; e < a.config.episodes; ++e) {
    const auto m = trainer.run_episode();
    if (curve.is_open()) curve << ts::episode_csv_row(m) << '\n' << std::flush;
  }
  if (!a.checkpoint.empty()) trainer.save_checkpoint(a.checkpoint);
  nlohmann::ordered_json summary{{"episodes_completed", trainer.episode()},
                                 {"algo", std::string(ts::to_string(trainer.algo()))},
                                 {"replay_size", trainer.replay().size()}};
  std::cout << summary.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budgeted approximate inference on discrete factor graphs"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a random instance as JSON");
  g->add_option("--family", gen.family, "chains | permuted_chains | fg1 | fg2")->required();
  g->add_option("--n", gen.n, "Number of variables");
  g->add_option("--k", gen.k, "States per variable (fg2 is always binary)");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen.out, "Output path (stdout when omitted)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run one inference method and print an evaluation report");
  r->add_option("--instance", run.instance, "Instance JSON")->required();
  r->add_option("--config", run.config, "RunConfig JSON; flags override it");
  r->add_option("--preset", run.preset, "Family whose tuned hyperparameters to start from");
  r->add_option("--method", run.method, "treesample | sis | smc | gibbs | bp");
  r->add_option("--budget", run.budget, "Oracle evaluation budget B");
  r->add_option("--cost-mode", run.cost_mode, "reward_eval | factor_eval");
  r->add_option("--c", run.c, "TreeSample exploration constant");
  r->add_option("--epsilon", run.epsilon, "TreeSample prior floor in the exploration bonus");
  r->add_option("--t", run.t, "SMC resampling threshold on ESS / I");
  r->add_option("--resampling", run.resampling, "multinomial | systematic");
  r->add_option("--gibbs-sweeps", run.gibbs_sweeps, "Gibbs sweeps per chain");
  r->add_option("--message-rounds", run.message_rounds, "BP message rounds per step");
  r->add_option("--samples", run.samples, "Monte Carlo samples for TreeSample metrics");
  r->add_option("--seed", run.seed, "Run seed");
  r->add_option("--prior", run.prior, "heuristic or a training checkpoint path");
  r->add_option("--exact-cap", run.exact_cap, "Largest K^N enumerated by the brute-force oracle");
  r->add_option("--dump-tree", run.dump_tree, "Write the TreeSample tree as JSON");
  r->add_option("--atoms-out", run.atoms_out, "Write weighted atoms as JSON lines");
  r->add_flag("--no-telemetry", run.no_telemetry, "Omit wall-clock timing from the report");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Sweep methods and budgets over generated instances");
  b->add_option("--family", bench.family, "Instance family");
  b->add_option("--n", bench.n, "Number of variables");
  b->add_option("--k", bench.k, "States per variable");
  b->add_option("--methods", bench.methods, "Comma-separated methods");
  b->add_option("--budgets", bench.budgets, "Comma-separated budgets");
  b->add_option("--instances", bench.instances, "Number of instances");
  b->add_option("--seed", bench.seed, "First instance seed");
  b->add_option("--threads", bench.threads, "Worker threads (default: TREESAMPLE_THREADS or 1)");
  b->add_option("--config", bench.config, "RunConfig JSON applied on top of the family preset");
  b->add_option("--samples", bench.samples, "Monte Carlo samples for TreeSample metrics");
  b->add_option("--cost-mode", bench.cost_mode, "reward_eval | factor_eval");
  b->add_option("--out", bench.out, "Per-run CSV (stdout when omitted)");
  b->add_option("--summary", bench.summary, "Per-cell summary CSV");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train an MLP value prior on one instance");
  t->add_option("--instance", train.instance, "Instance JSON")->required();
  t->add_option("--algo", train.algo, "treesample | smc");
  t->add_option("--episodes", train.config.episodes, "Episodes to run");
  t->add_option("--budget", train.config.budget_per_episode, "Budget per episode");
  t->add_option("--samples", train.config.samples_per_episode, "Samples drawn per episode");
  t->add_option("--steps", train.config.train_steps_per_episode, "Optimizer steps per episode");
  t->add_option("--batch", train.config.batch_size, "Minibatch size");
  t->add_option("--lr", train.config.learning_rate, "Adam learning rate");
  t->add_option("--replay", train.config.replay_capacity, "Replay capacity");
  t->add_option("--hidden", train.hidden, "Comma-separated hidden layer widths");
  t->add_option("--target-floor", train.config.target_floor, "Clamp for -inf Q targets");
  t->add_option("--cost-mode", train.cost_mode, "reward_eval | factor_eval");
  t->add_option("--c", train.config.c, "TreeSample exploration constant");
  t->add_option("--epsilon", train.config.epsilon, "TreeSample prior floor");
  t->add_option("--t", train.config.resample_threshold, "SMC resampling threshold");
  t->add_option("--prior-samples", train.config.prior_eval_samples, "Samples for the prior-alone metric");
  t->add_option("--seed", train.config.seed, "Training seed");
  t->add_option("--checkpoint", train.checkpoint, "Checkpoint path written after training");
  t->add_option("--curve", train.curve, "Per-episode metrics CSV");
  t->add_flag("--resume", train.resume, "Continue from --checkpoint if it exists");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*r) return cmd_run(*r, run);
    if (*b) return cmd_bench(*b, bench);
    if (*t) return cmd_train(*t, train);
  } catch (const ts::BudgetError& e) {
    print_error("budget", e.what());
    return kExitInput;
  } catch (const ts::InvalidInput& e) {
    print_error("invalid_input", e.what());
    return kExitInput;
  } catch (const ts::GenerationError& e) {
    print_error("generation", e.what());
    return kExitInput;
  } catch (const ts::ResourceError& e) {
    print_error("resource", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
