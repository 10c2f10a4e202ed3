#include "treesample/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "treesample/baselines.hpp"
#include "treesample/errors.hpp"
#include "treesample/logmath.hpp"
#include "treesample/metrics.hpp"

namespace treesample {

using json = nlohmann::ordered_json;

std::string_view to_string(TrainAlgo algo) {
  return algo == TrainAlgo::treesample ? "treesample" : "smc";
}

TrainAlgo parse_train_algo(std::string_view name) {
  if (name == "treesample") return TrainAlgo::treesample;
  if (name == "smc") return TrainAlgo::smc;
  throw InvalidInput("unknown training algorithm '" + std::string(name) + "'");
}

std::string episode_csv_header() {
  return "episode,delta_kl,delta_kl_std_error,prior_delta_kl,prior_delta_kl_std_error,mean_loss,"
         "train_steps,rows_written,replay_size,spent,degenerate";
}

std::string episode_csv_row(const EpisodeMetrics& m) {
  std::ostringstream out;
  out.precision(17);
  out << m.episode << ',' << m.delta_kl << ',' << m.delta_kl_std_error << ',' << m.prior_delta_kl
      << ',' << m.prior_delta_kl_std_error << ',' << m.mean_loss << ',' << m.train_steps << ','
      << m.rows_written << ',' << m.replay_size << ',' << m.spent << ',' << (m.degenerate ? 1 : 0);
  return out.str();
}

namespace {

void validate(const TrainConfig& c) {
  if (c.episodes < 0) throw InvalidInput("episodes must be non-negative");
  if (c.budget_per_episode == 0) throw InvalidInput("budget_per_episode must be positive");
  if (c.samples_per_episode <= 0) throw InvalidInput("samples_per_episode must be positive");
  if (c.train_steps_per_episode < 0) throw InvalidInput("train_steps_per_episode must be non-negative");
  if (c.batch_size <= 0) throw InvalidInput("batch_size must be positive");
  if (!(c.learning_rate > 0.0)) throw InvalidInput("learning_rate must be positive");
  if (c.replay_capacity == 0) throw InvalidInput("replay_capacity must be positive");
  if (c.prior_eval_samples <= 0) throw InvalidInput("prior_eval_samples must be positive");
  if (!std::isfinite(c.target_floor)) throw InvalidInput("target_floor must be finite");
}

json config_to_json(const TrainConfig& c) {
  return json{{"episodes", c.episodes},
              {"budget_per_episode", c.budget_per_episode},
              {"samples_per_episode", c.samples_per_episode},
              {"train_steps_per_episode", c.train_steps_per_episode},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"replay_capacity", c.replay_capacity},
              {"target_floor", c.target_floor},
              {"hidden", c.hidden},
              {"cost_mode", std::string(to_string(c.cost_mode))},
              {"c", c.c},
              {"epsilon", c.epsilon},
              {"resample_threshold", c.resample_threshold},
              {"prior_eval_samples", c.prior_eval_samples},
              {"seed", c.seed}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.episodes = j.at("episodes").get<int>();
  c.budget_per_episode = j.at("budget_per_episode").get<std::uint64_t>();
  c.samples_per_episode = j.at("samples_per_episode").get<int>();
  c.train_steps_per_episode = j.at("train_steps_per_episode").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.replay_capacity = j.at("replay_capacity").get<std::size_t>();
  c.target_floor = j.at("target_floor").get<double>();
  c.hidden = j.at("hidden").get<std::vector<int>>();
  c.cost_mode = parse_cost_mode(j.at("cost_mode").get<std::string>());
  c.c = j.at("c").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.resample_threshold = j.at("resample_threshold").get<double>();
  c.prior_eval_samples = j.at("prior_eval_samples").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void write_block(std::ostream& out, std::span<const double> data) {
  for (double d : data) {
    auto bits = std::bit_cast<std::uint64_t>(d);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(bytes, 8);
  }
}

std::vector<double> read_block(std::istream& in, std::size_t count) {
  std::vector<double> data(count);
  for (double& d : data) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw InvalidInput("checkpoint is truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    d = std::bit_cast<double>(bits);
  }
  return data;
}

struct Checkpoint {
  json header;
  std::map<std::string, std::vector<double>> blocks;
};

Checkpoint read_checkpoint(const std::filesystem::path& path, bool all_blocks) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  Checkpoint ck;
  try {
    ck.header = json::parse(line);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  if (ck.header.value("format", "") != "treesample-mlp") throw InvalidInput("not a treesample checkpoint");
  for (const auto& b : ck.header.at("blocks")) {
    const auto name = b.at("name").get<std::string>();
    const auto count = b.at("count").get<std::size_t>();
    ck.blocks[name] = read_block(in, count);
    if (!all_blocks && name == "params") break;
  }
  return ck;
}

MlpShape shape_from_header(const json& h) {
  return MlpShape{h.at("shape").at("input").get<int>(), h.at("shape").at("hidden").get<std::vector<int>>(),
                  h.at("shape").at("output").get<int>()};
}

std::vector<double> clamped(std::span<const double> q, double floor) {
  std::vector<double> out(q.begin(), q.end());
  for (double& v : out) v = std::max(v, floor);
  return out;
}

}  // namespace

Trainer::Trainer(const FactorGraph& graph, TrainConfig config, TrainAlgo algo)
    : graph_(&graph),
      config_((validate(config), std::move(config))),
      algo_(algo),
      prior_(graph.num_variables(), graph.num_states(), config_.hidden, config_.seed),
      adam_(prior_.mlp().parameters().size(), AdamConfig{config_.learning_rate}),
      replay_(config_.replay_capacity, graph.num_variables() * (graph.num_states() + 1), graph.num_states()),
      rng_(config_.seed ^ 0x9e3779b97f4a7c15ULL),
      grad_(prior_.mlp().parameters().size()) {}

double Trainer::train_step() {
  const auto batch = static_cast<std::size_t>(config_.batch_size);
  replay_.sample(batch, rng_, batch_inputs_, batch_targets_);
  const double loss = prior_.mlp().loss_and_gradient(batch_inputs_, batch_targets_, batch, grad_);
  adam_.step(prior_.mlp().parameters(), grad_);
  return loss;
}

void Trainer::write_tree_targets(const SearchTree& tree, const std::vector<Assignment>& samples,
                                 std::size_t& rows) {
  const int n_vars = graph_->num_variables();
  std::vector<double> input(replay_.input_dim());
  for (const auto& x : samples) {
    std::int32_t current = 0;
    for (int n = 0; n < n_vars && current >= 0; ++n) {
      const TreeNode& node = tree.node(current);
      if (node.prior.empty()) break;
      const std::span<const int> prefix(x.data(), n);
      encode_into(*graph_, prefix, input);
      replay_.push(input, clamped(node.q, config_.target_floor));
      ++rows;
      current = node.children[x[n]];
    }
  }
}

EpisodeMetrics Trainer::run_episode() {
  EpisodeMetrics m;
  m.episode = episode_;
  const int n_vars = graph_->num_variables();
  const int k = graph_->num_states();
  const auto samples_wanted = static_cast<std::size_t>(config_.samples_per_episode);
  const std::uint64_t worker_seed = rng_();
  const std::uint64_t sample_seed = rng_();
  const std::uint64_t prior_seed = rng_();

  if (algo_ == TrainAlgo::treesample) {
    SearchConfig sc{config_.budget_per_episode, config_.c, config_.epsilon, config_.cost_mode, worker_seed};
    const SearchTree tree = build_tree(*graph_, prior_, sc);
    m.spent = tree.ledger().spent();
    Rng rng(sample_seed);
    std::vector<Assignment> samples;
    samples.reserve(samples_wanted);
    std::vector<double> terms;
    for (std::size_t s = 0; s < samples_wanted; ++s) {
      samples.push_back(tree.sample(rng));
      terms.push_back(extended_add(tree.log_density(samples.back()),
                                   -log_unnormalized_density(*graph_, samples.back())));
    }
    double mean = 0.0;
    for (double t : terms) mean += t / static_cast<double>(terms.size());
    double var = 0.0;
    for (double t : terms) var += (t - mean) * (t - mean);
    m.delta_kl = mean;
    m.delta_kl_std_error =
        terms.size() > 1 && std::isfinite(mean) ? std::sqrt(var / (terms.size() - 1) / terms.size()) : 0.0;
    write_tree_targets(tree, samples, m.rows_written);
  } else {
    SmcConfig sc{config_.budget_per_episode, config_.resample_threshold, ResamplingScheme::multinomial,
                 config_.cost_mode, worker_seed};
    const ParticleResult result = smc(*graph_, prior_, sc);
    m.spent = result.spent;
    m.degenerate = result.degenerate;
    if (result.degenerate) {
      m.delta_kl = kPosInf;
    } else {
      m.delta_kl = delta_kl_atoms(result.atoms, *graph_);
      const auto& atoms = result.atoms;
      std::vector<double> log_w(atoms.size());
      for (std::size_t i = 0; i < atoms.size(); ++i) log_w[i] = std::log(atoms.weights[i]);
      const double smoothing = 1.0 / (static_cast<double>(k) * static_cast<double>(result.num_particles));
      Rng rng(sample_seed);
      std::vector<double> input(replay_.input_dim());
      std::vector<double> target(k);
      for (std::size_t s = 0; s < samples_wanted; ++s) {
        const Assignment& x = atoms.atoms[sample_categorical(log_w, rng)];
        for (int n = 0; n < n_vars; ++n) {
          std::vector<double> mass(k, 0.0);
          for (std::size_t i = 0; i < atoms.size(); ++i)
            if (std::equal(x.begin(), x.begin() + n, atoms.atoms[i].begin()))
              mass[atoms.atoms[i][n]] += atoms.weights[i];
          double total = 0.0;
          for (double w : mass) total += w;
          for (int a = 0; a < k; ++a)
            target[a] = std::max(std::log((mass[a] + smoothing) / (total + k * smoothing)), config_.target_floor);
          encode_into(*graph_, std::span<const int>(x.data(), n), input);
          replay_.push(input, target);
          ++m.rows_written;
        }
      }
    }
  }

  const PriorSampler prior_alone(*graph_, prior_);
  const Estimate prior_est = delta_kl_sampler(prior_alone, *graph_, config_.prior_eval_samples, prior_seed);
  m.prior_delta_kl = prior_est.mean;
  m.prior_delta_kl_std_error = prior_est.std_error;

  if (replay_.size() >= static_cast<std::size_t>(config_.batch_size)) {
    double total = 0.0;
    for (int step = 0; step < config_.train_steps_per_episode; ++step) total += train_step();
    m.train_steps = config_.train_steps_per_episode;
    m.mean_loss = m.train_steps > 0 ? total / m.train_steps : 0.0;
  }
  m.replay_size = replay_.size();
  ++episode_;
  return m;
}

std::vector<EpisodeMetrics> Trainer::run(int episodes) {
  std::vector<EpisodeMetrics> out;
  out.reserve(episodes);
  for (int e = 0; e < episodes; ++e) out.push_back(run_episode());
  return out;
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  const auto& shape = prior_.mlp().shape();
  std::ostringstream rng_state;
  rng_state << rng_;
  std::vector<double> replay_inputs;
  std::vector<double> replay_targets;
  replay_inputs.reserve(replay_.size() * replay_.input_dim());
  replay_targets.reserve(replay_.size() * replay_.target_dim());
  for (std::size_t i = 0; i < replay_.size(); ++i) {
    const auto in = replay_.input(i);
    const auto tg = replay_.target(i);
    replay_inputs.insert(replay_inputs.end(), in.begin(), in.end());
    replay_targets.insert(replay_targets.end(), tg.begin(), tg.end());
  }
  const auto params = prior_.mlp().parameters();
  json header{{"format", "treesample-mlp"},
              {"version", 1},
              {"n", graph_->num_variables()},
              {"k", graph_->num_states()},
              {"shape", {{"input", shape.input}, {"hidden", shape.hidden}, {"output", shape.output}}},
              {"seed", config_.seed},
              {"algo", std::string(to_string(algo_))},
              {"config", config_to_json(config_)},
              {"episode", episode_},
              {"adam_step", adam_.steps()},
              {"rng", rng_state.str()},
              {"blocks",
               json::array({json{{"name", "params"}, {"count", params.size()}},
                            json{{"name", "adam_m"}, {"count", adam_.first_moment().size()}},
                            json{{"name", "adam_v"}, {"count", adam_.second_moment().size()}},
                            json{{"name", "replay_inputs"}, {"count", replay_inputs.size()}},
                            json{{"name", "replay_targets"}, {"count", replay_targets.size()}}})}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write checkpoint " + path.string());
  out << header.dump() << '\n';
  write_block(out, params);
  write_block(out, adam_.first_moment());
  write_block(out, adam_.second_moment());
  write_block(out, replay_inputs);
  write_block(out, replay_targets);
  if (!out) throw InvalidInput("failed writing checkpoint " + path.string());
}

Trainer Trainer::resume(const FactorGraph& graph, const std::filesystem::path& path) {
  Checkpoint ck = read_checkpoint(path, true);
  const json& h = ck.header;
  if (h.at("n").get<int>() != graph.num_variables() || h.at("k").get<int>() != graph.num_states())
    throw InvalidInput("checkpoint was trained on a graph of a different size");
  Trainer t(graph, config_from_json(h.at("config")), parse_train_algo(h.at("algo").get<std::string>()));
  t.prior_ = MLPValueFunction(graph.num_variables(), graph.num_states(),
                              Mlp(shape_from_header(h), std::move(ck.blocks.at("params"))));
  t.adam_.first_moment() = std::move(ck.blocks.at("adam_m"));
  t.adam_.second_moment() = std::move(ck.blocks.at("adam_v"));
  t.adam_.set_steps(h.at("adam_step").get<std::uint64_t>());
  const auto& in = ck.blocks.at("replay_inputs");
  const auto& tg = ck.blocks.at("replay_targets");
  const std::size_t di = t.replay_.input_dim();
  const std::size_t dt = t.replay_.target_dim();
  if (in.size() % di != 0 || tg.size() % dt != 0 || in.size() / di != tg.size() / dt)
    throw InvalidInput("checkpoint replay blocks are inconsistent");
  for (std::size_t i = 0; i < in.size() / di; ++i)
    t.replay_.push(std::span<const double>(in.data() + i * di, di), std::span<const double>(tg.data() + i * dt, dt));
  std::istringstream rng_state(h.at("rng").get<std::string>());
  rng_state >> t.rng_;
  t.episode_ = h.at("episode").get<int>();
  return t;
}

MLPValueFunction load_prior_checkpoint(const std::filesystem::path& path) {
  Checkpoint ck = read_checkpoint(path, false);
  const json& h = ck.header;
  return MLPValueFunction(h.at("n").get<int>(), h.at("k").get<int>(),
                          Mlp(shape_from_header(h), std::move(ck.blocks.at("params"))));
}

}  // namespace treesample
