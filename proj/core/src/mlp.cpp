#include "treesample/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Core>

#include "treesample/errors.hpp"

namespace treesample {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMatrix>;
using Weights = Eigen::Map<RowMatrix>;
using ConstVector = Eigen::Map<const Eigen::VectorXd>;
using Vector = Eigen::Map<Eigen::VectorXd>;

std::vector<int> layer_sizes(const MlpShape& shape) {
  std::vector<int> sizes{shape.input};
  sizes.insert(sizes.end(), shape.hidden.begin(), shape.hidden.end());
  sizes.push_back(shape.output);
  return sizes;
}

void validate(const MlpShape& shape) {
  if (shape.input <= 0 || shape.output <= 0) throw InvalidInput("MLP needs positive input and output sizes");
  for (int h : shape.hidden)
    if (h <= 0) throw InvalidInput("MLP hidden layers need positive widths");
}

// Activations are stored column-per-example.
struct Pass {
  std::vector<Matrix> pre;   // pre-activation of every layer
  std::vector<Matrix> post;  // post[0] is the input
};

Pass run_forward(const MlpShape& shape, std::span<const double> params,
                 std::span<const double> inputs, std::size_t batch) {
  const auto sizes = layer_sizes(shape);
  const std::size_t layers = sizes.size() - 1;
  const auto cols = static_cast<Eigen::Index>(batch);
  Pass pass;
  pass.post.reserve(layers + 1);
  pass.pre.reserve(layers);
  pass.post.emplace_back(Eigen::Map<const Matrix>(inputs.data(), sizes[0], cols));
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    ConstWeights w(params.data() + offset, out, in);
    offset += static_cast<std::size_t>(out) * in;
    ConstVector b(params.data() + offset, out);
    offset += out;
    Matrix z = w * pass.post.back();
    z.colwise() += b;
    if (l + 1 < layers) {
      pass.post.emplace_back(z.cwiseMax(0.0));
    } else {
      pass.post.emplace_back(z);
    }
    pass.pre.push_back(std::move(z));
  }
  if (!pass.post.back().allFinite()) throw std::domain_error("MLP produced a non-finite output");
  return pass;
}

}  // namespace

std::size_t MlpShape::parameter_count() const {
  const auto sizes = layer_sizes(*this);
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    total += static_cast<std::size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  return total;
}

Mlp::Mlp(MlpShape shape, std::uint64_t seed) : shape_(std::move(shape)) {
  validate(shape_);
  params_.assign(shape_.parameter_count(), 0.0);
  Rng rng(seed);
  const auto sizes = layer_sizes(shape_);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / sizes[l]));
    const std::size_t nw = static_cast<std::size_t>(sizes[l + 1]) * sizes[l];
    for (std::size_t i = 0; i < nw; ++i) params_[offset + i] = normal(rng);
    offset += nw + sizes[l + 1];
  }
}

Mlp::Mlp(MlpShape shape, std::vector<double> parameters)
    : shape_(std::move(shape)), params_(std::move(parameters)) {
  validate(shape_);
  if (params_.size() != shape_.parameter_count())
    throw InvalidInput("parameter vector does not match the MLP shape");
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  return forward_batch(input, 1);
}

std::vector<double> Mlp::forward_batch(std::span<const double> inputs, std::size_t batch) const {
  if (inputs.size() != batch * shape_.input) throw InvalidInput("MLP input has the wrong size");
  if (!std::all_of(params_.begin(), params_.end(), [](double p) { return std::isfinite(p); }))
    throw std::domain_error("MLP parameters are not finite");
  const Pass pass = run_forward(shape_, params_, inputs, batch);
  const Matrix& out = pass.post.back();
  return std::vector<double>(out.data(), out.data() + out.size());
}

double Mlp::loss_and_gradient(std::span<const double> inputs, std::span<const double> targets,
                              std::size_t batch, std::span<double> grad) const {
  if (batch == 0) throw InvalidInput("loss needs a non-empty batch");
  if (inputs.size() != batch * shape_.input || targets.size() != batch * shape_.output)
    throw InvalidInput("loss inputs or targets have the wrong size");
  if (!grad.empty() && grad.size() != params_.size()) throw InvalidInput("gradient buffer has the wrong size");

  const Pass pass = run_forward(shape_, params_, inputs, batch);
  const auto cols = static_cast<Eigen::Index>(batch);
  const Eigen::Map<const Matrix> t(targets.data(), shape_.output, cols);
  Matrix delta = pass.post.back() - t;
  const double loss = delta.squaredNorm() / static_cast<double>(batch);
  if (grad.empty()) return loss;

  delta *= 2.0 / static_cast<double>(batch);
  const auto sizes = layer_sizes(shape_);
  const std::size_t layers = sizes.size() - 1;
  std::vector<std::size_t> offsets(layers);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = offset;
    offset += static_cast<std::size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  }
  for (std::size_t l = layers; l-- > 0;) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    Weights gw(grad.data() + offsets[l], out, in);
    Vector gb(grad.data() + offsets[l] + static_cast<std::size_t>(out) * in, out);
    gw.noalias() = delta * pass.post[l].transpose();
    gb = delta.rowwise().sum();
    if (l == 0) break;
    ConstWeights w(params_.data() + offsets[l], out, in);
    Matrix back = w.transpose() * delta;
    delta = back.cwiseProduct((pass.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return loss;
}

Adam::Adam(std::size_t size, AdamConfig config) : config_(config), m_(size, 0.0), v_(size, 0.0) {
  if (!(config_.learning_rate > 0.0)) throw InvalidInput("learning rate must be positive");
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw InvalidInput("Adam state does not match the parameter count");
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, int input_dim, int target_dim)
    : capacity_(capacity), input_dim_(input_dim), target_dim_(target_dim) {
  if (capacity == 0) throw InvalidInput("replay capacity must be positive");
  if (input_dim <= 0 || target_dim <= 0) throw InvalidInput("replay rows need positive widths");
  inputs_.resize(capacity * input_dim);
  targets_.resize(capacity * target_dim);
}

void ReplayBuffer::push(std::span<const double> input, std::span<const double> target) {
  if (input.size() != static_cast<std::size_t>(input_dim_) || target.size() != static_cast<std::size_t>(target_dim_))
    throw InvalidInput("replay row has the wrong size");
  std::size_t s;
  if (size_ < capacity_) {
    s = slot(size_);
    ++size_;
  } else {
    s = head_;
    head_ = (head_ + 1) % capacity_;
  }
  std::copy(input.begin(), input.end(), inputs_.begin() + s * input_dim_);
  std::copy(target.begin(), target.end(), targets_.begin() + s * target_dim_);
}

void ReplayBuffer::sample(std::size_t batch, Rng& rng, std::vector<double>& inputs,
                          std::vector<double>& targets) const {
  if (size_ == 0) throw InvalidInput("cannot sample from an empty replay buffer");
  inputs.resize(batch * input_dim_);
  targets.resize(batch * target_dim_);
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t s = slot(pick(rng));
    std::copy_n(inputs_.begin() + s * input_dim_, input_dim_, inputs.begin() + b * input_dim_);
    std::copy_n(targets_.begin() + s * target_dim_, target_dim_, targets.begin() + b * target_dim_);
  }
}

std::span<const double> ReplayBuffer::input(std::size_t i) const {
  return {inputs_.data() + slot(i) * input_dim_, static_cast<std::size_t>(input_dim_)};
}

std::span<const double> ReplayBuffer::target(std::size_t i) const {
  return {targets_.data() + slot(i) * target_dim_, static_cast<std::size_t>(target_dim_)};
}

void ReplayBuffer::clear() {
  head_ = 0;
  size_ = 0;
}

std::vector<int> default_hidden_layers() { return {256, 256, 256, 256}; }

MLPValueFunction::MLPValueFunction(int n, int k, std::vector<int> hidden, std::uint64_t seed)
    : n_(n), k_(k), mlp_(MlpShape{n * (k + 1), std::move(hidden), k}, seed) {}

MLPValueFunction::MLPValueFunction(int n, int k, Mlp mlp) : n_(n), k_(k), mlp_(std::move(mlp)) {
  if (mlp_.shape().input != n * (k + 1) || mlp_.shape().output != k)
    throw InvalidInput("MLP shape does not match the graph dimensions");
}

std::vector<double> MLPValueFunction::values(const FactorGraph& graph,
                                             std::span<const int> prefix) const {
  if (graph.num_variables() != n_ || graph.num_states() != k_)
    throw InvalidInput("value function was built for a different graph size");
  if (static_cast<int>(prefix.size()) >= n_) throw InvalidInput("prior needs a prefix shorter than N");
  return mlp_.forward(encode(graph, prefix));
}

}  // namespace treesample
