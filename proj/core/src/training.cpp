#include "dropnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dropnet/error.hpp"
#include "dropnet/rng.hpp"

namespace dropnet {

namespace {

NetworkParameters zeros_like(const NetworkParameters& p) {
  NetworkParameters z;
  z.input_dim = p.input_dim;
  for (const auto& layer : p.hidden) {
    z.hidden.push_back(
        DenseLayer{Matrix(layer.weights.rows(), layer.weights.cols()), std::vector<double>(layer.bias.size())});
  }
  z.output_weights.assign(p.output_weights.size(), 0.0);
  return z;
}

std::vector<std::span<double>> weight_blocks(NetworkParameters& p) {
  std::vector<std::span<double>> blocks;
  for (auto& layer : p.hidden) blocks.push_back(layer.weights.values());
  blocks.push_back(p.output_weights);
  return blocks;
}

std::vector<std::span<double>> bias_blocks(NetworkParameters& p) {
  std::vector<std::span<double>> blocks;
  for (auto& layer : p.hidden) blocks.push_back(layer.bias);
  blocks.emplace_back(&p.output_bias, 1);
  return blocks;
}

std::vector<std::span<double>> all_blocks(NetworkParameters& p) {
  auto blocks = weight_blocks(p);
  auto biases = bias_blocks(p);
  blocks.insert(blocks.end(), biases.begin(), biases.end());
  return blocks;
}

// Forward and backward pass on raw parameters. `keep` holds one flag per
// droppable node (inputs first) or is empty for the plain network.
class Backprop {
 public:
  explicit Backprop(const NetworkParameters& shape) {
    levels_.emplace_back(shape.input_dim);
    for (const auto& layer : shape.hidden) {
      pre_.emplace_back(layer.bias.size());
      levels_.emplace_back(layer.bias.size());
    }
    grad_level_.resize(levels_.size());
    for (std::size_t j = 0; j < levels_.size(); ++j) grad_level_[j].resize(levels_[j].size());
  }

  /// Writes the full gradient of (out - y)^2 into `grad` and returns the loss.
  double run(const NetworkParameters& net, std::span<const double> x, double y,
             std::span<const std::uint8_t> keep, double p, NetworkParameters& grad) {
    const bool dropout = !keep.empty();
    const double inv_p = dropout ? 1.0 / p : 1.0;
    std::size_t flag = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      levels_[0][i] = dropout ? (keep[flag++] ? x[i] * inv_p : 0.0) : x[i];
    }
    for (std::size_t j = 0; j < net.hidden.size(); ++j) {
      const auto& layer = net.hidden[j];
      const auto& in = levels_[j];
      auto& out = levels_[j + 1];
      for (std::size_t r = 0; r < layer.bias.size(); ++r) {
        const auto row = layer.weights.row(r);
        double z = layer.bias[r];
        for (std::size_t c = 0; c < in.size(); ++c) z += row[c] * in[c];
        pre_[j][r] = z;
        const double h = z > 0.0 ? z : 0.0;
        out[r] = dropout ? (keep[flag++] ? h * inv_p : 0.0) : h;
      }
    }
    const auto& last = levels_.back();
    double out = net.output_bias;
    for (std::size_t i = 0; i < last.size(); ++i) out += net.output_weights[i] * last[i];
    const double residual = out - y;
    const double g = 2.0 * residual;

    grad.output_bias = g;
    auto& g_last = grad_level_.back();
    for (std::size_t i = 0; i < last.size(); ++i) {
      grad.output_weights[i] = g * last[i];
      g_last[i] = g * net.output_weights[i];
    }
    // Walk hidden layers top-down; `flag` rewinds over their keep bits.
    for (std::size_t j = net.hidden.size(); j-- > 0;) {
      const auto& layer = net.hidden[j];
      const std::size_t width = layer.bias.size();
      if (dropout) flag -= width;
      const auto& in = levels_[j];
      auto& g_out = grad_level_[j + 1];
      auto& g_in = grad_level_[j];
      std::fill(g_in.begin(), g_in.end(), 0.0);
      auto& gl = grad.hidden[j];
      for (std::size_t r = 0; r < width; ++r) {
        double dz = g_out[r];
        if (dropout) dz = keep[flag + r] ? dz * inv_p : 0.0;
        if (!(pre_[j][r] > 0.0)) dz = 0.0;
        gl.bias[r] = dz;
        auto g_row = gl.weights.row(r);
        const auto w_row = layer.weights.row(r);
        for (std::size_t c = 0; c < in.size(); ++c) {
          g_row[c] = dz * in[c];
          g_in[c] += dz * w_row[c];
        }
      }
    }
    return residual * residual;
  }

 private:
  std::vector<std::vector<double>> levels_;
  std::vector<std::vector<double>> pre_;
  std::vector<std::vector<double>> grad_level_;
};

void add_weight_decay(NetworkParameters& grad, NetworkParameters& params, double lambda) {
  auto g = weight_blocks(grad);
  auto w = weight_blocks(params);
  for (std::size_t b = 0; b < g.size(); ++b) {
    for (std::size_t i = 0; i < g[b].size(); ++i) g[b][i] += lambda * w[b][i];
  }
}

std::vector<double> cumulative_weights(const ExampleDistribution& data) {
  std::vector<double> cdf;
  double total = 0.0;
  for (const auto& e : data.entries()) cdf.push_back(total += e.weight);
  cdf.back() = 1.0;
  return cdf;
}

LossGradient gradient_of(const LayeredNetwork& net, std::span<const double> x, double y,
                         std::span<const std::uint8_t> keep, double p) {
  check_input(net, x);
  LossGradient out;
  out.gradient = zeros_like(net.parameters());
  Backprop bp(net.parameters());
  out.loss = bp.run(net.parameters(), x, y, keep, p, out.gradient);
  return out;
}

bool all_finite(NetworkParameters& p) {
  for (auto block : all_blocks(p)) {
    for (double v : block) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace

std::string_view regularizer_name(const Regularizer& r) {
  if (std::holds_alternative<DropoutRegularizer>(r)) return "dropout";
  if (std::holds_alternative<WeightDecay>(r)) return "weight-decay";
  return "none";
}

void TrainConfig::validate() const {
  if (const auto* d = std::get_if<DropoutRegularizer>(&regularizer)) {
    check_keep_probability(d->keep_probability);
  }
  if (const auto* wd = std::get_if<WeightDecay>(&regularizer)) {
    if (!(wd->lambda >= 0.0) || !std::isfinite(wd->lambda)) {
      throw DomainError("weight decay lambda must be finite and >= 0");
    }
  }
  if (max_iters < 1) throw DomainError("max_iters must be at least 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("momentum must lie in [0, 1)");
  if (!(lr.base >= 0.0) || !(lr.decay >= 0.0)) {
    throw DomainError("learning-rate base and decay must be non-negative");
  }
  if (!(init_scale > 0.0)) throw DomainError("init scale must be positive");
}

LayeredNetwork init_network(std::size_t inputs, std::size_t width, std::size_t depth,
                            std::uint64_t seed, double scale) {
  if (inputs == 0 || width == 0 || depth == 0) {
    throw DomainError("architecture needs K >= 1, n >= 1 and d >= 1");
  }
  Rng rng(seed);
  auto draw_layer = [&](std::size_t fan_in, std::span<double> target) {
    const double bound = scale / std::sqrt(static_cast<double>(fan_in));
    for (double& v : target) v = rng.uniform(-bound, bound);
  };
  NetworkParameters params;
  params.input_dim = inputs;
  std::size_t fan_in = inputs;
  for (std::size_t layer = 1; layer < depth; ++layer) {
    DenseLayer l{Matrix(width, fan_in), std::vector<double>(width)};
    draw_layer(fan_in, l.weights.values());
    draw_layer(fan_in, l.bias);
    params.hidden.push_back(std::move(l));
    fan_in = width;
  }
  params.output_weights.resize(fan_in);
  draw_layer(fan_in, params.output_weights);
  draw_layer(fan_in, std::span<double>(&params.output_bias, 1));
  return LayeredNetwork(std::move(params));
}

LossGradient loss_gradient(const LayeredNetwork& net, std::span<const double> x, double y) {
  return gradient_of(net, x, y, {}, 1.0);
}

LossGradient dropout_loss_gradient(const LayeredNetwork& net, std::span<const double> x, double y,
                                   const DropoutPattern& pattern, double keep_probability) {
  check_keep_probability(keep_probability);
  const auto flags = pattern.flatten();
  if (flags.size() != net.droppable_count() || pattern.input_mask.size() != net.input_dim()) {
    throw ShapeError("dropout pattern does not match the network");
  }
  return gradient_of(net, x, y, flags, keep_probability);
}

LayeredNetwork sgd_train(const LayeredNetwork& initial, const ExampleDistribution& data,
                         const TrainConfig& config) {
  config.validate();
  if (data.input_dim() != initial.input_dim()) {
    throw ShapeError("training data has " + std::to_string(data.input_dim()) +
                     " inputs, network expects " + std::to_string(initial.input_dim()));
  }
  NetworkParameters params = initial.parameters();
  NetworkParameters grad = zeros_like(params);
  NetworkParameters velocity = zeros_like(params);
  auto p_blocks = all_blocks(params);
  auto g_blocks = all_blocks(grad);
  auto v_blocks = all_blocks(velocity);

  const auto* dropout = std::get_if<DropoutRegularizer>(&config.regularizer);
  const auto* decay = std::get_if<WeightDecay>(&config.regularizer);
  const double p = dropout ? dropout->keep_probability : 1.0;
  std::vector<std::uint8_t> keep(dropout ? initial.droppable_count() : 0);
  const auto cdf = cumulative_weights(data);
  Backprop bp(params);

  for (std::uint64_t t = 0; t < config.max_iters; ++t) {
    Rng rng(config.seed, t);
    const auto pick = std::upper_bound(cdf.begin(), cdf.end(), rng.uniform()) - cdf.begin();
    const auto& example = data.entries()[std::min<std::size_t>(pick, cdf.size() - 1)];
    for (auto& k : keep) k = rng.bernoulli(p) ? 1 : 0;

    const double loss = bp.run(params, example.x, example.y, keep, p, grad);
    if (!std::isfinite(loss) || loss > config.divergence_limit) {
      throw DivergenceError("training diverged at step " + std::to_string(t) + " (loss " +
                            std::to_string(loss) + ")");
    }
    if (decay) add_weight_decay(grad, params, decay->lambda);

    const double lr = config.lr.at(t);
    for (std::size_t b = 0; b < p_blocks.size(); ++b) {
      for (std::size_t i = 0; i < p_blocks[b].size(); ++i) {
        double& v = v_blocks[b][i];
        v = config.momentum * v - lr * g_blocks[b][i];
        p_blocks[b][i] += v;
      }
    }
  }
  if (!all_finite(params)) throw DivergenceError("training produced non-finite parameters");
  return LayeredNetwork(std::move(params));
}

LayeredNetwork minimize_l2_criterion(const LayeredNetwork& initial,
                                     const ExampleDistribution& data, double lambda,
                                     std::uint64_t steps, double learning_rate) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be non-negative");
  if (!(learning_rate > 0.0)) throw DomainError("learning rate must be positive");
  if (data.input_dim() != initial.input_dim()) throw ShapeError("data/network input mismatch");
  NetworkParameters params = initial.parameters();
  NetworkParameters total = zeros_like(params);
  NetworkParameters single = zeros_like(params);
  auto p_blocks = all_blocks(params);
  auto t_blocks = all_blocks(total);
  auto s_blocks = all_blocks(single);
  Backprop bp(params);

  for (std::uint64_t step = 0; step < steps; ++step) {
    for (auto block : t_blocks) std::fill(block.begin(), block.end(), 0.0);
    for (const auto& e : data.entries()) {
      bp.run(params, e.x, e.y, {}, 1.0, single);
      for (std::size_t b = 0; b < t_blocks.size(); ++b) {
        for (std::size_t i = 0; i < t_blocks[b].size(); ++i) t_blocks[b][i] += e.weight * s_blocks[b][i];
      }
    }
    add_weight_decay(total, params, lambda);
    for (std::size_t b = 0; b < p_blocks.size(); ++b) {
      for (std::size_t i = 0; i < p_blocks[b].size(); ++i) p_blocks[b][i] -= learning_rate * t_blocks[b][i];
    }
  }
  if (!all_finite(params)) throw DivergenceError("L2 descent produced non-finite parameters");
  return LayeredNetwork(std::move(params));
}

}  // namespace dropnet
