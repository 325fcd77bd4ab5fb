#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>

#include "dropnet/network.hpp"

namespace dropnet {

struct NoRegularizer {};

/// Dropout training: every step samples a fresh pattern with keep probability p.
struct DropoutRegularizer {
  double keep_probability = 0.5;
};

/// Adds lambda * w to every connection-weight gradient; biases are untouched.
struct WeightDecay {
  double lambda = 0.0;
};

using Regularizer = std::variant<NoRegularizer, DropoutRegularizer, WeightDecay>;

std::string_view regularizer_name(const Regularizer& r);

/// lr(t) = base / (1 + decay * t), t counted from 0.
struct LearningRateSchedule {
  double base = 0.1;
  double decay = 0.1;

  double at(std::uint64_t step) const { return base / (1.0 + decay * static_cast<double>(step)); }
};

struct TrainConfig {
  Regularizer regularizer = NoRegularizer{};
  std::uint64_t max_iters = 10000;
  LearningRateSchedule lr;
  /// Heavy-ball momentum in [0, 1).
  double momentum = 0.0;
  std::uint64_t seed = 0;
  /// Initial parameters are uniform on +-init_scale / sqrt(fan_in).
  double init_scale = 1.0;
  /// Training aborts with DivergenceError once a step loss exceeds this.
  double divergence_limit = 1e12;

  void validate() const;
};

/// K inputs, depth - 1 hidden layers of width n, one linear output. Weights
/// and biases of each layer are uniform on +-scale / sqrt(fan_in).
LayeredNetwork init_network(std::size_t inputs, std::size_t width, std::size_t depth,
                            std::uint64_t seed, double scale = 1.0);

/// Square loss of one example and its gradient with respect to every
/// parameter, laid out like the network itself.
struct LossGradient {
  double loss = 0.0;
  NetworkParameters gradient;
};

/// Gradient of (W(x) - y)^2. The ReLU derivative at 0 is taken as 0.
LossGradient loss_gradient(const LayeredNetwork& net, std::span<const double> x, double y);

/// Gradient of (D(W, x, R) - y)^2 for a fixed pattern R; dropped nodes get
/// zero gradient on their incoming weights and bias.
LossGradient dropout_loss_gradient(const LayeredNetwork& net, std::span<const double> x, double y,
                                   const DropoutPattern& pattern, double keep_probability);

/// SGD with momentum. Each step draws one example by weight, and under
/// dropout a fresh pattern, from a stream determined by config.seed.
LayeredNetwork sgd_train(const LayeredNetwork& initial, const ExampleDistribution& data,
                         const TrainConfig& config);

/// Full-batch gradient descent on risk + lambda/2 * |w|^2 (biases excluded).
LayeredNetwork minimize_l2_criterion(const LayeredNetwork& initial,
                                     const ExampleDistribution& data, double lambda,
                                     std::uint64_t steps, double learning_rate);

}  // namespace dropnet
