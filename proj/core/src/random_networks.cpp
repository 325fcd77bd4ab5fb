#include "dropnet/random_networks.hpp"

#include <vector>

namespace dropnet {

namespace {

double draw(Rng& rng, double range, bool nonnegative) {
  return nonnegative ? rng.uniform(0.0, range) : rng.uniform(-range, range);
}

}  // namespace

LayeredNetwork random_network(std::size_t inputs, std::span<const std::size_t> widths, Rng& rng,
                              const RandomNetworkOptions& options) {
  NetworkParameters params;
  params.input_dim = inputs;
  std::size_t fan_in = inputs;
  for (std::size_t width : widths) {
    DenseLayer layer{Matrix(width, fan_in), std::vector<double>(width)};
    for (double& w : layer.weights.values()) w = draw(rng, options.weight_range, options.nonnegative_weights);
    for (double& b : layer.bias) b = draw(rng, options.bias_range, options.nonnegative_biases);
    params.hidden.push_back(std::move(layer));
    fan_in = width;
  }
  params.output_weights.resize(fan_in);
  for (double& w : params.output_weights) w = draw(rng, options.weight_range, options.nonnegative_weights);
  params.output_bias = draw(rng, options.bias_range, options.nonnegative_biases);
  return LayeredNetwork(std::move(params));
}

LayeredNetwork random_small_network(Rng& rng, const RandomNetworkOptions& options,
                                    std::size_t max_inputs, std::size_t max_hidden_layers,
                                    std::size_t max_width) {
  const std::size_t inputs = 1 + rng.below(max_inputs);
  const std::size_t layers = 1 + rng.below(max_hidden_layers);
  std::vector<std::size_t> widths(layers);
  for (auto& w : widths) w = 1 + rng.below(max_width);
  return random_network(inputs, widths, rng, options);
}

ExampleDistribution random_distribution(std::size_t inputs, std::size_t count, Rng& rng,
                                        double range, bool nonnegative) {
  std::vector<Example> entries(count);
  double total = 0.0;
  for (auto& e : entries) {
    e.x.resize(inputs);
    for (double& v : e.x) v = draw(rng, range, nonnegative);
    e.y = rng.uniform(-2.0, 2.0);
    e.weight = 0.1 + rng.uniform();
    total += e.weight;
  }
  for (auto& e : entries) e.weight /= total;
  // Absorb normalization rounding into the last weight.
  double rest = 1.0;
  for (std::size_t i = 0; i + 1 < entries.size(); ++i) rest -= entries[i].weight;
  entries.back().weight = rest;
  return ExampleDistribution(std::move(entries));
}

}  // namespace dropnet
