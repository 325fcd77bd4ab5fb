#include "forward_kernel.hpp"

namespace dropnet::detail {

ForwardWorkspace::ForwardWorkspace(const LayeredNetwork& net) {
  levels.emplace_back(net.input_dim(), 0.0);
  for (const auto& layer : net.hidden_layers()) {
    levels.emplace_back(layer.width(), 0.0);
    pre_activations.emplace_back(layer.width(), 0.0);
  }
  nonzero.reserve(net.input_dim());
}

void affine(const DenseLayer& layer, std::span<const double> in, std::span<double> out,
            std::vector<std::size_t>& nonzero) {
  const std::size_t cols = layer.fan_in();
  nonzero.clear();
  for (std::size_t c = 0; c < cols; ++c) {
    if (in[c] != 0.0) nonzero.push_back(c);
  }
  // Dropping zero terms leaves the sum bit-identical, so both paths agree.
  if (2 * nonzero.size() < cols) {
    for (std::size_t r = 0; r < layer.width(); ++r) {
      const auto row = layer.weights.row(r);
      double acc = 0.0;
      for (std::size_t c : nonzero) acc += row[c] * in[c];
      out[r] = acc + layer.bias[r];
    }
  } else {
    for (std::size_t r = 0; r < layer.width(); ++r) {
      const auto row = layer.weights.row(r);
      double acc = 0.0;
      for (std::size_t c = 0; c < cols; ++c) acc += row[c] * in[c];
      out[r] = acc + layer.bias[r];
    }
  }
}

double output_node(const LayeredNetwork& net, std::span<const double> last) {
  const auto w = net.output_weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * last[i];
  return acc + net.output_bias();
}

double dropout_output(const LayeredNetwork& net, std::span<const double> x,
                      std::span<const std::uint8_t> keep, double keep_probability,
                      ForwardWorkspace& ws) {
  const double inv_p = 1.0 / keep_probability;
  std::size_t flag = 0;
  auto& inputs = ws.levels[0];
  for (std::size_t i = 0; i < x.size(); ++i) inputs[i] = keep[flag++] ? x[i] * inv_p : 0.0;

  for (std::size_t j = 0; j < net.hidden_layer_count(); ++j) {
    const auto& layer = net.hidden_layer(j);
    auto& pre = ws.pre_activations[j];
    affine(layer, ws.levels[j], pre, ws.nonzero);
    auto& out = ws.levels[j + 1];
    for (std::size_t r = 0; r < layer.width(); ++r) {
      out[r] = keep[flag++] ? relu(pre[r]) * inv_p : 0.0;
    }
  }
  return output_node(net, ws.levels.back());
}

double plain_output(const LayeredNetwork& net, std::span<const double> x, ForwardWorkspace& ws) {
  auto& inputs = ws.levels[0];
  for (std::size_t i = 0; i < x.size(); ++i) inputs[i] = x[i];
  for (std::size_t j = 0; j < net.hidden_layer_count(); ++j) {
    const auto& layer = net.hidden_layer(j);
    auto& pre = ws.pre_activations[j];
    affine(layer, ws.levels[j], pre, ws.nonzero);
    auto& out = ws.levels[j + 1];
    for (std::size_t r = 0; r < layer.width(); ++r) out[r] = relu(pre[r]);
  }
  return output_node(net, ws.levels.back());
}

}  // namespace dropnet::detail
