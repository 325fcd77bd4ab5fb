#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dropnet/network.hpp"

namespace dropnet::detail {

/// Scratch buffers sized for one network; reuse across evaluations.
struct ForwardWorkspace {
  explicit ForwardWorkspace(const LayeredNetwork& net);

  // levels[0] holds the (dropout-scaled) inputs, levels[j] hidden layer j.
  std::vector<std::vector<double>> levels;
  // pre_activations[j - 1] holds w.v + bias for hidden layer j.
  std::vector<std::vector<double>> pre_activations;
  std::vector<std::size_t> nonzero;
};

/// out[r] = bias[r] + W.row(r) . in, skipping zero entries of `in`.
void affine(const DenseLayer& layer, std::span<const double> in, std::span<double> out,
            std::vector<std::size_t>& nonzero);

inline double relu(double a) { return a > 0.0 ? a : 0.0; }

/// Linear output node applied to the last level.
double output_node(const LayeredNetwork& net, std::span<const double> last);

/// D(W, x, R) with flat keep flags ordered (inputs, layer 1, ..., last hidden).
double dropout_output(const LayeredNetwork& net, std::span<const double> x,
                      std::span<const std::uint8_t> keep, double keep_probability,
                      ForwardWorkspace& ws);

/// W(x); fills ws.levels and ws.pre_activations with the plain pass.
double plain_output(const LayeredNetwork& net, std::span<const double> x, ForwardWorkspace& ws);

}  // namespace dropnet::detail
