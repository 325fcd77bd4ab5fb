#pragma once

#include <cstddef>
#include <span>

#include "dropnet/network.hpp"
#include "dropnet/rng.hpp"

namespace dropnet {

struct RandomNetworkOptions {
  double weight_range = 1.0;  // weights uniform on [-range, range] (or [0, range])
  double bias_range = 0.5;
  bool nonnegative_weights = false;
  bool nonnegative_biases = false;
};

LayeredNetwork random_network(std::size_t inputs, std::span<const std::size_t> widths, Rng& rng,
                              const RandomNetworkOptions& options = {});

/// Random architecture with 1..max_inputs inputs, 1..max_hidden_layers hidden
/// layers of width 1..max_width, then random parameters.
LayeredNetwork random_small_network(Rng& rng, const RandomNetworkOptions& options = {},
                                    std::size_t max_inputs = 3,
                                    std::size_t max_hidden_layers = 2,
                                    std::size_t max_width = 3);

/// `count` examples with inputs uniform on [-range, range] ([0, range] when
/// non-negative), labels uniform on [-2, 2], and random normalized weights.
ExampleDistribution random_distribution(std::size_t inputs, std::size_t count, Rng& rng,
                                        double range = 1.0, bool nonnegative = false);

}  // namespace dropnet
