#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dropnet/network.hpp"

namespace dropnet {

/// How the common output weight c of a W_neg network is chosen.
enum class ScalePolicy {
  /// c = K / (2 n^(d-1) (1 + K/n) (1 + 1/n)^(d-2)).
  formula,
  /// Exact minimizer of J_D on P_((1,...,1),1) over the common output scale.
  optimized,
};

struct WNegSpec {
  std::size_t inputs = 2;  // K
  std::size_t width = 2;   // n, a positive multiple of K
  std::size_t depth = 2;   // d >= 2
  double output_bias = 0.0;
  ScalePolicy scale_policy = ScalePolicy::formula;
};

/// K x K block whose row i has -1 on columns before i, +1 on column i, 0 after.
/// On a binary input exactly one ReLU of the block fires (the first 1), unless
/// the input is all zero.
Matrix first_one_gadget(std::size_t inputs);

/// Negative-weight network: n/K first-one gadgets, all-ones deeper hidden
/// layers, output weights c, all hidden biases zero.
///
/// The optimized policy fits c exactly when K + n (d - 1) fits the default
/// enumeration cap, and otherwise by Monte Carlo with 200000 samples, seed 0.
LayeredNetwork build_w_neg(const WNegSpec& spec);

/// The K = 2 variant: output bias 1/5 and, by default, the optimized scale.
WNegSpec w_neg_k2_spec(std::size_t width, std::size_t depth,
                       ScalePolicy policy = ScalePolicy::optimized);

/// Common weight (y / (K n^(d-1)))^(1/d) of the uniform growth network.
double uniform_growth_weight(std::size_t inputs, std::size_t width, std::size_t depth, double y);

/// Every weight equal to uniform_growth_weight, all biases zero; outputs y on
/// (1, ..., 1). Requires 0 <= y <= K n^(d-1).
LayeredNetwork build_uniform_growth(std::size_t inputs, std::size_t width, std::size_t depth,
                                    double y);

/// K = 2, one hidden layer of two ReLUs, every weight 1, every bias 0.
LayeredNetwork figure1_network();

enum class PointMode {
  /// Half the weight on (x, y), half on (0, 0): the P_(x,y) distribution.
  with_origin,
  /// All weight on (x, y).
  point_mass,
};

ExampleDistribution point_distribution(std::vector<double> x, double y,
                                       PointMode mode = PointMode::with_origin);

/// Places each example's features at `positions` of a `new_dim` vector and
/// fills the remaining coordinates, in increasing order, from `fill`.
ExampleDistribution zero_embed(const ExampleDistribution& dist, std::size_t new_dim,
                               std::span<const std::size_t> positions,
                               std::span<const double> fill);

/// Network on `new_dim` inputs with the original first-layer columns at
/// `positions` and zero weight on every added feature.
LayeredNetwork embed_network(const LayeredNetwork& net, std::size_t new_dim,
                             std::span<const std::size_t> positions);

enum class ConstructionKind { figure1, w_neg, w_neg_k2, uniform_growth };

std::optional<ConstructionKind> parse_construction_kind(std::string_view name);
std::string_view to_string(ConstructionKind kind);
std::optional<ScalePolicy> parse_scale_policy(std::string_view name);
std::string_view to_string(ScalePolicy policy);

/// Parameters of any named construction; unused fields are ignored.
struct ConstructionSpec {
  ConstructionKind kind = ConstructionKind::figure1;
  std::size_t inputs = 2;
  std::size_t width = 2;
  std::size_t depth = 2;
  double target = 1.0;                     // uniform_growth
  std::optional<double> output_bias;       // w_neg: 0, w_neg_k2: 1/5
  std::optional<ScalePolicy> scale_policy; // w_neg: formula, w_neg_k2: optimized
};

LayeredNetwork build(const ConstructionSpec& spec);

}  // namespace dropnet
