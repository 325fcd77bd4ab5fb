#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dropnet/network.hpp"

namespace dropnet {

/// Exact J_D of W_neg on P_((1,...,1),1) at p = 1/2:
/// (1/2) (1 - (1 - 2^-K) / ((1 + K/n) (1 + 1/n)^(d-2))).
double wneg_criterion_formula(std::size_t inputs, std::size_t width, std::size_t depth);

/// Output weight minimizing J_D of W_neg at p = 1/2:
/// K / (2 n^(d-1) (1 + K/n) (1 + 1/n)^(d-2)).
double wneg_output_scale_formula(std::size_t inputs, std::size_t width, std::size_t depth);

/// J_D lower bound 1/(36 K) for non-negative networks on P_((1,...,1),1), K > 18.
double nonnegative_criterion_bound(std::size_t inputs);

/// J_D lower bound for non-negative networks on P_((1,1),1).
inline constexpr double kNonnegativeTwoInputBound = 1.0 / 8.0;

/// Large-width limit of J_D for the K = 2 W_neg with output bias 1/5.
inline constexpr double kWNegTwoInputLimit = 1.0 / 10.0;

struct GrowthMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
};

/// Moments of the uniform growth network's dropout output on (1, ..., 1) at
/// p = 1/2: mean y, second moment y^2 (1 + 1/K)(1 + 1/n)^(d-1).
GrowthMoments growth_moments(std::size_t inputs, std::size_t width, std::size_t depth, double y);

/// (lambda y^(2/d) / 2) (K n + n^2 (d-2) + n), the L2-criterion ceiling of the growth network.
double growth_l2_bound(std::size_t inputs, std::size_t width, std::size_t depth, double y,
                       double lambda);

/// min(1/4, lambda^2 / (x.x)). Throws DomainError for x = 0 or lambda < 0.
double weight_decay_aversion(double lambda, std::span<const double> x);

/// max(0, 1 - 2 lambda / |x|), the output activation of the L2 optimum.
double optimal_activation(double lambda, std::span<const double> x);

/// (1/2) (((1-A)/2)^2 + ((1+A)/2 - 1)^2 + lambda 2A / |x|).
double j2_of_activation(double activation, double lambda, std::span<const double> x);

enum class BudgetSplit {
  /// Weight budget shared equally by all hidden nodes.
  even,
  /// Whole budget on the first hidden node.
  single,
};

/// Closed-form minimizer of the L2 criterion for depth-2 networks on P_(x,1).
struct WeightDecayOptimum {
  double activation = 0.0;              // A
  double output_bias = 0.0;             // (1 - A) / 2
  std::vector<double> per_node_budget;  // B_j, summing to 2A / |x|
  LayeredNetwork network;
  double j2_value = 0.0;
  double risk = 0.0;
};

WeightDecayOptimum build_weight_decay_optimum(double lambda, std::span<const double> x,
                                              std::size_t width,
                                              BudgetSplit split = BudgetSplit::even);

/// Sum of squared connection weights; biases excluded.
double squared_weight_norm(const LayeredNetwork& net);

/// risk + (lambda / 2) * squared_weight_norm.
double l2_criterion(const LayeredNetwork& net, const ExampleDistribution& dist, double lambda);

}  // namespace dropnet
