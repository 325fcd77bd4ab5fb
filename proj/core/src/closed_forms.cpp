#include "dropnet/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dropnet/error.hpp"

namespace dropnet {

namespace {

void validate_w_neg_shape(std::size_t k, std::size_t n, std::size_t d) {
  if (k == 0 || d < 2 || n == 0 || n % k != 0) {
    throw DomainError("W_neg formulas need K >= 1, d >= 2 and n a positive multiple of K");
  }
}

// (1 + K/n) (1 + 1/n)^(d-2)
double w_neg_spread(std::size_t k, std::size_t n, std::size_t d) {
  const double kn = static_cast<double>(k) / static_cast<double>(n);
  return (1.0 + kn) * std::pow(1.0 + 1.0 / static_cast<double>(n), static_cast<double>(d - 2));
}

double squared_norm(std::span<const double> x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

double checked_norm(std::span<const double> x) {
  const double xx = squared_norm(x);
  if (!(xx > 0.0)) throw DomainError("x must be non-zero");
  return std::sqrt(xx);
}

}  // namespace

double wneg_criterion_formula(std::size_t inputs, std::size_t width, std::size_t depth) {
  validate_w_neg_shape(inputs, width, depth);
  const double reach = 1.0 - std::ldexp(1.0, -static_cast<int>(inputs));
  return 0.5 * (1.0 - reach / w_neg_spread(inputs, width, depth));
}

double wneg_output_scale_formula(std::size_t inputs, std::size_t width, std::size_t depth) {
  validate_w_neg_shape(inputs, width, depth);
  const double n_pow = std::pow(static_cast<double>(width), static_cast<double>(depth - 1));
  return static_cast<double>(inputs) / (2.0 * n_pow * w_neg_spread(inputs, width, depth));
}

double nonnegative_criterion_bound(std::size_t inputs) {
  if (inputs == 0) throw DomainError("K must be positive");
  return 1.0 / (36.0 * static_cast<double>(inputs));
}

GrowthMoments growth_moments(std::size_t inputs, std::size_t width, std::size_t depth, double y) {
  if (inputs == 0 || width == 0 || depth == 0) throw DomainError("invalid growth architecture");
  const double reach = static_cast<double>(inputs) *
                       std::pow(static_cast<double>(width), static_cast<double>(depth - 1));
  if (!(y >= 0.0 && y <= reach)) throw DomainError("growth target y out of range");
  GrowthMoments m;
  m.mean = y;
  m.second_moment = y * y * (1.0 + 1.0 / static_cast<double>(inputs)) *
                    std::pow(1.0 + 1.0 / static_cast<double>(width), static_cast<double>(depth - 1));
  m.variance = m.second_moment - y * y;
  return m;
}

double growth_l2_bound(std::size_t inputs, std::size_t width, std::size_t depth, double y,
                       double lambda) {
  const double k = static_cast<double>(inputs);
  const double n = static_cast<double>(width);
  const double d = static_cast<double>(depth);
  return lambda * std::pow(y, 2.0 / d) / 2.0 * (k * n + n * n * (d - 2.0) + n);
}

double weight_decay_aversion(double lambda, std::span<const double> x) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be non-negative");
  const double norm = checked_norm(x);
  return std::min(0.25, lambda * lambda / (norm * norm));
}

double optimal_activation(double lambda, std::span<const double> x) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be non-negative");
  return std::max(0.0, 1.0 - 2.0 * lambda / checked_norm(x));
}

double j2_of_activation(double activation, double lambda, std::span<const double> x) {
  const double norm = checked_norm(x);
  const double at_origin = (1.0 - activation) / 2.0;
  const double at_x = (1.0 + activation) / 2.0 - 1.0;
  return 0.5 * (at_origin * at_origin + at_x * at_x + lambda * 2.0 * activation / norm);
}

WeightDecayOptimum build_weight_decay_optimum(double lambda, std::span<const double> x,
                                              std::size_t width, BudgetSplit split) {
  if (width == 0) throw DomainError("need at least one hidden node");
  const double activation = optimal_activation(lambda, x);
  const double xx = squared_norm(x);
  const double budget = 2.0 * activation / std::sqrt(xx);

  std::vector<double> per_node(width, 0.0);
  if (split == BudgetSplit::even) {
    std::fill(per_node.begin(), per_node.end(), budget / static_cast<double>(width));
  } else {
    per_node.front() = budget;
  }

  NetworkParameters params;
  params.input_dim = x.size();
  DenseLayer hidden{Matrix(width, x.size()), std::vector<double>(width, 0.0)};
  params.output_weights.resize(width);
  for (std::size_t j = 0; j < width; ++j) {
    const double alpha = std::sqrt(per_node[j] / (2.0 * xx));
    for (std::size_t i = 0; i < x.size(); ++i) hidden.weights(j, i) = alpha * x[i];
    params.output_weights[j] = std::sqrt(per_node[j] / 2.0);
  }
  params.hidden.push_back(std::move(hidden));
  params.output_bias = (1.0 - activation) / 2.0;

  const double miss = (1.0 - activation) / 2.0;
  return WeightDecayOptimum{activation,
                            params.output_bias,
                            std::move(per_node),
                            LayeredNetwork(std::move(params)),
                            j2_of_activation(activation, lambda, x),
                            miss * miss};
}

double squared_weight_norm(const LayeredNetwork& net) {
  double total = 0.0;
  for (const auto& layer : net.hidden_layers()) {
    for (double w : layer.weights.values()) total += w * w;
  }
  for (double w : net.output_weights()) total += w * w;
  return total;
}

double l2_criterion(const LayeredNetwork& net, const ExampleDistribution& dist, double lambda) {
  return risk(net, dist) + 0.5 * lambda * squared_weight_norm(net);
}

}  // namespace dropnet
