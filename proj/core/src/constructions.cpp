#include "dropnet/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dropnet/closed_forms.hpp"
#include "dropnet/criterion.hpp"
#include "dropnet/error.hpp"

namespace dropnet {

namespace {

void validate_w_neg(const WNegSpec& spec) {
  if (spec.inputs == 0) throw DomainError("W_neg needs at least one input");
  if (spec.depth < 2) throw DomainError("W_neg needs depth d >= 2");
  if (spec.width == 0 || spec.width % spec.inputs != 0) {
    throw DomainError("W_neg width n must be a positive multiple of K (n = " +
                      std::to_string(spec.width) + ", K = " + std::to_string(spec.inputs) + ")");
  }
}

LayeredNetwork w_neg_with_scale(const WNegSpec& spec, double c) {
  const std::size_t k = spec.inputs;
  const std::size_t n = spec.width;
  const Matrix gadget = first_one_gadget(k);

  NetworkParameters params;
  params.input_dim = k;
  DenseLayer first{Matrix(n, k), std::vector<double>(n, 0.0)};
  for (std::size_t copy = 0; copy < n / k; ++copy) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) first.weights(copy * k + i, j) = gadget(i, j);
    }
  }
  params.hidden.push_back(std::move(first));
  for (std::size_t layer = 2; layer < spec.depth; ++layer) {
    params.hidden.push_back(DenseLayer{Matrix(n, n, 1.0), std::vector<double>(n, 0.0)});
  }
  params.output_weights.assign(n, c);
  params.output_bias = spec.output_bias;
  return LayeredNetwork(std::move(params));
}

}  // namespace

Matrix first_one_gadget(std::size_t inputs) {
  Matrix block(inputs, inputs);
  for (std::size_t i = 0; i < inputs; ++i) {
    for (std::size_t j = 0; j < i; ++j) block(i, j) = -1.0;
    block(i, i) = 1.0;
  }
  return block;
}

LayeredNetwork build_w_neg(const WNegSpec& spec) {
  validate_w_neg(spec);
  if (spec.scale_policy == ScalePolicy::formula) {
    return w_neg_with_scale(spec, wneg_output_scale_formula(spec.inputs, spec.width, spec.depth));
  }
  const LayeredNetwork unit = w_neg_with_scale(spec, 1.0);
  const auto dist = point_distribution(std::vector<double>(spec.inputs, 1.0), 1.0);
  DropoutConfig config = DropoutConfig::exact();
  if (unit.droppable_count() > config.enumeration_cap) {
    config = DropoutConfig::monte_carlo(200000, 0);
  }
  const auto fit = optimize_output_scale(unit, dist, config);
  return scale_output_weights(unit, fit.c_star);
}

WNegSpec w_neg_k2_spec(std::size_t width, std::size_t depth, ScalePolicy policy) {
  return WNegSpec{2, width, depth, 0.2, policy};
}

double uniform_growth_weight(std::size_t inputs, std::size_t width, std::size_t depth, double y) {
  if (inputs == 0 || width == 0 || depth == 0) throw DomainError("invalid growth architecture");
  const double reach = static_cast<double>(inputs) *
                       std::pow(static_cast<double>(width), static_cast<double>(depth - 1));
  if (!(y >= 0.0 && y <= reach)) {
    throw DomainError("growth target y must lie in [0, K n^(d-1)] = [0, " + std::to_string(reach) +
                      "]");
  }
  return std::pow(y / reach, 1.0 / static_cast<double>(depth));
}

LayeredNetwork build_uniform_growth(std::size_t inputs, std::size_t width, std::size_t depth,
                                    double y) {
  const double c = uniform_growth_weight(inputs, width, depth, y);
  NetworkParameters params;
  params.input_dim = inputs;
  std::size_t fan_in = inputs;
  for (std::size_t layer = 1; layer < depth; ++layer) {
    params.hidden.push_back(DenseLayer{Matrix(width, fan_in, c), std::vector<double>(width, 0.0)});
    fan_in = width;
  }
  params.output_weights.assign(fan_in, c);
  return LayeredNetwork(std::move(params));
}

LayeredNetwork figure1_network() {
  NetworkParameters params;
  params.input_dim = 2;
  params.hidden.push_back(DenseLayer{Matrix(2, 2, 1.0), {0.0, 0.0}});
  params.output_weights = {1.0, 1.0};
  return LayeredNetwork(std::move(params));
}

ExampleDistribution point_distribution(std::vector<double> x, double y, PointMode mode) {
  if (mode == PointMode::point_mass) return ExampleDistribution({Example{std::move(x), y, 1.0}});
  std::vector<double> origin(x.size(), 0.0);
  return ExampleDistribution({Example{std::move(x), y, 0.5}, Example{std::move(origin), 0.0, 0.5}});
}

namespace {

void check_positions(std::size_t old_dim, std::size_t new_dim,
                     std::span<const std::size_t> positions) {
  if (positions.size() != old_dim) {
    throw ShapeError("embedding needs one position per original feature");
  }
  if (new_dim < old_dim) throw ShapeError("embedding target dimension is too small");
  std::vector<bool> used(new_dim, false);
  for (std::size_t pos : positions) {
    if (pos >= new_dim) throw ShapeError("embedding position out of range");
    if (used[pos]) throw ShapeError("embedding positions must be distinct");
    used[pos] = true;
  }
}

}  // namespace

ExampleDistribution zero_embed(const ExampleDistribution& dist, std::size_t new_dim,
                               std::span<const std::size_t> positions,
                               std::span<const double> fill) {
  const std::size_t k = dist.input_dim();
  check_positions(k, new_dim, positions);
  if (fill.size() != new_dim - k) {
    throw ShapeError("fill must supply exactly new_dim - K values");
  }
  std::vector<bool> original(new_dim, false);
  for (std::size_t pos : positions) original[pos] = true;

  std::vector<Example> out;
  for (const auto& e : dist.entries()) {
    Example embedded{std::vector<double>(new_dim, 0.0), e.y, e.weight};
    for (std::size_t i = 0; i < k; ++i) embedded.x[positions[i]] = e.x[i];
    std::size_t next = 0;
    for (std::size_t j = 0; j < new_dim; ++j) {
      if (!original[j]) embedded.x[j] = fill[next++];
    }
    out.push_back(std::move(embedded));
  }
  return ExampleDistribution(std::move(out));
}

LayeredNetwork embed_network(const LayeredNetwork& net, std::size_t new_dim,
                             std::span<const std::size_t> positions) {
  check_positions(net.input_dim(), new_dim, positions);
  auto params = net.parameters();
  params.input_dim = new_dim;
  if (params.hidden.empty()) {
    std::vector<double> w(new_dim, 0.0);
    for (std::size_t i = 0; i < positions.size(); ++i) w[positions[i]] = params.output_weights[i];
    params.output_weights = std::move(w);
  } else {
    const Matrix& old = params.hidden.front().weights;
    Matrix widened(old.rows(), new_dim);
    for (std::size_t r = 0; r < old.rows(); ++r) {
      for (std::size_t i = 0; i < positions.size(); ++i) widened(r, positions[i]) = old(r, i);
    }
    params.hidden.front().weights = std::move(widened);
  }
  return LayeredNetwork(std::move(params));
}

std::optional<ConstructionKind> parse_construction_kind(std::string_view name) {
  if (name == "figure1") return ConstructionKind::figure1;
  if (name == "w_neg") return ConstructionKind::w_neg;
  if (name == "w_neg_k2") return ConstructionKind::w_neg_k2;
  if (name == "uniform_growth") return ConstructionKind::uniform_growth;
  return std::nullopt;
}

std::string_view to_string(ConstructionKind kind) {
  switch (kind) {
    case ConstructionKind::figure1: return "figure1";
    case ConstructionKind::w_neg: return "w_neg";
    case ConstructionKind::w_neg_k2: return "w_neg_k2";
    case ConstructionKind::uniform_growth: return "uniform_growth";
  }
  return "unknown";
}

std::optional<ScalePolicy> parse_scale_policy(std::string_view name) {
  if (name == "formula") return ScalePolicy::formula;
  if (name == "optimized") return ScalePolicy::optimized;
  return std::nullopt;
}

std::string_view to_string(ScalePolicy policy) {
  return policy == ScalePolicy::formula ? "formula" : "optimized";
}

LayeredNetwork build(const ConstructionSpec& spec) {
  switch (spec.kind) {
    case ConstructionKind::figure1:
      return figure1_network();
    case ConstructionKind::w_neg:
      return build_w_neg(WNegSpec{spec.inputs, spec.width, spec.depth,
                                  spec.output_bias.value_or(0.0),
                                  spec.scale_policy.value_or(ScalePolicy::formula)});
    case ConstructionKind::w_neg_k2: {
      if (spec.inputs != 2) throw DomainError("w_neg_k2 requires K = 2");
      auto w = w_neg_k2_spec(spec.width, spec.depth,
                             spec.scale_policy.value_or(ScalePolicy::optimized));
      if (spec.output_bias) w.output_bias = *spec.output_bias;
      return build_w_neg(w);
    }
    case ConstructionKind::uniform_growth:
      return build_uniform_growth(spec.inputs, spec.width, spec.depth, spec.target);
  }
  throw DomainError("unknown construction kind");
}

}  // namespace dropnet
