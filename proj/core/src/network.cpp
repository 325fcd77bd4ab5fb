#include "dropnet/network.hpp"

#include <cmath>
#include <string>

#include "dropnet/error.hpp"
#include "forward_kernel.hpp"

namespace dropnet {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError(std::string("non-finite entry in ") + what);
  }
}

std::string dims(std::size_t a, std::size_t b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                     std::to_string(rows_ * cols_));
  }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw ShapeError("ragged matrix rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), cols, std::move(data));
}

LayeredNetwork::LayeredNetwork(NetworkParameters params) : params_(std::move(params)) {
  if (params_.input_dim == 0) throw ShapeError("input_dim must be positive");
  std::size_t fan_in = params_.input_dim;
  for (std::size_t j = 0; j < params_.hidden.size(); ++j) {
    const auto& layer = params_.hidden[j];
    const std::string where = "hidden layer " + std::to_string(j + 1);
    if (layer.width() == 0) throw ShapeError(where + " has zero width");
    if (layer.fan_in() != fan_in) {
      throw ShapeError(where + " fan-in mismatch: " + dims(layer.fan_in(), fan_in));
    }
    if (layer.bias.size() != layer.width()) {
      throw ShapeError(where + " bias length mismatch: " + dims(layer.bias.size(), layer.width()));
    }
    require_finite(layer.weights.values(), "hidden weights");
    require_finite(layer.bias, "hidden biases");
    fan_in = layer.width();
  }
  if (params_.output_weights.size() != fan_in) {
    throw ShapeError("output weight length mismatch: " + dims(params_.output_weights.size(), fan_in));
  }
  require_finite(params_.output_weights, "output weights");
  if (!std::isfinite(params_.output_bias)) throw DomainError("non-finite output bias");
}

std::vector<std::size_t> LayeredNetwork::hidden_widths() const {
  std::vector<std::size_t> widths;
  widths.reserve(params_.hidden.size());
  for (const auto& layer : params_.hidden) widths.push_back(layer.width());
  return widths;
}

std::size_t LayeredNetwork::last_width() const {
  return params_.hidden.empty() ? params_.input_dim : params_.hidden.back().width();
}

std::size_t LayeredNetwork::droppable_count() const {
  std::size_t count = params_.input_dim;
  for (const auto& layer : params_.hidden) count += layer.width();
  return count;
}

std::size_t LayeredNetwork::weight_count() const {
  std::size_t count = params_.output_weights.size();
  for (const auto& layer : params_.hidden) count += layer.weights.values().size();
  return count;
}

DropoutPattern DropoutPattern::all_kept(const LayeredNetwork& net) {
  DropoutPattern pattern;
  pattern.input_mask.assign(net.input_dim(), true);
  for (std::size_t w : net.hidden_widths()) pattern.hidden_masks.emplace_back(w, true);
  return pattern;
}

DropoutPattern DropoutPattern::all_dropped(const LayeredNetwork& net) {
  DropoutPattern pattern;
  pattern.input_mask.assign(net.input_dim(), false);
  for (std::size_t w : net.hidden_widths()) pattern.hidden_masks.emplace_back(w, false);
  return pattern;
}

std::vector<std::uint8_t> DropoutPattern::flatten() const {
  std::vector<std::uint8_t> flags(input_mask.begin(), input_mask.end());
  for (const auto& mask : hidden_masks) flags.insert(flags.end(), mask.begin(), mask.end());
  return flags;
}

ExampleDistribution::ExampleDistribution(std::vector<Example> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw ShapeError("example distribution is empty");
  const std::size_t dim = entries_.front().x.size();
  double total = 0.0;
  for (const auto& e : entries_) {
    if (e.x.size() != dim) throw ShapeError("examples have differing input dimensions");
    require_finite(e.x, "example input");
    if (!std::isfinite(e.y)) throw DomainError("non-finite example label");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw DomainError("example weights must be finite and non-negative");
    }
    total += e.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("example weights sum to " + std::to_string(total) + ", expected 1");
  }
}

void check_input(const LayeredNetwork& net, std::span<const double> x) {
  if (x.size() != net.input_dim()) {
    throw ShapeError("input length mismatch: " + dims(x.size(), net.input_dim()));
  }
}

void check_keep_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("keep probability must lie in (0, 1), got " + std::to_string(p));
  }
}

double forward(const LayeredNetwork& net, std::span<const double> x) {
  check_input(net, x);
  detail::ForwardWorkspace ws(net);
  return detail::plain_output(net, x, ws);
}

double dropout_forward(const LayeredNetwork& net, std::span<const double> x,
                       const DropoutPattern& pattern, double keep_probability) {
  check_input(net, x);
  check_keep_probability(keep_probability);
  if (pattern.input_mask.size() != net.input_dim() ||
      pattern.hidden_masks.size() != net.hidden_layer_count()) {
    throw ShapeError("dropout pattern does not match network layout");
  }
  for (std::size_t j = 0; j < net.hidden_layer_count(); ++j) {
    if (pattern.hidden_masks[j].size() != net.hidden_layer(j).width()) {
      throw ShapeError("dropout mask for hidden layer " + std::to_string(j + 1) +
                       " has the wrong length");
    }
  }
  detail::ForwardWorkspace ws(net);
  const auto flags = pattern.flatten();
  return detail::dropout_output(net, x, flags, keep_probability, ws);
}

double risk(const LayeredNetwork& net, const ExampleDistribution& dist) {
  detail::ForwardWorkspace ws(net);
  double total = 0.0;
  for (const auto& e : dist.entries()) {
    check_input(net, e.x);
    const double r = detail::plain_output(net, e.x, ws) - e.y;
    total += e.weight * r * r;
  }
  return total;
}

}  // namespace dropnet
