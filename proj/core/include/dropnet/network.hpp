#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dropnet {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// One fully connected ReLU layer: weights are (width x fan-in).
struct DenseLayer {
  Matrix weights;
  std::vector<double> bias;

  std::size_t width() const { return weights.rows(); }
  std::size_t fan_in() const { return weights.cols(); }

  bool operator==(const DenseLayer&) const = default;
};

/// Raw parameters of a layered network; LayeredNetwork validates them.
struct NetworkParameters {
  std::size_t input_dim = 0;
  std::vector<DenseLayer> hidden;
  std::vector<double> output_weights;
  double output_bias = 0.0;

  bool operator==(const NetworkParameters&) const = default;
};

/// Fully connected feedforward network: ReLU hidden layers, one linear output.
///
/// Depth counts the output node but not the inputs, so a network with one
/// hidden layer has depth 2. Immutable once built; transformations copy
/// parameters() and construct a new network.
class LayeredNetwork {
 public:
  /// Throws ShapeError on inconsistent shapes, DomainError on non-finite entries.
  explicit LayeredNetwork(NetworkParameters params);

  std::size_t input_dim() const { return params_.input_dim; }
  std::size_t depth() const { return params_.hidden.size() + 1; }
  std::size_t hidden_layer_count() const { return params_.hidden.size(); }
  std::vector<std::size_t> hidden_widths() const;

  const DenseLayer& hidden_layer(std::size_t j) const { return params_.hidden.at(j); }
  std::span<const DenseLayer> hidden_layers() const { return params_.hidden; }
  std::span<const double> output_weights() const { return params_.output_weights; }
  double output_bias() const { return params_.output_bias; }

  /// Width of the layer feeding the output node (input_dim when there are no hidden layers).
  std::size_t last_width() const;

  /// Input nodes plus hidden nodes: every node dropout may remove.
  std::size_t droppable_count() const;

  /// Number of connection weights (biases excluded).
  std::size_t weight_count() const;

  const NetworkParameters& parameters() const { return params_; }

  bool operator==(const LayeredNetwork&) const = default;

 private:
  NetworkParameters params_;
};

/// Keep/drop indicators for every droppable node; true means kept.
/// The output node has no entry: it is never dropped.
struct DropoutPattern {
  std::vector<bool> input_mask;
  std::vector<std::vector<bool>> hidden_masks;

  static DropoutPattern all_kept(const LayeredNetwork& net);
  static DropoutPattern all_dropped(const LayeredNetwork& net);

  /// Flattened (inputs, layer 1, ..., last hidden layer) keep flags.
  std::vector<std::uint8_t> flatten() const;

  bool operator==(const DropoutPattern&) const = default;
};

struct Example {
  std::vector<double> x;
  double y = 0.0;
  double weight = 1.0;

  bool operator==(const Example&) const = default;
};

/// Finite weighted list of examples; weights are non-negative and sum to one.
class ExampleDistribution {
 public:
  /// Throws ShapeError for empty or ragged entries, DomainError for bad weights.
  explicit ExampleDistribution(std::vector<Example> entries);

  std::span<const Example> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t input_dim() const { return entries_.front().x.size(); }

  bool operator==(const ExampleDistribution&) const = default;

 private:
  std::vector<Example> entries_;
};

/// Plain (non-dropout) output W(x). Throws ShapeError on dimension mismatch.
double forward(const LayeredNetwork& net, std::span<const double> x);

/// Output D(W, x, R) of the network under dropout pattern `pattern`.
///
/// Kept input i contributes x_i / p; every hidden node computes
/// max(0, w.v + bias) and then outputs 0 if dropped or value / p if kept.
/// The output node is linear and is never dropped or rescaled.
double dropout_forward(const LayeredNetwork& net, std::span<const double> x,
                       const DropoutPattern& pattern, double keep_probability);

/// Expected square loss without dropout.
double risk(const LayeredNetwork& net, const ExampleDistribution& dist);

void check_input(const LayeredNetwork& net, std::span<const double> x);
void check_keep_probability(double p);

}  // namespace dropnet
