#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dropnet/network.hpp"
#include "dropnet/training.hpp"

namespace dropnet {

/// Dropout versus unregularized training from a shared initialization,
/// comparing how many negative weights each run ends with.
struct NegWeightsOptions {
  std::size_t reps = 100;
  std::uint64_t first_seed = 0;
  std::size_t inputs = 5;
  std::size_t width = 50;
  std::size_t depth = 3;
  std::uint64_t max_iters = 10000;
  LearningRateSchedule lr{0.1, 0.1};
  double keep_probability = 0.5;
  std::size_t threads = 0;
};

/// Comparison of neg(dropout-trained) against neg(plain-trained). A rep whose
/// training trips the divergence guard is recorded as diverged and left out
/// of the gt/lt/eq tallies.
enum class Outcome { gt, lt, eq, diverged };

std::string_view to_string(Outcome o);

struct NegWeightsRow {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::size_t neg_dropout = 0;
  std::size_t neg_plain = 0;
  Outcome outcome = Outcome::eq;
};

struct NegWeightsResult {
  std::vector<NegWeightsRow> rows;
  std::size_t gt = 0;
  std::size_t lt = 0;
  std::size_t eq = 0;
  std::size_t diverged = 0;
};

/// The two-example dataset {(0..0, 0), (1..1, 1)} with equal weights.
ExampleDistribution negweights_dataset(std::size_t inputs);

/// Rep r uses seed first_seed + r for both initialization and training.
NegWeightsResult experiment_negweights(const NegWeightsOptions& options);

/// Training loss as a function of input scale for dropout, weight decay and
/// no regularization.
struct ScaleOptions {
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  std::size_t inputs = 5;
  std::size_t width = 5;
  std::size_t depth = 2;
  std::size_t examples = 10;
  std::vector<double> scales{0.5, 0.75, 1.0, 1.25, 1.5};
  std::uint64_t max_iters = 100000;
  LearningRateSchedule lr{0.01, 1e-5};
  double momentum = 0.5;
  double lambda = 0.5;
  double keep_probability = 0.5;
  std::size_t threads = 0;
};

struct ScaleRow {
  std::size_t run = 0;
  double scale = 0.0;
  double loss_dropout = 0.0;
  double loss_wd = 0.0;
  double loss_none = 0.0;
};

struct ScaleResult {
  /// One row per (run, scale), runs outermost.
  std::vector<ScaleRow> rows;
  /// One row per scale holding means across runs; `run` is the run count.
  std::vector<ScaleRow> mean_by_scale;
};

/// Inputs uniform on [-1,1]^K, label prod_i sign(x_i), uniform weights.
ExampleDistribution parity_dataset(std::size_t inputs, std::size_t examples, std::uint64_t seed);

/// Every run draws one dataset and one initialization, then trains three
/// clones per scale. Losses are the plain training risk of the final network.
ScaleResult experiment_scale(const ScaleOptions& options);

/// Largest minus smallest entry.
double spread(const std::vector<double>& values);

}  // namespace dropnet
