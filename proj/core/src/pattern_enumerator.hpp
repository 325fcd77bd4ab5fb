#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dropnet/network.hpp"

namespace dropnet::detail {

/// Probability-weighted sums over patterns of (D - shift)^k for k = 0, 1, 2.
struct ShiftedMoments {
  double mass = 0.0;
  double first = 0.0;
  double second = 0.0;
};

struct EnumerationRequest {
  double keep_probability = 0.5;
  double shift = 0.0;
  /// When set, only input masks with this many kept inputs, each with weight 1 / C(K, l).
  std::optional<std::size_t> kept_inputs;
  std::size_t cap = 26;
  std::size_t threads = 0;
};

void check_enumeration_cap(const LayeredNetwork& net, std::size_t cap);

/// Exact moments of D(W, x, R) - shift over the pattern distribution.
///
/// Patterns are visited as a binary counter whose most significant bits are
/// the inputs and whose least significant bits are the last hidden layer, so
/// consecutive patterns usually differ only in deep layers and the shallower
/// activations are reused. The index range is split into fixed-size chunks
/// whose partial sums are combined pairwise in chunk order; the result does
/// not depend on the number of threads.
ShiftedMoments exact_output_moments(const LayeredNetwork& net, std::span<const double> x,
                                    const EnumerationRequest& request);

/// Number of patterns exact_output_moments visits.
std::uint64_t enumerated_pattern_count(const LayeredNetwork& net,
                                       std::optional<std::size_t> kept_inputs);

double binomial_coefficient(std::size_t n, std::size_t k);

/// Welford accumulator.
struct RunningStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double value);
  void merge(const RunningStats& other);
  /// Unbiased sample variance; 0 when count < 2.
  double variance() const;
};

struct SamplingRequest {
  double keep_probability = 0.5;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> kept_inputs;
  std::size_t threads = 0;
  std::size_t statistic_count = 1;
};

/// Called per sample with the drawn example and D(W, x, R); writes
/// `statistic_count` values into the output span.
using SampleStatistic =
    std::function<void(const Example& example, double output, std::span<double> stats)>;

/// Draws `samples` i.i.d. (example, pattern) pairs. Sample i uses Rng(seed, i),
/// so results are reproducible and independent of thread count. When `fixed`
/// is non-null every sample uses that example instead of drawing from `dist`.
std::vector<RunningStats> sample_outputs(const LayeredNetwork& net,
                                         const ExampleDistribution* dist, const Example* fixed,
                                         const SamplingRequest& request,
                                         const SampleStatistic& statistic);

}  // namespace dropnet::detail
