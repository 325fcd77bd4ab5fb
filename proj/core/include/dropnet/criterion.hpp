#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "dropnet/network.hpp"

namespace dropnet {

/// Enumerate every dropout pattern.
struct ExactEnumeration {};

/// Estimate by i.i.d. sampling of (example, pattern) pairs.
struct MonteCarlo {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
};

struct DropoutConfig {
  /// Probability p that a droppable node is kept.
  double keep_probability = 0.5;
  std::variant<ExactEnumeration, MonteCarlo> mode = ExactEnumeration{};
  /// Largest droppable-node count accepted by exact enumeration.
  std::size_t enumeration_cap = 26;
  /// Worker threads; 0 uses every hardware thread. Results do not depend on it.
  std::size_t threads = 0;

  bool is_exact() const { return std::holds_alternative<ExactEnumeration>(mode); }

  static DropoutConfig exact(double keep_probability = 0.5);
  static DropoutConfig monte_carlo(std::uint64_t samples, std::uint64_t seed,
                                   double keep_probability = 0.5);

  /// Throws DomainError unless 0 < p < 1 and, for Monte Carlo, samples >= 1.
  void validate() const;
};

enum class EvaluationMode { exact, monte_carlo };

std::string_view to_string(EvaluationMode mode);

/// Risk, dropout criterion J_D and dropout penalty J_D - risk of one network.
struct CriterionReport {
  double risk = 0.0;
  double criterion = 0.0;
  double penalty = 0.0;
  EvaluationMode mode = EvaluationMode::exact;
  /// Standard error of `criterion`; present only for Monte Carlo.
  std::optional<double> std_error;
  /// Patterns enumerated (exact) or samples drawn (Monte Carlo).
  std::uint64_t evaluations = 0;
  /// Monte Carlo seed.
  std::optional<std::uint64_t> seed;
  double keep_probability = 0.5;
};

/// J_D by summing p^kept q^dropped weighted losses over all 2^N patterns.
/// Throws CapacityError when N = K + sum(hidden widths) exceeds the cap.
CriterionReport exact_criterion(const LayeredNetwork& net, const ExampleDistribution& dist,
                                const DropoutConfig& config);

/// Unbiased estimate of J_D; config must be in Monte Carlo mode with >= 2 samples.
CriterionReport monte_carlo_criterion(const LayeredNetwork& net, const ExampleDistribution& dist,
                                      const DropoutConfig& config);

/// Dispatches on config.mode.
CriterionReport dropout_criterion(const LayeredNetwork& net, const ExampleDistribution& dist,
                                  const DropoutConfig& config);

/// Same computation as exact_criterion; the penalty field is the headline.
CriterionReport exact_penalty(const LayeredNetwork& net, const ExampleDistribution& dist,
                              const DropoutConfig& config);

/// Average dropout output when exactly `kept_inputs` inputs are kept.
///
/// The input mask is uniform over the C(K, kept_inputs) masks of that weight
/// and hidden masks follow Bernoulli(p). The input is `x`, or all ones when
/// `x` is empty. Honors config.mode.
double psi(const LayeredNetwork& net, std::size_t kept_inputs, const DropoutConfig& config,
           std::span<const double> x = {});

/// Single-example penalty split into E(delta^2) + 2 (W(x) - y) E(delta),
/// with delta = D(W, x, R) - W(x).
struct PenaltyDecomposition {
  double e_delta_sq = 0.0;
  double e_delta = 0.0;
  double penalty = 0.0;
  double plain_output = 0.0;
};

PenaltyDecomposition penalty_decomposition(const LayeredNetwork& net, std::span<const double> x,
                                           double y, const DropoutConfig& config);

/// J_D(c) = alpha c^2 + beta c + gamma for output weights c * u, u the
/// network's current output weights.
struct OutputScaleFit {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double c_star = 0.0;
  double criterion_at_c_star = 0.0;
  EvaluationMode mode = EvaluationMode::exact;
};

/// Minimizes the quadratic in the common output-weight scale. Exact or Monte
/// Carlo per config.mode; throws Error if the fitted alpha is negative.
OutputScaleFit optimize_output_scale(const LayeredNetwork& net, const ExampleDistribution& dist,
                                     const DropoutConfig& config);

/// Copy of `net` with output weights multiplied by `c` (bias untouched).
LayeredNetwork scale_output_weights(const LayeredNetwork& net, double c);

}  // namespace dropnet
