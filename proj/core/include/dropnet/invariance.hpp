#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dropnet/criterion.hpp"
#include "dropnet/network.hpp"

namespace dropnet {

/// W' = (W_1 A^-1, b_1, ..., w, b) for diagonal A = diag(scales).
/// D(W, x, R) = D(W', A x, R) for every x and pattern R.
/// Throws DomainError on a zero entry, ShapeError on a length mismatch.
LayeredNetwork compensate_input_scaling(const LayeredNetwork& net, std::span<const double> scales);

/// A o P: every input multiplied coordinate-wise by `scales`.
ExampleDistribution scale_inputs(const ExampleDistribution& dist, std::span<const double> scales);

/// Positive factors c_1..c_d, one per hidden layer plus one for the output.
struct LayerScaling {
  std::vector<double> factors;
};

/// Layer j weights times c_j, layer j biases times c_1 ... c_j. Pattern-wise
/// outputs are multiplied by the product of all factors.
LayeredNetwork rescale_layers(const LayeredNetwork& net, const LayerScaling& scaling);

/// Output weights and output bias times c > 0.
LayeredNetwork rescale_output_layer(const LayeredNetwork& net, double c);

struct SupermodularReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  /// Most negative phi(x) + phi(x + d1 + d2) - phi(x + d1) - phi(x + d2) seen.
  double worst_slack = 0.0;
};

/// Samples x in [-1,1]^K and d1, d2 in [0,1]^K; counts slacks below -1e-9.
/// Throws DomainError if any connection weight is negative.
SupermodularReport check_supermodular(const LayeredNetwork& net, std::size_t trials,
                                      std::uint64_t seed);

struct MonotoneReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst_drop = 0.0;
};

/// Probes forward(x + delta) >= forward(x) for delta >= 0.
MonotoneReport check_monotone(const LayeredNetwork& net, std::size_t trials, std::uint64_t seed);

/// Connection weights strictly below zero; biases are not counted.
std::size_t count_negative_weights(const LayeredNetwork& net);
std::size_t count_negative_biases(const LayeredNetwork& net);
/// True when no connection weight is negative.
bool is_nonnegative(const LayeredNetwork& net);

/// Absolute-or-relative closeness used by every pattern-wise identity:
/// |a - b| <= abs_tol or |a - b| <= rel_tol * max(|a|, |b|).
bool nearly_equal(double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-10);

/// Pattern from the low droppable_count() bits of `bits`; bit 0 is the first input.
DropoutPattern pattern_from_bits(const LayeredNetwork& net, std::uint64_t bits);

struct FamilyPoint {
  double t = 0.0;
  double criterion = 0.0;
};

/// J_D along {rescale_layers(net, c)} with c_a = t, c_b = 1/t, all others 1.
std::vector<FamilyPoint> equal_criterion_family(const LayeredNetwork& net,
                                                const ExampleDistribution& dist,
                                                std::span<const double> ts,
                                                const DropoutConfig& config,
                                                std::size_t layer_a = 0,
                                                std::size_t layer_b = 1);

struct PropertyCheck {
  std::string name;
  std::size_t cases = 0;
  std::size_t comparisons = 0;
  std::size_t failures = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  /// Smallest slack (penalty, supermodular or convexity margin) where relevant.
  double worst_slack = 0.0;
  bool passed = false;
};

struct InvarianceSuiteOptions {
  std::size_t cases = 100;
  std::size_t property_cases = 1000;
  std::uint64_t seed = 0;
  double keep_probability = 0.5;
  std::size_t threads = 1;
};

/// Random-network checks of input-scale freeness, layer rescaling, output
/// scaling, non-negative penalty, supermodularity, psi convexity and
/// monotonicity. One entry per property.
std::vector<PropertyCheck> run_invariance_suite(const InvarianceSuiteOptions& options);

}  // namespace dropnet
