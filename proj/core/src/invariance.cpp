#include "dropnet/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dropnet/error.hpp"
#include "dropnet/random_networks.hpp"
#include "dropnet/rng.hpp"

namespace dropnet {

namespace {

constexpr double kSlackTolerance = 1e-9;

void check_positive(double c, const char* what) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& e : v) e = rng.uniform(lo, hi);
  return v;
}

std::vector<double> add(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

// Accumulates comparisons for a PropertyCheck.
class Tally {
 public:
  explicit Tally(std::string name) { check_.name = std::move(name); }

  void compare(double expected, double actual) {
    ++check_.comparisons;
    const double abs_err = std::abs(expected - actual);
    const double scale = std::max(std::abs(expected), std::abs(actual));
    const double rel_err = scale > 0.0 ? abs_err / scale : 0.0;
    check_.max_abs_error = std::max(check_.max_abs_error, abs_err);
    check_.max_rel_error = std::max(check_.max_rel_error, rel_err);
    if (!nearly_equal(expected, actual)) ++check_.failures;
  }

  void slack(double s) {
    ++check_.comparisons;
    check_.worst_slack = std::min(check_.worst_slack, s);
    if (s < -kSlackTolerance) ++check_.failures;
  }

  // Folds in a batch of slack probes summarized elsewhere.
  void absorb(std::size_t probes, std::size_t violations, double worst) {
    check_.comparisons += probes;
    check_.failures += violations;
    check_.worst_slack = std::min(check_.worst_slack, worst);
  }

  void next_case() { ++check_.cases; }

  PropertyCheck finish() {
    check_.passed = check_.failures == 0;
    return check_;
  }

 private:
  PropertyCheck check_;
};

void for_each_pattern(const LayeredNetwork& net, auto&& visit) {
  const std::uint64_t total = std::uint64_t{1} << net.droppable_count();
  for (std::uint64_t bits = 0; bits < total; ++bits) visit(pattern_from_bits(net, bits));
}

PropertyCheck check_input_scaling(const InvarianceSuiteOptions& opt) {
  Tally tally("input-scale-freeness");
  const double p = opt.keep_probability;
  for (std::size_t c = 0; c < opt.cases; ++c) {
    Rng rng(opt.seed, 1000 + c);
    const auto net = random_small_network(rng);
    std::vector<double> diag(net.input_dim());
    for (double& a : diag) a = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.25, 4.0);
    const auto scaled = compensate_input_scaling(net, diag);
    const auto dist = random_distribution(net.input_dim(), 3, rng);
    for (const auto& e : dist.entries()) {
      std::vector<double> ax(e.x);
      for (std::size_t i = 0; i < ax.size(); ++i) ax[i] *= diag[i];
      for_each_pattern(net, [&](const DropoutPattern& r) {
        tally.compare(dropout_forward(net, e.x, r, p), dropout_forward(scaled, ax, r, p));
      });
    }
    auto config = DropoutConfig::exact(p);
    config.threads = opt.threads;
    tally.compare(exact_criterion(net, dist, config).criterion,
                  exact_criterion(scaled, scale_inputs(dist, diag), config).criterion);
    tally.next_case();
  }
  return tally.finish();
}

PropertyCheck check_layer_rescaling(const InvarianceSuiteOptions& opt) {
  Tally tally("layer-rescaling");
  const double p = opt.keep_probability;
  for (std::size_t c = 0; c < opt.cases; ++c) {
    Rng rng(opt.seed, 2000 + c);
    const auto net = random_small_network(rng);
    const std::size_t d = net.depth();

    // General factors: pattern-wise ratio equals the product.
    LayerScaling general{random_vector(rng, d, 0.25, 4.0)};
    double product = 1.0;
    for (double f : general.factors) product *= f;
    const auto scaled = rescale_layers(net, general);
    const auto x = random_vector(rng, net.input_dim(), -1.0, 1.0);
    for_each_pattern(net, [&](const DropoutPattern& r) {
      tally.compare(product * dropout_forward(net, x, r, p), dropout_forward(scaled, x, r, p));
    });

    // Unit product: risk, criterion and penalty unchanged.
    LayerScaling balanced{random_vector(rng, d, 0.25, 4.0)};
    double partial = 1.0;
    for (std::size_t j = 0; j + 1 < d; ++j) partial *= balanced.factors[j];
    balanced.factors.back() = 1.0 / partial;
    const auto dist = random_distribution(net.input_dim(), 3, rng);
    auto config = DropoutConfig::exact(p);
    config.threads = opt.threads;
    const auto before = exact_criterion(net, dist, config);
    const auto after = exact_criterion(rescale_layers(net, balanced), dist, config);
    tally.compare(before.criterion, after.criterion);
    tally.compare(before.risk, after.risk);
    tally.compare(before.penalty, after.penalty);
    tally.next_case();
  }
  return tally.finish();
}

PropertyCheck check_output_scaling(const InvarianceSuiteOptions& opt) {
  Tally tally("output-scaling");
  const double p = opt.keep_probability;
  for (std::size_t c = 0; c < opt.cases; ++c) {
    Rng rng(opt.seed, 3000 + c);
    const auto net = random_small_network(rng);
    const double factor = rng.uniform(0.1, 10.0);
    const auto scaled = rescale_output_layer(net, factor);
    const auto x = random_vector(rng, net.input_dim(), -1.0, 1.0);
    const double y = rng.uniform(-2.0, 2.0);
    for_each_pattern(net, [&](const DropoutPattern& r) {
      const double a = dropout_forward(net, x, r, p) - y;
      const double b = dropout_forward(scaled, x, r, p) - factor * y;
      tally.compare(a * a, b * b / (factor * factor));
    });
    tally.next_case();
  }
  return tally.finish();
}

PropertyCheck check_nonnegative_penalty(const InvarianceSuiteOptions& opt) {
  Tally tally("nonnegative-penalty");
  RandomNetworkOptions nonneg;
  nonneg.nonnegative_weights = true;
  nonneg.nonnegative_biases = true;
  auto config = DropoutConfig::exact(opt.keep_probability);
  config.threads = opt.threads;
  for (std::size_t c = 0; c < opt.property_cases; ++c) {
    Rng rng(opt.seed, 4000 + c);
    const auto net = random_small_network(rng, nonneg);
    const auto dist = random_distribution(net.input_dim(), 2, rng, 1.0, true);
    // Threshold -1e-12 rather than the looser slack tolerance.
    const double penalty = exact_criterion(net, dist, config).penalty;
    tally.absorb(1, penalty < -1e-12 ? 1 : 0, std::min(0.0, penalty));
    tally.next_case();
  }
  return tally.finish();
}

PropertyCheck check_supermodularity(const InvarianceSuiteOptions& opt) {
  Tally tally("supermodularity");
  RandomNetworkOptions nonneg;
  nonneg.nonnegative_weights = true;
  const std::size_t nets = std::max<std::size_t>(1, opt.property_cases / 100);
  const std::size_t per_net = opt.property_cases / nets;
  for (std::size_t c = 0; c < nets; ++c) {
    Rng rng(opt.seed, 5000 + c);
    const auto net = random_small_network(rng, nonneg, 4, 3, 4);
    const auto report = check_supermodular(net, per_net, opt.seed + c);
    tally.absorb(report.trials, report.violations, report.worst_slack);
    tally.next_case();
  }
  return tally.finish();
}

PropertyCheck check_psi_convexity(const InvarianceSuiteOptions& opt) {
  Tally tally("psi-convexity");
  RandomNetworkOptions nonneg;
  nonneg.nonnegative_weights = true;
  DropoutConfig config = DropoutConfig::exact(opt.keep_probability);
  config.threads = opt.threads;
  std::size_t probes = 0;
  for (std::size_t c = 0; probes < opt.property_cases; ++c) {
    Rng rng(opt.seed, 6000 + c);
    const std::size_t k = 3 + rng.below(3);
    std::vector<std::size_t> widths(1 + rng.below(2));
    for (auto& w : widths) w = 1 + rng.below(3);
    const auto net = random_network(k, widths, rng, nonneg);
    std::vector<double> values(k + 1);
    for (std::size_t l = 0; l <= k; ++l) values[l] = psi(net, l, config);
    for (std::size_t l = 1; l < k; ++l) {
      tally.slack(values[l + 1] - 2.0 * values[l] + values[l - 1]);
      ++probes;
    }
    tally.next_case();
  }
  return tally.finish();
}

PropertyCheck check_monotonicity(const InvarianceSuiteOptions& opt) {
  Tally tally("monotonicity");
  RandomNetworkOptions nonneg;
  nonneg.nonnegative_weights = true;
  const std::size_t nets = std::max<std::size_t>(1, opt.property_cases / 100);
  const std::size_t per_net = opt.property_cases / nets;
  for (std::size_t c = 0; c < nets; ++c) {
    Rng rng(opt.seed, 7000 + c);
    const auto net = random_small_network(rng, nonneg, 4, 3, 4);
    const auto report = check_monotone(net, per_net, opt.seed + c);
    tally.absorb(report.trials, report.violations, report.worst_drop);
    tally.next_case();
  }
  return tally.finish();
}

}  // namespace

bool nearly_equal(double a, double b, double abs_tol, double rel_tol) {
  const double diff = std::abs(a - b);
  return diff <= abs_tol || diff <= rel_tol * std::max(std::abs(a), std::abs(b));
}

LayeredNetwork compensate_input_scaling(const LayeredNetwork& net,
                                        std::span<const double> scales) {
  if (scales.size() != net.input_dim()) {
    throw ShapeError("input scaling needs one factor per input (" +
                     std::to_string(net.input_dim()) + ")");
  }
  for (double a : scales) {
    if (a == 0.0 || !std::isfinite(a)) throw DomainError("input scale factors must be non-zero");
  }
  auto params = net.parameters();
  if (params.hidden.empty()) {
    for (std::size_t i = 0; i < scales.size(); ++i) params.output_weights[i] /= scales[i];
  } else {
    Matrix& w = params.hidden.front().weights;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t i = 0; i < w.cols(); ++i) w(r, i) /= scales[i];
    }
  }
  return LayeredNetwork(std::move(params));
}

ExampleDistribution scale_inputs(const ExampleDistribution& dist,
                                 std::span<const double> scales) {
  if (scales.size() != dist.input_dim()) throw ShapeError("input scaling dimension mismatch");
  std::vector<Example> out(dist.entries().begin(), dist.entries().end());
  for (auto& e : out) {
    for (std::size_t i = 0; i < scales.size(); ++i) e.x[i] *= scales[i];
  }
  return ExampleDistribution(std::move(out));
}

LayeredNetwork rescale_layers(const LayeredNetwork& net, const LayerScaling& scaling) {
  if (scaling.factors.size() != net.depth()) {
    throw ShapeError("layer scaling needs " + std::to_string(net.depth()) + " factors, got " +
                     std::to_string(scaling.factors.size()));
  }
  for (double c : scaling.factors) check_positive(c, "layer scale factor");
  auto params = net.parameters();
  double cumulative = 1.0;
  for (std::size_t j = 0; j < params.hidden.size(); ++j) {
    const double c = scaling.factors[j];
    cumulative *= c;
    for (double& w : params.hidden[j].weights.values()) w *= c;
    for (double& b : params.hidden[j].bias) b *= cumulative;
  }
  const double c_out = scaling.factors.back();
  cumulative *= c_out;
  for (double& w : params.output_weights) w *= c_out;
  params.output_bias *= cumulative;
  return LayeredNetwork(std::move(params));
}

LayeredNetwork rescale_output_layer(const LayeredNetwork& net, double c) {
  check_positive(c, "output scale");
  auto params = net.parameters();
  for (double& w : params.output_weights) w *= c;
  params.output_bias *= c;
  return LayeredNetwork(std::move(params));
}

std::size_t count_negative_weights(const LayeredNetwork& net) {
  std::size_t count = 0;
  for (const auto& layer : net.hidden_layers()) {
    count += static_cast<std::size_t>(std::ranges::count_if(layer.weights.values(),
                                                            [](double w) { return w < 0.0; }));
  }
  count += static_cast<std::size_t>(
      std::ranges::count_if(net.output_weights(), [](double w) { return w < 0.0; }));
  return count;
}

std::size_t count_negative_biases(const LayeredNetwork& net) {
  std::size_t count = 0;
  for (const auto& layer : net.hidden_layers()) {
    count += static_cast<std::size_t>(
        std::ranges::count_if(layer.bias, [](double b) { return b < 0.0; }));
  }
  if (net.output_bias() < 0.0) ++count;
  return count;
}

bool is_nonnegative(const LayeredNetwork& net) { return count_negative_weights(net) == 0; }

SupermodularReport check_supermodular(const LayeredNetwork& net, std::size_t trials,
                                      std::uint64_t seed) {
  if (!is_nonnegative(net)) {
    throw DomainError("supermodularity is only guaranteed for non-negative connection weights; "
                      "the network has " + std::to_string(count_negative_weights(net)) +
                      " negative weights");
  }
  SupermodularReport report;
  report.trials = trials;
  const std::size_t k = net.input_dim();
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    const auto x = random_vector(rng, k, -1.0, 1.0);
    const auto d1 = random_vector(rng, k, 0.0, 1.0);
    const auto d2 = random_vector(rng, k, 0.0, 1.0);
    const auto x1 = add(x, d1);
    const auto x2 = add(x, d2);
    const auto x12 = add(x1, d2);
    const double slack = forward(net, x) + forward(net, x12) - forward(net, x1) - forward(net, x2);
    report.worst_slack = std::min(report.worst_slack, slack);
    if (slack < -kSlackTolerance) ++report.violations;
  }
  return report;
}

MonotoneReport check_monotone(const LayeredNetwork& net, std::size_t trials, std::uint64_t seed) {
  MonotoneReport report;
  report.trials = trials;
  const std::size_t k = net.input_dim();
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    const auto x = random_vector(rng, k, -1.0, 1.0);
    const auto delta = random_vector(rng, k, 0.0, 1.0);
    const double rise = forward(net, add(x, delta)) - forward(net, x);
    report.worst_drop = std::min(report.worst_drop, rise);
    if (rise < -kSlackTolerance) ++report.violations;
  }
  return report;
}

DropoutPattern pattern_from_bits(const LayeredNetwork& net, std::uint64_t bits) {
  DropoutPattern r;
  std::size_t bit = 0;
  r.input_mask.resize(net.input_dim());
  for (std::size_t i = 0; i < net.input_dim(); ++i) r.input_mask[i] = (bits >> bit++) & 1U;
  for (std::size_t width : net.hidden_widths()) {
    std::vector<bool> mask(width);
    for (std::size_t i = 0; i < width; ++i) mask[i] = (bits >> bit++) & 1U;
    r.hidden_masks.push_back(std::move(mask));
  }
  return r;
}

std::vector<FamilyPoint> equal_criterion_family(const LayeredNetwork& net,
                                                const ExampleDistribution& dist,
                                                std::span<const double> ts,
                                                const DropoutConfig& config, std::size_t layer_a,
                                                std::size_t layer_b) {
  const std::size_t d = net.depth();
  if (layer_a >= d || layer_b >= d || layer_a == layer_b) {
    throw DomainError("family layers must be two distinct indices below depth " +
                      std::to_string(d));
  }
  std::vector<FamilyPoint> out;
  out.reserve(ts.size());
  for (double t : ts) {
    check_positive(t, "family parameter t");
    LayerScaling scaling{std::vector<double>(d, 1.0)};
    scaling.factors[layer_a] = t;
    scaling.factors[layer_b] = 1.0 / t;
    out.push_back({t, dropout_criterion(rescale_layers(net, scaling), dist, config).criterion});
  }
  return out;
}

std::vector<PropertyCheck> run_invariance_suite(const InvarianceSuiteOptions& options) {
  check_keep_probability(options.keep_probability);
  return {check_input_scaling(options),    check_layer_rescaling(options),
          check_output_scaling(options),   check_nonnegative_penalty(options),
          check_supermodularity(options),  check_psi_convexity(options),
          check_monotonicity(options)};
}

}  // namespace dropnet
