#include "dropnet/criterion.hpp"

#include <cmath>
#include <string>

#include "dropnet/error.hpp"
#include "forward_kernel.hpp"
#include "pattern_enumerator.hpp"

namespace dropnet {

namespace {

void check_distribution(const LayeredNetwork& net, const ExampleDistribution& dist) {
  if (dist.input_dim() != net.input_dim()) {
    throw ShapeError("distribution inputs have length " + std::to_string(dist.input_dim()) +
                     " but the network expects " + std::to_string(net.input_dim()));
  }
}

detail::EnumerationRequest enumeration(const DropoutConfig& config, double shift) {
  detail::EnumerationRequest request;
  request.keep_probability = config.keep_probability;
  request.shift = shift;
  request.cap = config.enumeration_cap;
  request.threads = config.threads;
  return request;
}

detail::SamplingRequest sampling(const DropoutConfig& config, std::size_t statistics) {
  const auto& mc = std::get<MonteCarlo>(config.mode);
  detail::SamplingRequest request;
  request.keep_probability = config.keep_probability;
  request.samples = mc.samples;
  request.seed = mc.seed;
  request.threads = config.threads;
  request.statistic_count = statistics;
  return request;
}

}  // namespace

DropoutConfig DropoutConfig::exact(double keep_probability) {
  DropoutConfig config;
  config.keep_probability = keep_probability;
  return config;
}

DropoutConfig DropoutConfig::monte_carlo(std::uint64_t samples, std::uint64_t seed,
                                         double keep_probability) {
  DropoutConfig config;
  config.keep_probability = keep_probability;
  config.mode = MonteCarlo{samples, seed};
  return config;
}

void DropoutConfig::validate() const {
  check_keep_probability(keep_probability);
  if (const auto* mc = std::get_if<MonteCarlo>(&mode); mc && mc->samples < 1) {
    throw DomainError("Monte Carlo sample count must be at least 1");
  }
}

std::string_view to_string(EvaluationMode mode) {
  return mode == EvaluationMode::exact ? "exact" : "monte-carlo";
}

CriterionReport exact_criterion(const LayeredNetwork& net, const ExampleDistribution& dist,
                                const DropoutConfig& config) {
  config.validate();
  check_distribution(net, dist);
  detail::check_enumeration_cap(net, config.enumeration_cap);

  double criterion = 0.0;
  for (const auto& e : dist.entries()) {
    // Shifting by y makes the second moment the expected loss directly.
    const auto m = detail::exact_output_moments(net, e.x, enumeration(config, e.y));
    criterion += e.weight * m.second;
  }
  CriterionReport report;
  report.risk = risk(net, dist);
  report.criterion = criterion;
  report.penalty = criterion - report.risk;
  report.mode = EvaluationMode::exact;
  report.evaluations = detail::enumerated_pattern_count(net, std::nullopt);
  report.keep_probability = config.keep_probability;
  return report;
}

CriterionReport monte_carlo_criterion(const LayeredNetwork& net, const ExampleDistribution& dist,
                                      const DropoutConfig& config) {
  config.validate();
  check_distribution(net, dist);
  const auto* mc = std::get_if<MonteCarlo>(&config.mode);
  if (mc == nullptr) throw DomainError("monte_carlo_criterion requires Monte Carlo mode");
  if (mc->samples < 2) throw DomainError("Monte Carlo needs at least 2 samples");

  const auto stats = detail::sample_outputs(
      net, &dist, nullptr, sampling(config, 1),
      [](const Example& e, double output, std::span<double> out) {
        const double r = output - e.y;
        out[0] = r * r;
      });
  CriterionReport report;
  report.risk = risk(net, dist);
  report.criterion = stats[0].mean;
  report.penalty = report.criterion - report.risk;
  report.mode = EvaluationMode::monte_carlo;
  report.std_error = std::sqrt(stats[0].variance() / static_cast<double>(stats[0].count));
  report.evaluations = stats[0].count;
  report.seed = mc->seed;
  report.keep_probability = config.keep_probability;
  return report;
}

CriterionReport dropout_criterion(const LayeredNetwork& net, const ExampleDistribution& dist,
                                  const DropoutConfig& config) {
  return config.is_exact() ? exact_criterion(net, dist, config)
                           : monte_carlo_criterion(net, dist, config);
}

CriterionReport exact_penalty(const LayeredNetwork& net, const ExampleDistribution& dist,
                              const DropoutConfig& config) {
  return exact_criterion(net, dist, config);
}

double psi(const LayeredNetwork& net, std::size_t kept_inputs, const DropoutConfig& config,
           std::span<const double> x) {
  config.validate();
  if (kept_inputs > net.input_dim()) {
    throw DomainError("psi: kept input count " + std::to_string(kept_inputs) +
                      " exceeds input dimension " + std::to_string(net.input_dim()));
  }
  Example at;
  at.x = x.empty() ? std::vector<double>(net.input_dim(), 1.0)
                   : std::vector<double>(x.begin(), x.end());
  check_input(net, at.x);

  if (config.is_exact()) {
    auto request = enumeration(config, 0.0);
    request.kept_inputs = kept_inputs;
    const auto m = detail::exact_output_moments(net, at.x, request);
    return m.first;
  }
  auto request = sampling(config, 1);
  request.kept_inputs = kept_inputs;
  const auto stats = detail::sample_outputs(
      net, nullptr, &at, request,
      [](const Example&, double output, std::span<double> out) { out[0] = output; });
  return stats[0].mean;
}

PenaltyDecomposition penalty_decomposition(const LayeredNetwork& net, std::span<const double> x,
                                           double y, const DropoutConfig& config) {
  config.validate();
  check_input(net, x);
  PenaltyDecomposition result;
  result.plain_output = forward(net, x);
  const auto m = detail::exact_output_moments(net, x, enumeration(config, result.plain_output));
  result.e_delta = m.first;
  result.e_delta_sq = m.second;
  result.penalty = result.e_delta_sq + 2.0 * (result.plain_output - y) * result.e_delta;
  return result;
}

OutputScaleFit optimize_output_scale(const LayeredNetwork& net, const ExampleDistribution& dist,
                                     const DropoutConfig& config) {
  config.validate();
  check_distribution(net, dist);
  const double b = net.output_bias();

  OutputScaleFit fit;
  if (config.is_exact()) {
    detail::check_enumeration_cap(net, config.enumeration_cap);
    for (const auto& e : dist.entries()) {
      // Moments of S = D - b, the output activation before the bias.
      const auto m = detail::exact_output_moments(net, e.x, enumeration(config, b));
      fit.alpha += e.weight * m.second;
      fit.beta += 2.0 * e.weight * (b - e.y) * m.first;
      fit.gamma += e.weight * (b - e.y) * (b - e.y);
    }
    fit.mode = EvaluationMode::exact;
  } else {
    const auto stats = detail::sample_outputs(
        net, &dist, nullptr, sampling(config, 3),
        [b](const Example& e, double output, std::span<double> out) {
          const double s = output - b;
          out[0] = s * s;
          out[1] = 2.0 * (b - e.y) * s;
          out[2] = (b - e.y) * (b - e.y);
        });
    fit.alpha = stats[0].mean;
    fit.beta = stats[1].mean;
    fit.gamma = stats[2].mean;
    fit.mode = EvaluationMode::monte_carlo;
  }

  if (fit.alpha < -1e-12) {
    throw Error("internal error: negative second moment " + std::to_string(fit.alpha) +
                " in output-scale fit");
  }
  fit.c_star = fit.alpha > 0.0 ? -fit.beta / (2.0 * fit.alpha) : 0.0;
  fit.criterion_at_c_star = fit.alpha * fit.c_star * fit.c_star + fit.beta * fit.c_star + fit.gamma;
  return fit;
}

LayeredNetwork scale_output_weights(const LayeredNetwork& net, double c) {
  auto params = net.parameters();
  for (double& w : params.output_weights) w *= c;
  return LayeredNetwork(std::move(params));
}

}  // namespace dropnet
