#include "dropnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "dropnet/error.hpp"
#include "dropnet/invariance.hpp"
#include "dropnet/rng.hpp"
#include "parallel.hpp"

namespace dropnet {

namespace {

// Independent seeds for the per-run dataset, initialization and SGD streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t run, std::uint64_t purpose) {
  return Rng(base, run * 4 + purpose).next_u64();
}

}  // namespace

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::gt: return "gt";
    case Outcome::lt: return "lt";
    case Outcome::eq: return "eq";
    case Outcome::diverged: return "diverged";
  }
  return "eq";
}

ExampleDistribution negweights_dataset(std::size_t inputs) {
  return ExampleDistribution({Example{std::vector<double>(inputs, 0.0), 0.0, 0.5},
                              Example{std::vector<double>(inputs, 1.0), 1.0, 0.5}});
}

NegWeightsResult experiment_negweights(const NegWeightsOptions& options) {
  if (options.reps < 1) throw DomainError("reps must be at least 1");
  const auto data = negweights_dataset(options.inputs);
  NegWeightsResult result;
  result.rows.resize(options.reps);

  detail::parallel_for(options.reps, options.threads, [&](std::size_t rep) {
    const std::uint64_t seed = options.first_seed + rep;
    const auto initial = init_network(options.inputs, options.width, options.depth, seed);
    TrainConfig config;
    config.max_iters = options.max_iters;
    config.lr = options.lr;
    config.seed = seed;
    NegWeightsRow& row = result.rows[rep];
    row.rep = rep;
    row.seed = seed;
    config.regularizer = NoRegularizer{};
    const auto plain = sgd_train(initial, data, config);
    row.neg_plain = count_negative_weights(plain);
    config.regularizer = DropoutRegularizer{options.keep_probability};
    std::optional<LayeredNetwork> with_dropout;
    try {
      with_dropout = sgd_train(initial, data, config);
    } catch (const DivergenceError&) {
      row.outcome = Outcome::diverged;
      return;
    }
    row.neg_dropout = count_negative_weights(*with_dropout);
    row.outcome = row.neg_dropout > row.neg_plain   ? Outcome::gt
                  : row.neg_dropout < row.neg_plain ? Outcome::lt
                                                    : Outcome::eq;
  });

  for (const auto& row : result.rows) {
    switch (row.outcome) {
      case Outcome::gt: ++result.gt; break;
      case Outcome::lt: ++result.lt; break;
      case Outcome::eq: ++result.eq; break;
      case Outcome::diverged: ++result.diverged; break;
    }
  }
  return result;
}

ExampleDistribution parity_dataset(std::size_t inputs, std::size_t examples,
                                   std::uint64_t seed) {
  if (inputs == 0 || examples == 0) throw DomainError("dataset needs inputs and examples");
  Rng rng(seed);
  std::vector<Example> entries(examples);
  for (auto& e : entries) {
    e.x.resize(inputs);
    e.y = 1.0;
    for (double& v : e.x) {
      v = rng.uniform(-1.0, 1.0);
      if (v < 0.0) e.y = -e.y;
    }
    e.weight = 1.0 / static_cast<double>(examples);
  }
  entries.back().weight = 1.0 - static_cast<double>(examples - 1) / static_cast<double>(examples);
  return ExampleDistribution(std::move(entries));
}

ScaleResult experiment_scale(const ScaleOptions& options) {
  if (options.runs < 1) throw DomainError("runs must be at least 1");
  if (options.scales.empty()) throw DomainError("need at least one scale");
  for (double s : options.scales) {
    if (!(s > 0.0)) throw DomainError("input scales must be positive");
  }
  const std::size_t n_scales = options.scales.size();
  ScaleResult result;
  result.rows.resize(options.runs * n_scales);

  // One task per (run, scale); each trains its three clones sequentially.
  detail::parallel_for(result.rows.size(), options.threads, [&](std::size_t task) {
    const std::size_t run = task / n_scales;
    const double scale = options.scales[task % n_scales];
    const auto base = parity_dataset(options.inputs, options.examples,
                                     derive_seed(options.seed, run, 0));
    const auto initial = init_network(options.inputs, options.width, options.depth,
                                      derive_seed(options.seed, run, 1));
    const auto data = scale_inputs(base, std::vector<double>(options.inputs, scale));

    TrainConfig config;
    config.max_iters = options.max_iters;
    config.lr = options.lr;
    config.momentum = options.momentum;
    config.seed = derive_seed(options.seed, run, 2);

    ScaleRow& row = result.rows[task];
    row.run = run;
    row.scale = scale;
    config.regularizer = DropoutRegularizer{options.keep_probability};
    row.loss_dropout = risk(sgd_train(initial, data, config), data);
    config.regularizer = WeightDecay{options.lambda};
    row.loss_wd = risk(sgd_train(initial, data, config), data);
    config.regularizer = NoRegularizer{};
    row.loss_none = risk(sgd_train(initial, data, config), data);
  });

  for (std::size_t s = 0; s < n_scales; ++s) {
    std::vector<double> dropout, wd, none;
    for (std::size_t run = 0; run < options.runs; ++run) {
      const auto& row = result.rows[run * n_scales + s];
      dropout.push_back(row.loss_dropout);
      wd.push_back(row.loss_wd);
      none.push_back(row.loss_none);
    }
    const double runs = static_cast<double>(options.runs);
    result.mean_by_scale.push_back(ScaleRow{options.runs, options.scales[s],
                                            detail::pairwise_sum(dropout) / runs,
                                            detail::pairwise_sum(wd) / runs,
                                            detail::pairwise_sum(none) / runs});
  }
  return result;
}

double spread(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::ranges::minmax_element(values);
  return *hi - *lo;
}

}  // namespace dropnet
