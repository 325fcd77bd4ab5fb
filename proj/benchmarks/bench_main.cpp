#include <benchmark/benchmark.h>

#include "dropnet/constructions.hpp"
#include "dropnet/criterion.hpp"
#include "dropnet/random_networks.hpp"
#include "dropnet/rng.hpp"
#include "dropnet/training.hpp"

using namespace dropnet;

namespace {

void BM_ExactCriterionWNeg(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const auto net = build_w_neg(w_neg_k2_spec(width, 2, ScalePolicy::formula));
  const auto dist = point_distribution({1.0, 1.0}, 1.0);
  auto config = DropoutConfig::exact();
  config.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_criterion(net, dist, config).criterion);
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << (width + 2)));
}
BENCHMARK(BM_ExactCriterionWNeg)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_MonteCarloCriterion(benchmark::State& state) {
  const auto net = build_w_neg(WNegSpec{4, 64, 3});
  const auto dist = point_distribution({1.0, 1.0, 1.0, 1.0}, 1.0);
  auto config = DropoutConfig::monte_carlo(static_cast<std::uint64_t>(state.range(0)), 1);
  config.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo_criterion(net, dist, config).criterion);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloCriterion)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_DropoutForward(benchmark::State& state) {
  Rng rng(3);
  const auto width = static_cast<std::size_t>(state.range(0));
  const std::vector<std::size_t> widths{width, width};
  const auto net = random_network(5, widths, rng);
  const std::vector<double> x{0.1, -0.2, 0.3, 0.4, -0.5};
  const auto pattern = DropoutPattern::all_kept(net);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dropout_forward(net, x, pattern, 0.5));
  }
}
BENCHMARK(BM_DropoutForward)->Arg(5)->Arg(50);

void BM_SgdDropoutSteps(benchmark::State& state) {
  ExampleDistribution data({Example{{0, 0, 0, 0, 0}, 0.0, 0.5}, Example{{1, 1, 1, 1, 1}, 1.0, 0.5}});
  const auto net0 = init_network(5, 50, 3, 0);
  TrainConfig cfg;
  cfg.regularizer = DropoutRegularizer{0.5};
  cfg.max_iters = 1000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgd_train(net0, data, cfg).output_bias());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SgdDropoutSteps)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
