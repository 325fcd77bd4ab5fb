#include "pattern_enumerator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "dropnet/error.hpp"
#include "dropnet/rng.hpp"
#include "forward_kernel.hpp"
#include "parallel.hpp"

namespace dropnet::detail {

namespace {

constexpr std::uint64_t kChunkPatterns = 4096;
constexpr std::uint64_t kSampleBlock = 1024;

std::vector<double> powers(double base, std::size_t n) {
  std::vector<double> out(n + 1, 1.0);
  for (std::size_t k = 1; k <= n; ++k) out[k] = out[k - 1] * base;
  return out;
}

// Evaluates a contiguous run of hidden-pattern indices for one input mask.
class ChunkEvaluator {
 public:
  ChunkEvaluator(const LayeredNetwork& net, std::span<const double> x, std::uint64_t input_mask,
                 double keep_probability)
      : net_(net), inv_p_(1.0 / keep_probability) {
    const std::size_t k = net.input_dim();
    inputs_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      const bool kept = (input_mask >> (k - 1 - i)) & 1U;
      inputs_[i] = kept ? x[i] * inv_p_ : 0.0;
    }
    std::size_t offset = 0;
    for (const auto& layer : net.hidden_layers()) {
      offsets_.push_back(offset);
      offset += layer.width();
      pre_.emplace_back(layer.width(), 0.0);
      levels_.emplace_back(layer.width(), 0.0);
    }
    hidden_bits_ = offset;
    layer_of_bit_.resize(hidden_bits_);
    for (std::size_t j = 0; j < offsets_.size(); ++j) {
      for (std::size_t r = 0; r < net.hidden_layer(j).width(); ++r) {
        layer_of_bit_[hidden_bits_ - 1 - (offsets_[j] + r)] = j;
      }
    }
  }

  // Output for hidden pattern `h`; `from_layer` is the shallowest hidden layer
  // whose mask differs from the previous call (0 on the first call).
  double evaluate(std::uint64_t h, std::size_t from_layer, bool fresh) {
    const std::size_t layers = levels_.size();
    if (layers == 0) return output_node(net_, inputs_);
    for (std::size_t j = from_layer; j < layers; ++j) {
      const auto& layer = net_.hidden_layer(j);
      if (fresh || j > from_layer) {
        affine(layer, j == 0 ? std::span<const double>(inputs_) : levels_[j - 1], pre_[j],
               nonzero_);
      }
      const std::size_t shift = hidden_bits_ - offsets_[j] - layer.width();
      const std::uint64_t bits = h >> shift;
      auto& level = levels_[j];
      const std::size_t width = layer.width();
      for (std::size_t r = 0; r < width; ++r) {
        const bool kept = (bits >> (width - 1 - r)) & 1U;
        level[r] = kept ? relu(pre_[j][r]) * inv_p_ : 0.0;
      }
    }
    return output_node(net_, levels_.back());
  }

  std::size_t changed_layer(std::uint64_t prev, std::uint64_t h) const {
    const std::uint64_t diff = prev ^ h;
    const int top = 63 - std::countl_zero(diff);
    return layer_of_bit_[static_cast<std::size_t>(top)];
  }

 private:
  const LayeredNetwork& net_;
  double inv_p_;
  std::vector<double> inputs_;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<double>> pre_;
  std::vector<std::vector<double>> levels_;
  std::vector<std::size_t> layer_of_bit_;
  std::vector<std::size_t> nonzero_;
  std::size_t hidden_bits_ = 0;
};

std::size_t hidden_node_count(const LayeredNetwork& net) {
  return net.droppable_count() - net.input_dim();
}

}  // namespace

double binomial_coefficient(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return static_cast<double>(c);
}

void check_enumeration_cap(const LayeredNetwork& net, std::size_t cap) {
  const std::size_t n = net.droppable_count();
  if (n > cap || n > 62) {
    throw CapacityError("network has " + std::to_string(n) +
                        " droppable nodes; too large for exact mode (cap " + std::to_string(cap) +
                        "). Use Monte Carlo mode instead.");
  }
}

std::uint64_t enumerated_pattern_count(const LayeredNetwork& net,
                                       std::optional<std::size_t> kept_inputs) {
  const std::uint64_t hidden = std::uint64_t{1} << hidden_node_count(net);
  if (!kept_inputs) return hidden << net.input_dim();
  return hidden * static_cast<std::uint64_t>(binomial_coefficient(net.input_dim(), *kept_inputs));
}

ShiftedMoments exact_output_moments(const LayeredNetwork& net, std::span<const double> x,
                                    const EnumerationRequest& request) {
  check_input(net, x);
  check_keep_probability(request.keep_probability);
  check_enumeration_cap(net, request.cap);

  const std::size_t k = net.input_dim();
  const std::size_t hidden = hidden_node_count(net);
  const double p = request.keep_probability;
  const auto pow_p = powers(p, k + hidden);
  const auto pow_q = powers(1.0 - p, k + hidden);

  std::vector<std::uint64_t> masks;
  std::vector<double> mask_weight;
  const double uniform_weight =
      request.kept_inputs ? 1.0 / binomial_coefficient(k, *request.kept_inputs) : 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << k); ++m) {
    const auto kept = static_cast<std::size_t>(std::popcount(m));
    if (request.kept_inputs) {
      if (kept != *request.kept_inputs) continue;
      mask_weight.push_back(uniform_weight);
    } else {
      mask_weight.push_back(pow_p[kept] * pow_q[k - kept]);
    }
    masks.push_back(m);
  }

  const std::uint64_t hidden_patterns = std::uint64_t{1} << hidden;
  const std::uint64_t chunk = std::min(hidden_patterns, kChunkPatterns);
  const std::uint64_t chunks_per_mask = hidden_patterns / chunk;
  const std::size_t tasks = masks.size() * chunks_per_mask;

  std::vector<double> mass(tasks), first(tasks), second(tasks);
  parallel_for(tasks, request.threads, [&](std::size_t t) {
    const std::size_t mask_index = t / chunks_per_mask;
    const std::uint64_t start = (t % chunks_per_mask) * chunk;
    ChunkEvaluator evaluator(net, x, masks[mask_index], p);
    const double base = mask_weight[mask_index];
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::uint64_t h = start; h < start + chunk; ++h) {
      const bool fresh = h == start;
      const std::size_t from = fresh ? 0 : evaluator.changed_layer(h - 1, h);
      const double d = evaluator.evaluate(h, from, fresh) - request.shift;
      const auto kept = static_cast<std::size_t>(std::popcount(h));
      const double weight = base * pow_p[kept] * pow_q[hidden - kept];
      m0 += weight;
      m1 += weight * d;
      m2 += weight * d * d;
    }
    mass[t] = m0;
    first[t] = m1;
    second[t] = m2;
  });
  return {pairwise_sum(mass), pairwise_sum(first), pairwise_sum(second)};
}

void RunningStats::add(double value) {
  ++count;
  const double delta = value - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (value - mean);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double n_a = static_cast<double>(count);
  const double n_b = static_cast<double>(other.count);
  const double n = n_a + n_b;
  const double delta = other.mean - mean;
  mean += delta * n_b / n;
  m2 += other.m2 + delta * delta * n_a * n_b / n;
  count += other.count;
}

double RunningStats::variance() const {
  return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1);
}

std::vector<RunningStats> sample_outputs(const LayeredNetwork& net,
                                         const ExampleDistribution* dist, const Example* fixed,
                                         const SamplingRequest& request,
                                         const SampleStatistic& statistic) {
  check_keep_probability(request.keep_probability);
  const std::size_t k = net.input_dim();
  if (fixed != nullptr) {
    check_input(net, fixed->x);
  } else {
    for (const auto& e : dist->entries()) check_input(net, e.x);
  }
  if (request.kept_inputs && *request.kept_inputs > k) {
    throw DomainError("kept input count exceeds input dimension");
  }

  std::vector<double> cumulative;
  if (fixed == nullptr) {
    double acc = 0.0;
    for (const auto& e : dist->entries()) cumulative.push_back(acc += e.weight);
  }
  const auto pick = [&](Rng& rng) -> const Example& {
    if (fixed != nullptr) return *fixed;
    const auto entries = dist->entries();
    if (entries.size() == 1) return entries.front();
    const double u = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(), static_cast<std::ptrdiff_t>(entries.size()) - 1));
    while (entries[idx].weight == 0.0 && idx > 0) --idx;
    return entries[idx];
  };

  const double p = request.keep_probability;
  const bool fair = p == 0.5;
  const std::size_t nodes = net.droppable_count();
  const std::size_t stat_count = request.statistic_count;
  const std::uint64_t blocks = (request.samples + kSampleBlock - 1) / kSampleBlock;
  std::vector<std::vector<RunningStats>> partial(blocks);

  parallel_for(blocks, request.threads, [&](std::size_t b) {
    ForwardWorkspace ws(net);
    std::vector<std::uint8_t> keep(nodes);
    std::vector<std::size_t> order(k);
    std::vector<double> stats(stat_count);
    std::vector<RunningStats> acc(stat_count);
    const std::uint64_t begin = b * kSampleBlock;
    const std::uint64_t end = std::min(request.samples, begin + kSampleBlock);
    for (std::uint64_t i = begin; i < end; ++i) {
      Rng rng(request.seed, i);
      const Example& example = pick(rng);
      std::size_t first_hidden = 0;
      if (request.kept_inputs) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::fill(keep.begin(), keep.begin() + static_cast<std::ptrdiff_t>(k), 0);
        for (std::size_t s = 0; s < *request.kept_inputs; ++s) {
          const std::size_t j = s + rng.below(k - s);
          std::swap(order[s], order[j]);
          keep[order[s]] = 1;
        }
        first_hidden = k;
      }
      if (fair) {
        std::uint64_t bits = 0;
        for (std::size_t n = first_hidden; n < nodes; ++n) {
          if ((n - first_hidden) % 64 == 0) bits = rng.next_u64();
          keep[n] = bits & 1U;
          bits >>= 1;
        }
      } else {
        for (std::size_t n = first_hidden; n < nodes; ++n) keep[n] = rng.bernoulli(p);
      }
      const double output = dropout_output(net, example.x, keep, p, ws);
      statistic(example, output, stats);
      for (std::size_t s = 0; s < stat_count; ++s) acc[s].add(stats[s]);
    }
    partial[b] = std::move(acc);
  });

  std::vector<RunningStats> total(stat_count);
  for (const auto& block : partial) {
    for (std::size_t s = 0; s < stat_count; ++s) total[s].merge(block[s]);
  }
  return total;
}

}  // namespace dropnet::detail
