#pragma once

// Brute-force reference evaluator for tests. It walks the raw parameters node
// by node and enumerates dropout patterns with a plain counter, sharing no
// code with the library's kernels or enumerator.

#include <cstddef>
#include <vector>

#include "dropnet/network.hpp"

namespace oracle {

struct Point {
  std::vector<double> x;
  double y = 0.0;
  double weight = 1.0;
};

std::vector<Point> points_of(const dropnet::ExampleDistribution& dist);

/// Output with every node kept and no rescaling.
double plain_output(const dropnet::NetworkParameters& p, const std::vector<double>& x);

/// Output under `keep` (inputs first, then hidden layers in order).
double dropout_output(const dropnet::NetworkParameters& p, const std::vector<double>& x,
                      const std::vector<bool>& keep, double prob);

std::size_t droppable(const dropnet::NetworkParameters& p);

/// Calls visit(keep, probability) for all 2^N patterns.
template <typename F>
void each_pattern(const dropnet::NetworkParameters& p, double prob, F&& visit) {
  const std::size_t n = droppable(p);
  std::vector<bool> keep(n, false);
  for (;;) {
    double pr = 1.0;
    for (bool k : keep) pr *= k ? prob : 1.0 - prob;
    visit(keep, pr);
    std::size_t i = 0;
    while (i < n && keep[i]) keep[i++] = false;
    if (i == n) break;
    keep[i] = true;
  }
}

double criterion(const dropnet::NetworkParameters& p, const std::vector<Point>& data, double prob);
double risk(const dropnet::NetworkParameters& p, const std::vector<Point>& data);

struct Moments {
  double mean = 0.0;
  double second = 0.0;
};

/// E(D) and E(D^2) over patterns at a single input.
Moments output_moments(const dropnet::NetworkParameters& p, const std::vector<double>& x,
                       double prob);

/// Average output at `x` over input masks with exactly `kept` ones (uniform)
/// and Bernoulli hidden masks.
double psi(const dropnet::NetworkParameters& p, std::size_t kept, double prob,
           const std::vector<double>& x);

}  // namespace oracle
