#include "oracle.hpp"

#include <algorithm>

namespace oracle {

std::vector<Point> points_of(const dropnet::ExampleDistribution& dist) {
  std::vector<Point> out;
  for (const auto& e : dist.entries()) out.push_back({e.x, e.y, e.weight});
  return out;
}

std::size_t droppable(const dropnet::NetworkParameters& p) {
  std::size_t n = p.input_dim;
  for (const auto& l : p.hidden) n += l.bias.size();
  return n;
}

double dropout_output(const dropnet::NetworkParameters& p, const std::vector<double>& x,
                      const std::vector<bool>& keep, double prob) {
  std::size_t flag = 0;
  std::vector<double> level;
  for (double xi : x) level.push_back(keep[flag++] ? xi / prob : 0.0);
  for (const auto& layer : p.hidden) {
    std::vector<double> next;
    for (std::size_t node = 0; node < layer.bias.size(); ++node) {
      long double z = layer.bias[node];
      for (std::size_t src = 0; src < level.size(); ++src) {
        z += static_cast<long double>(layer.weights(node, src)) * level[src];
      }
      const double h = std::max(0.0, static_cast<double>(z));
      next.push_back(keep[flag++] ? h / prob : 0.0);
    }
    level = std::move(next);
  }
  long double out = p.output_bias;
  for (std::size_t i = 0; i < level.size(); ++i) {
    out += static_cast<long double>(p.output_weights[i]) * level[i];
  }
  return static_cast<double>(out);
}

double plain_output(const dropnet::NetworkParameters& p, const std::vector<double>& x) {
  return dropout_output(p, x, std::vector<bool>(droppable(p), true), 1.0);
}

double criterion(const dropnet::NetworkParameters& p, const std::vector<Point>& data,
                 double prob) {
  long double total = 0.0;
  for (const auto& pt : data) {
    each_pattern(p, prob, [&](const std::vector<bool>& keep, double pr) {
      const long double r = dropout_output(p, pt.x, keep, prob) - pt.y;
      total += pt.weight * pr * r * r;
    });
  }
  return static_cast<double>(total);
}

double risk(const dropnet::NetworkParameters& p, const std::vector<Point>& data) {
  long double total = 0.0;
  for (const auto& pt : data) {
    const long double r = plain_output(p, pt.x) - pt.y;
    total += pt.weight * r * r;
  }
  return static_cast<double>(total);
}

Moments output_moments(const dropnet::NetworkParameters& p, const std::vector<double>& x,
                       double prob) {
  long double m1 = 0.0;
  long double m2 = 0.0;
  each_pattern(p, prob, [&](const std::vector<bool>& keep, double pr) {
    const long double d = dropout_output(p, x, keep, prob);
    m1 += pr * d;
    m2 += pr * d * d;
  });
  return {static_cast<double>(m1), static_cast<double>(m2)};
}

double psi(const dropnet::NetworkParameters& p, std::size_t kept, double prob,
           const std::vector<double>& x) {
  const std::size_t k = p.input_dim;
  long double total = 0.0;
  long double mass = 0.0;
  each_pattern(p, prob, [&](const std::vector<bool>& keep, double pr) {
    const auto ones = static_cast<std::size_t>(std::count(keep.begin(), keep.begin() + k, true));
    if (ones != kept) return;
    // Strip the input-mask factor; every mask of this weight counts equally.
    double hidden_pr = pr;
    for (std::size_t i = 0; i < k; ++i) hidden_pr /= keep[i] ? prob : 1.0 - prob;
    total += hidden_pr * dropout_output(p, x, keep, prob);
    mass += hidden_pr;
  });
  return static_cast<double>(total / mass);
}

}  // namespace oracle
