#include <gtest/gtest.h>

#include <cmath>

#include "dropnet/constructions.hpp"
#include "dropnet/criterion.hpp"
#include "dropnet/error.hpp"
#include "dropnet/random_networks.hpp"
#include "dropnet/rng.hpp"
#include "oracle.hpp"

using namespace dropnet;

namespace {

DropoutConfig exact_config(double p = 0.5, std::size_t threads = 1) {
  auto c = DropoutConfig::exact(p);
  c.threads = threads;
  return c;
}

}  // namespace

TEST(ExactCriterion, FigureOneValues) {
  const auto dist = point_distribution({1.0, -1.0}, 8.0, PointMode::point_mass);
  const auto r = exact_criterion(figure1_network(), dist, exact_config());
  EXPECT_NEAR(r.criterion, 54.0, 1e-12);
  EXPECT_NEAR(r.risk, 64.0, 1e-12);
  EXPECT_NEAR(r.penalty, -10.0, 1e-12);
  EXPECT_EQ(r.evaluations, 16u);
  EXPECT_EQ(r.mode, EvaluationMode::exact);
  EXPECT_FALSE(r.std_error.has_value());
}

TEST(ExactCriterion, MatchesBruteForceOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const auto net = random_small_network(rng, {}, 3, 3, 3);
    const auto dist = random_distribution(net.input_dim(), 1 + rng.below(3), rng);
    const double p = rng.uniform(0.1, 0.9);
    const auto r = exact_criterion(net, dist, exact_config(p));
    const auto pts = oracle::points_of(dist);
    const double expected = oracle::criterion(net.parameters(), pts, p);
    EXPECT_NEAR(r.criterion, expected, 1e-10 * std::max(1.0, std::abs(expected)));
    EXPECT_NEAR(r.risk, oracle::risk(net.parameters(), pts), 1e-12);
    EXPECT_NEAR(r.penalty, r.criterion - r.risk, 1e-12);
  }
}

TEST(ExactCriterion, IndependentOfThreadCount) {
  Rng rng(99);
  const std::vector<std::size_t> widths{6, 6};
  const auto net = random_network(4, widths, rng);
  const auto dist = random_distribution(4, 3, rng);
  const auto one = exact_criterion(net, dist, exact_config(0.5, 1));
  for (std::size_t threads : {2u, 3u, 8u}) {
    const auto many = exact_criterion(net, dist, exact_config(0.5, threads));
    EXPECT_EQ(one.criterion, many.criterion) << threads << " threads";
  }
}

TEST(ExactCriterion, SpansSeveralChunks) {
  // 16 droppable nodes give 65536 patterns, more than one enumeration chunk.
  Rng rng(3);
  const std::vector<std::size_t> widths{6, 6};
  const auto net = random_network(4, widths, rng);
  const auto dist = random_distribution(4, 1, rng);
  const auto r = exact_criterion(net, dist, exact_config());
  EXPECT_EQ(r.evaluations, 65536u);
  EXPECT_NEAR(r.criterion, oracle::criterion(net.parameters(), oracle::points_of(dist), 0.5),
              1e-10 * std::max(1.0, r.criterion));
}

TEST(ExactCriterion, CapacityErrorNamesMonteCarlo) {
  const auto net = build_w_neg(WNegSpec{2, 30, 2});
  const auto dist = point_distribution({1.0, 1.0}, 1.0);
  try {
    exact_criterion(net, dist, exact_config());
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("Monte Carlo"), std::string::npos);
  }
  auto raised = exact_config();
  raised.enumeration_cap = 32;
  EXPECT_NO_THROW(exact_criterion(figure1_network(), point_distribution({1.0, 1.0}, 1.0), raised));
}

TEST(ExactCriterion, ShapeMismatchRejected) {
  const auto dist = point_distribution({1.0, 1.0, 1.0}, 1.0);
  EXPECT_THROW(exact_criterion(figure1_network(), dist, exact_config()), ShapeError);
}

TEST(ExactCriterion, KeepProbabilityValidated) {
  const auto dist = point_distribution({1.0, 1.0}, 1.0);
  EXPECT_THROW(exact_criterion(figure1_network(), dist, exact_config(1.0)), DomainError);
  EXPECT_THROW(exact_criterion(figure1_network(), dist, exact_config(0.0)), DomainError);
}

TEST(ExactCriterion, ZeroNetworkHasZeroPenalty) {
  NetworkParameters p;
  p.input_dim = 2;
  p.hidden.push_back(DenseLayer{Matrix(3, 2), std::vector<double>(3, 0.0)});
  p.output_weights.assign(3, 0.0);
  p.output_bias = 0.3;
  const LayeredNetwork net(p);
  Rng rng(1);
  const auto r = exact_criterion(net, random_distribution(2, 4, rng), exact_config());
  EXPECT_NEAR(r.penalty, 0.0, 1e-15);
}

TEST(Psi, MatchesOracle) {
  Rng rng(77);
  RandomNetworkOptions opts;
  for (int trial = 0; trial < 30; ++trial) {
    const auto net = random_small_network(rng, opts, 4, 2, 3);
    const double p = rng.uniform(0.2, 0.8);
    std::vector<double> x(net.input_dim());
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    for (std::size_t l = 0; l <= net.input_dim(); ++l) {
      const double expected = oracle::psi(net.parameters(), l, p, x);
      EXPECT_NEAR(psi(net, l, exact_config(p), x), expected, 1e-12 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST(Psi, DefaultsToAllOnesInput) {
  const auto net = figure1_network();
  EXPECT_DOUBLE_EQ(psi(net, 2, exact_config()), psi(net, 2, exact_config(), std::vector<double>{1.0, 1.0}));
  EXPECT_DOUBLE_EQ(psi(net, 0, exact_config()), 0.0);
  EXPECT_THROW(psi(net, 3, exact_config()), DomainError);
}

TEST(PenaltyDecomposition, LabelDependenceExample) {
  // Two hidden nodes summing both inputs, x = (1,-2): W(x) = 0 but dropping
  // the negative input makes the hidden nodes fire.
  const auto net = figure1_network();
  const std::vector<double> x{1.0, -2.0};
  const auto at0 = penalty_decomposition(net, x, 0.0, exact_config());
  const auto at1 = penalty_decomposition(net, x, 1.0, exact_config());
  EXPECT_DOUBLE_EQ(at0.e_delta, 1.0);
  EXPECT_DOUBLE_EQ(at0.e_delta_sq, 6.0);
  EXPECT_DOUBLE_EQ(at0.plain_output, 0.0);
  EXPECT_DOUBLE_EQ(at0.penalty, 6.0);
  EXPECT_DOUBLE_EQ(at1.penalty, 4.0);

  const auto o = oracle::output_moments(net.parameters(), x, 0.5);
  EXPECT_DOUBLE_EQ(o.mean, 1.0);
  EXPECT_DOUBLE_EQ(o.second, 6.0);
}

TEST(PenaltyDecomposition, AgreesWithCriterionOnRandomNets) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto net = random_small_network(rng);
    std::vector<double> x(net.input_dim());
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    const auto dec = penalty_decomposition(net, x, y, exact_config());
    const auto rep = exact_criterion(net, point_distribution(x, y, PointMode::point_mass), exact_config());
    EXPECT_NEAR(dec.penalty, rep.penalty, 1e-12 * std::max(1.0, std::abs(rep.criterion)));
  }
}

TEST(OutputScale, QuadraticMatchesDirectEvaluation) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_small_network(rng);
    const auto dist = random_distribution(net.input_dim(), 3, rng);
    const auto fit = optimize_output_scale(net, dist, exact_config());
    for (double c : {-1.5, 0.0, 0.7, 2.0}) {
      const double direct = exact_criterion(scale_output_weights(net, c), dist, exact_config()).criterion;
      EXPECT_NEAR(fit.alpha * c * c + fit.beta * c + fit.gamma, direct, 1e-10 * std::max(1.0, direct));
    }
    const double at_star =
        exact_criterion(scale_output_weights(net, fit.c_star), dist, exact_config()).criterion;
    EXPECT_NEAR(fit.criterion_at_c_star, at_star, 1e-10 * std::max(1.0, at_star));
    for (double eps : {-1e-3, 1e-3}) {
      const double nearby =
          exact_criterion(scale_output_weights(net, fit.c_star + eps), dist, exact_config()).criterion;
      EXPECT_GE(nearby, at_star - 1e-12);
    }
  }
}

TEST(OutputScale, PointMassOptimumIsMeanOverSecondMoment) {
  // Growth network K=2, n=2, d=2, y=1 has E(D) = 1 and E(D^2) = 2.25 at (1,1),
  // so on the point mass c* = E(D) y / E(D^2).
  const auto net = build_uniform_growth(2, 2, 2, 1.0);
  const auto fit = optimize_output_scale(
      net, point_distribution({1.0, 1.0}, 1.0, PointMode::point_mass), exact_config());
  EXPECT_NEAR(fit.alpha, 2.25, 1e-12);
  EXPECT_NEAR(fit.beta, -2.0, 1e-12);
  EXPECT_NEAR(fit.gamma, 1.0, 1e-12);
  EXPECT_NEAR(fit.c_star, 1.0 / 2.25, 1e-12);
}

TEST(ScaleOutputWeights, LeavesBiasAlone) {
  NetworkParameters p = figure1_network().parameters();
  p.output_bias = 0.4;
  const auto scaled = scale_output_weights(LayeredNetwork(p), 3.0);
  EXPECT_EQ(scaled.output_bias(), 0.4);
  EXPECT_EQ(scaled.output_weights()[1], 3.0);
}
