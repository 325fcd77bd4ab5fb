#include <gtest/gtest.h>

#include <cmath>

#include "dropnet/constructions.hpp"
#include "dropnet/criterion.hpp"
#include "dropnet/error.hpp"
#include "dropnet/invariance.hpp"
#include "dropnet/random_networks.hpp"
#include "dropnet/rng.hpp"
#include "oracle.hpp"

using namespace dropnet;

TEST(InputScaling, IdentityScalesLeaveNetworkUnchanged) {
  const auto net = figure1_network();
  const std::vector<double> ones{1.0, 1.0};
  EXPECT_EQ(compensate_input_scaling(net, ones), net);
  const auto dist = point_distribution({1.0, -1.0}, 8.0);
  EXPECT_EQ(scale_inputs(dist, ones).entries()[0].x, dist.entries()[0].x);
}

TEST(InputScaling, EveryPatternAgreesOnFigureOne) {
  const auto net = figure1_network();
  const std::vector<double> a{2.0, 0.5};
  const auto compensated = compensate_input_scaling(net, a);
  const std::vector<double> x{1.0, -1.0};
  const std::vector<double> ax{2.0, -0.5};
  for (std::uint64_t bits = 0; bits < 16; ++bits) {
    const auto r = pattern_from_bits(net, bits);
    EXPECT_NEAR(dropout_forward(net, x, r, 0.5), dropout_forward(compensated, ax, r, 0.5), 1e-12)
        << bits;
  }
}

TEST(InputScaling, CriterionIsPreservedOnRandomNets) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_small_network(rng);
    const auto dist = random_distribution(net.input_dim(), 3, rng);
    std::vector<double> a(net.input_dim());
    for (double& v : a) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.2, 5.0);
    const double before = exact_criterion(net, dist, DropoutConfig::exact()).criterion;
    const double after =
        exact_criterion(compensate_input_scaling(net, a), scale_inputs(dist, a), DropoutConfig::exact())
            .criterion;
    EXPECT_TRUE(nearly_equal(before, after)) << before << " vs " << after;
  }
}

TEST(InputScaling, RejectsZeroAndWrongLength) {
  const auto net = figure1_network();
  EXPECT_THROW(compensate_input_scaling(net, std::vector<double>{1.0, 0.0}), DomainError);
  EXPECT_THROW(compensate_input_scaling(net, std::vector<double>{1.0}), ShapeError);
}

TEST(LayerRescaling, OutputMultipliedByProduct) {
  const auto net = figure1_network();
  const auto scaled = rescale_layers(net, LayerScaling{{3.0, 1.0}});
  for (std::uint64_t bits = 0; bits < 16; ++bits) {
    const auto r = pattern_from_bits(net, bits);
    const std::vector<double> x{0.7, 1.3};
    EXPECT_NEAR(dropout_forward(scaled, x, r, 0.5), 3.0 * dropout_forward(net, x, r, 0.5), 1e-12);
  }
}

TEST(LayerRescaling, BiasesUseCumulativeProducts) {
  Rng rng(41);
  const std::vector<std::size_t> widths{3, 2};
  const auto net = random_network(2, widths, rng);
  const auto scaled = rescale_layers(net, LayerScaling{{2.0, 3.0, 0.5}});
  EXPECT_DOUBLE_EQ(scaled.hidden_layer(0).bias[0], 2.0 * net.hidden_layer(0).bias[0]);
  EXPECT_DOUBLE_EQ(scaled.hidden_layer(1).bias[1], 6.0 * net.hidden_layer(1).bias[1]);
  EXPECT_DOUBLE_EQ(scaled.output_bias(), 3.0 * net.output_bias());
  EXPECT_DOUBLE_EQ(scaled.hidden_layer(1).weights(0, 0), 3.0 * net.hidden_layer(1).weights(0, 0));
}

TEST(LayerRescaling, RejectsBadFactors) {
  const auto net = figure1_network();
  EXPECT_THROW(rescale_layers(net, LayerScaling{{1.0}}), ShapeError);
  EXPECT_THROW(rescale_layers(net, LayerScaling{{-1.0, 1.0}}), DomainError);
}

TEST(OutputScaling, CriterionScalesWithLabels) {
  // Output layer doubled, labels doubled: J_D multiplies by 4. With y = 8 it is
  // 54; at y' = 16 on the doubled net 4 * 54 = 216.
  const auto net = rescale_output_layer(figure1_network(), 2.0);
  const auto dist = point_distribution({1.0, -1.0}, 16.0, PointMode::point_mass);
  EXPECT_NEAR(exact_criterion(net, dist, DropoutConfig::exact()).criterion, 216.0, 1e-10);
  EXPECT_THROW(rescale_output_layer(net, 0.0), DomainError);
}

TEST(Supermodular, RequiresNonnegativeWeights) {
  EXPECT_THROW(check_supermodular(build_w_neg(WNegSpec{2, 2, 2}), 10, 0), DomainError);
}

TEST(Supermodular, LinearNetworkHasZeroSlack) {
  NetworkParameters p;
  p.input_dim = 3;
  p.output_weights = {1.0, 2.0, 0.5};
  p.output_bias = -0.3;
  const auto rep = check_supermodular(LayeredNetwork(p), 500, 1);
  EXPECT_EQ(rep.violations, 0u);
  EXPECT_NEAR(rep.worst_slack, 0.0, 1e-12);
}

TEST(Supermodular, RandomNonnegativeNets) {
  Rng rng(13);
  RandomNetworkOptions nonneg;
  nonneg.nonnegative_weights = true;
  for (int trial = 0; trial < 10; ++trial) {
    const auto net = random_small_network(rng, nonneg);
    const auto rep = check_supermodular(net, 300, trial);
    EXPECT_EQ(rep.violations, 0u) << "worst " << rep.worst_slack;
  }
}

TEST(Monotone, NonnegativeNetsAreMonotone) {
  Rng rng(14);
  RandomNetworkOptions nonneg;
  nonneg.nonnegative_weights = true;
  const auto net = random_small_network(rng, nonneg);
  EXPECT_EQ(check_monotone(net, 500, 2).violations, 0u);
  NetworkParameters p;
  p.input_dim = 1;
  p.output_weights = {-1.0};
  EXPECT_GT(check_monotone(LayeredNetwork(p), 100, 2).violations, 0u);
}

TEST(Counts, NegativeWeightsAndBiases) {
  EXPECT_EQ(count_negative_weights(figure1_network()), 0u);
  EXPECT_EQ(count_negative_weights(build_uniform_growth(3, 3, 3, 2.0)), 0u);
  EXPECT_TRUE(is_nonnegative(figure1_network()));
  EXPECT_FALSE(is_nonnegative(build_w_neg(WNegSpec{2, 2, 2})));
  NetworkParameters p = figure1_network().parameters();
  p.hidden[0].bias = {-1.0, 0.5};
  p.output_bias = -2.0;
  EXPECT_EQ(count_negative_biases(LayeredNetwork(p)), 2u);
  EXPECT_EQ(count_negative_weights(LayeredNetwork(p)), 0u);
}

TEST(NearlyEqual, Tolerances) {
  EXPECT_TRUE(nearly_equal(0.0, 5e-13));
  EXPECT_TRUE(nearly_equal(1e6, 1e6 * (1 + 5e-11)));
  EXPECT_FALSE(nearly_equal(1.0, 1.0 + 1e-8));
}

TEST(PatternFromBits, BitZeroIsFirstInput) {
  const auto net = figure1_network();
  const auto r = pattern_from_bits(net, 0b0101);
  EXPECT_EQ(r.flatten(), (std::vector<std::uint8_t>{1, 0, 1, 0}));
}

TEST(Family, CriterionConstantAlongRescaling) {
  Rng rng(51);
  const std::vector<std::size_t> widths{3, 3};
  const auto net = random_network(2, widths, rng);
  const auto dist = random_distribution(2, 3, rng);
  const std::vector<double> ts{0.25, 0.5, 1.0, 2.0, 8.0};
  const auto fam = equal_criterion_family(net, dist, ts, DropoutConfig::exact());
  ASSERT_EQ(fam.size(), ts.size());
  for (const auto& pt : fam) EXPECT_TRUE(nearly_equal(pt.criterion, fam[2].criterion)) << pt.t;
}

TEST(Suite, AllPropertiesHold) {
  InvarianceSuiteOptions opt;
  opt.cases = 30;
  opt.property_cases = 300;
  opt.seed = 3;
  const auto checks = run_invariance_suite(opt);
  ASSERT_EQ(checks.size(), 7u);
  for (const auto& c : checks) {
    EXPECT_TRUE(c.passed) << c.name << " failures " << c.failures << " rel " << c.max_rel_error;
    EXPECT_GT(c.comparisons, 0u) << c.name;
  }
}
