#include <gtest/gtest.h>

#include <cmath>

#include "dropnet/closed_forms.hpp"
#include "dropnet/constructions.hpp"
#include "dropnet/criterion.hpp"
#include "dropnet/error.hpp"
#include "dropnet/invariance.hpp"
#include "dropnet/random_networks.hpp"
#include "dropnet/rng.hpp"
#include "oracle.hpp"

using namespace dropnet;

TEST(FirstOneGadget, ExactlyTheFirstOneFires) {
  for (std::size_t k = 1; k <= 6; ++k) {
    const Matrix g = first_one_gadget(k);
    for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << k); ++bits) {
      std::size_t first = k;
      for (std::size_t i = 0; i < k; ++i) {
        if ((bits >> i) & 1U) {
          first = i;
          break;
        }
      }
      for (std::size_t row = 0; row < k; ++row) {
        double z = 0.0;
        for (std::size_t i = 0; i < k; ++i) z += g(row, i) * static_cast<double>((bits >> i) & 1U);
        EXPECT_EQ(std::max(0.0, z), row == first ? 1.0 : 0.0) << "k=" << k << " bits=" << bits;
      }
    }
  }
}

TEST(WNeg, ShapeAndWeights) {
  const auto net = build_w_neg(WNegSpec{3, 6, 3});
  EXPECT_EQ(net.input_dim(), 3u);
  EXPECT_EQ(net.hidden_widths(), (std::vector<std::size_t>{6, 6}));
  EXPECT_EQ(net.hidden_layer(0).weights(4, 0), -1.0);
  EXPECT_EQ(net.hidden_layer(0).weights(4, 1), 1.0);
  EXPECT_EQ(net.hidden_layer(0).weights(4, 2), 0.0);
  for (double w : net.hidden_layer(1).weights.values()) EXPECT_EQ(w, 1.0);
  const double c = wneg_output_scale_formula(3, 6, 3);
  for (double w : net.output_weights()) EXPECT_EQ(w, c);
  EXPECT_EQ(net.output_bias(), 0.0);
}

TEST(WNeg, NegativeWeightCountFromGadget) {
  EXPECT_EQ(count_negative_weights(build_w_neg(WNegSpec{4, 4, 2})), 6u);
  EXPECT_EQ(count_negative_weights(build_w_neg(WNegSpec{4, 8, 2})), 12u);
}

TEST(WNeg, ValidatesArchitecture) {
  EXPECT_THROW(build_w_neg(WNegSpec{3, 4, 2}), DomainError);
  EXPECT_THROW(build_w_neg(WNegSpec{2, 4, 1}), DomainError);
  EXPECT_THROW(build_w_neg(WNegSpec{0, 4, 2}), DomainError);
}

TEST(WNeg, FirstLayerSumsCountSurvivingCopies) {
  // On any non-zero binary input each gadget copy puts exactly one 1 in the layer.
  const auto net = build_w_neg(WNegSpec{3, 9, 2});
  const auto& layer = net.hidden_layer(0);
  for (std::uint64_t bits = 1; bits < 8; ++bits) {
    double total = 0.0;
    for (std::size_t r = 0; r < layer.width(); ++r) {
      double z = 0.0;
      for (std::size_t i = 0; i < 3; ++i) z += layer.weights(r, i) * static_cast<double>((bits >> i) & 1U);
      total += std::max(0.0, z);
    }
    EXPECT_EQ(total, 3.0);
  }
}

TEST(WNeg, OptimizedPolicyNeverWorseThanFormula) {
  const auto dist = point_distribution({1.0, 1.0}, 1.0);
  for (std::size_t n : {2u, 4u, 8u}) {
    const auto formula = build_w_neg(w_neg_k2_spec(n, 2, ScalePolicy::formula));
    const auto optimized = build_w_neg(w_neg_k2_spec(n, 2, ScalePolicy::optimized));
    EXPECT_EQ(optimized.output_bias(), 0.2);
    EXPECT_LE(exact_criterion(optimized, dist, DropoutConfig::exact()).criterion,
              exact_criterion(formula, dist, DropoutConfig::exact()).criterion + 1e-15);
  }
}

TEST(UniformGrowth, WeightAndMean) {
  EXPECT_DOUBLE_EQ(uniform_growth_weight(2, 2, 2, 1.0), 0.5);
  const auto net = build_uniform_growth(2, 2, 2, 1.0);
  EXPECT_DOUBLE_EQ(forward(net, std::vector<double>{1.0, 1.0}), 1.0);
  EXPECT_EQ(count_negative_weights(net), 0u);
  EXPECT_THROW(build_uniform_growth(2, 2, 2, 5.0), DomainError);
  EXPECT_THROW(build_uniform_growth(2, 2, 2, -1.0), DomainError);
}

TEST(UniformGrowth, DepthOneIsLinear) {
  const auto net = build_uniform_growth(3, 4, 1, 1.5);
  EXPECT_EQ(net.hidden_layer_count(), 0u);
  EXPECT_DOUBLE_EQ(forward(net, std::vector<double>{1.0, 1.0, 1.0}), 1.5);
}

TEST(FigureOne, Network) {
  const auto net = figure1_network();
  EXPECT_EQ(net.hidden_widths(), std::vector<std::size_t>{2});
  EXPECT_EQ(count_negative_weights(net), 0u);
  EXPECT_DOUBLE_EQ(forward(net, std::vector<double>{1.0, -1.0}), 0.0);
}

TEST(PointDistribution, Modes) {
  const auto two = point_distribution({1.0, 2.0}, 3.0);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two.entries()[1].x, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(two.entries()[1].y, 0.0);
  EXPECT_EQ(two.entries()[0].weight, 0.5);
  EXPECT_EQ(point_distribution({1.0}, 3.0, PointMode::point_mass).size(), 1u);
}

TEST(ZeroEmbedding, PreservesCriterion) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_small_network(rng, {}, 2, 2, 2);
    const auto dist = random_distribution(net.input_dim(), 2, rng);
    const std::size_t k = net.input_dim();
    std::vector<std::size_t> positions(k);
    for (std::size_t i = 0; i < k; ++i) positions[i] = 2 * i + 1;
    const std::size_t wide = 2 * k + 1;
    const std::vector<double> fill(wide - k, 0.0);
    const auto big_dist = zero_embed(dist, wide, positions, fill);
    const auto big_net = embed_network(net, wide, positions);
    const auto a = exact_criterion(net, dist, DropoutConfig::exact());
    const auto b = exact_criterion(big_net, big_dist, DropoutConfig::exact());
    EXPECT_NEAR(a.criterion, b.criterion, 1e-12 * std::max(1.0, a.criterion));
    EXPECT_NEAR(a.risk, b.risk, 1e-12 * std::max(1.0, a.risk));
  }
}

TEST(ZeroEmbedding, PlacesValuesAndFill) {
  const auto dist = point_distribution({7.0, 8.0}, 1.0, PointMode::point_mass);
  const std::vector<std::size_t> positions{2, 0};
  const std::vector<double> fill{5.0, 6.0};
  const auto out = zero_embed(dist, 4, positions, fill);
  EXPECT_EQ(out.entries()[0].x, (std::vector<double>{8.0, 5.0, 7.0, 6.0}));
  EXPECT_THROW(zero_embed(dist, 4, std::vector<std::size_t>{0, 0}, fill), ShapeError);
  EXPECT_THROW(zero_embed(dist, 4, std::vector<std::size_t>{0, 4}, fill), ShapeError);
  EXPECT_THROW(zero_embed(dist, 4, positions, std::vector<double>{1.0}), ShapeError);
}

TEST(ConstructionSpec, BuildDispatch) {
  ConstructionSpec spec;
  spec.kind = ConstructionKind::figure1;
  EXPECT_EQ(build(spec), figure1_network());

  spec.kind = ConstructionKind::w_neg;
  spec.inputs = 4;
  spec.width = 4;
  spec.depth = 2;
  EXPECT_EQ(build(spec), build_w_neg(WNegSpec{4, 4, 2}));

  spec.kind = ConstructionKind::w_neg_k2;
  spec.inputs = 2;
  spec.width = 4;
  EXPECT_EQ(build(spec).output_bias(), 0.2);
  spec.inputs = 3;
  EXPECT_THROW(build(spec), DomainError);

  spec.kind = ConstructionKind::uniform_growth;
  spec.inputs = 2;
  spec.width = 2;
  spec.target = 1.0;
  EXPECT_EQ(build(spec), build_uniform_growth(2, 2, 2, 1.0));
}

TEST(ConstructionSpec, NamesRoundTrip) {
  for (auto kind : {ConstructionKind::figure1, ConstructionKind::w_neg, ConstructionKind::w_neg_k2,
                    ConstructionKind::uniform_growth}) {
    EXPECT_EQ(parse_construction_kind(to_string(kind)), kind);
  }
  EXPECT_FALSE(parse_construction_kind("nonsense").has_value());
  EXPECT_EQ(parse_scale_policy("optimized"), ScalePolicy::optimized);
  EXPECT_FALSE(parse_scale_policy("best").has_value());
}
