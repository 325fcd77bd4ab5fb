#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "dropnet/constructions.hpp"
#include "dropnet/criterion.hpp"
#include "dropnet/error.hpp"
#include "dropnet/io.hpp"
#include "dropnet/random_networks.hpp"
#include "dropnet/rng.hpp"

using namespace dropnet;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / ("dropnet_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(64.0), "64");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(third)), third);
}

TEST(NetworkJson, BitExactRoundTrip) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_small_network(rng, {}, 4, 3, 4);
    EXPECT_EQ(network_from_json(network_to_json(net)), net);
  }
  EXPECT_EQ(network_from_json(network_to_json(build_w_neg(WNegSpec{2, 4, 3}))),
            build_w_neg(WNegSpec{2, 4, 3}));
}

TEST(NetworkJson, MalformedInputs) {
  EXPECT_THROW(network_from_json("{"), FormatError);
  EXPECT_THROW(network_from_json("[]"), FormatError);
  EXPECT_THROW(network_from_json(R"({"input_dim": 2})"), FormatError);
  EXPECT_THROW(network_from_json(
                   R"({"input_dim":2,"hidden_widths":[1],"weights":[[[1,2,3]]],"biases":[[0]],"output_weights":[1],"output_bias":0})"),
               ShapeError);
  EXPECT_THROW(network_from_json(
                   R"({"input_dim":2,"hidden_widths":[1],"weights":[[[1,"a"]]],"biases":[[0]],"output_weights":[1],"output_bias":0})"),
               FormatError);
}

TEST(DistributionJson, RoundTripAndDefaultWeights) {
  Rng rng(4);
  const auto dist = random_distribution(3, 5, rng);
  const auto back = distribution_from_json(distribution_to_json(dist));
  ASSERT_EQ(back.size(), dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    EXPECT_EQ(back.entries()[i].x, dist.entries()[i].x);
    EXPECT_EQ(back.entries()[i].y, dist.entries()[i].y);
    EXPECT_EQ(back.entries()[i].weight, dist.entries()[i].weight);
  }
  const auto uniform = distribution_from_json(R"([{"x":[1],"y":0},{"x":[2],"y":1}])");
  EXPECT_EQ(uniform.entries()[1].weight, 0.5);
  EXPECT_THROW(distribution_from_json(R"([{"x":[1]}])"), FormatError);
}

TEST(DistributionCsv, RoundTrip) {
  const auto dist = point_distribution({0.1, -2.5}, 3.0);
  const auto csv = distribution_to_csv(dist);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x1,x2,y,weight");
  const auto back = distribution_from_csv(csv);
  EXPECT_EQ(back.entries()[0].x, dist.entries()[0].x);
  EXPECT_EQ(back.entries()[1].weight, 0.5);
  EXPECT_THROW(distribution_from_csv("x1,y,weight\n1,2\n"), FormatError);
  EXPECT_THROW(distribution_from_csv("x1,y,weight\n1,abc,1\n"), FormatError);
  EXPECT_THROW(distribution_from_csv(""), FormatError);
}

TEST(CriterionReportJson, RoundTrip) {
  const auto dist = point_distribution({1.0, -1.0}, 8.0, PointMode::point_mass);
  const auto exact = exact_criterion(figure1_network(), dist, DropoutConfig::exact());
  const auto back = criterion_report_from_json(criterion_report_to_json(exact));
  EXPECT_EQ(back.criterion, 54.0);
  EXPECT_EQ(back.penalty, -10.0);
  EXPECT_EQ(back.mode, EvaluationMode::exact);
  EXPECT_FALSE(back.std_error.has_value());

  const auto mc = monte_carlo_criterion(figure1_network(), dist, DropoutConfig::monte_carlo(500, 9));
  const auto mc_back = criterion_report_from_json(criterion_report_to_json(mc));
  EXPECT_EQ(mc_back.criterion, mc.criterion);
  EXPECT_EQ(mc_back.std_error, mc.std_error);
  EXPECT_EQ(mc_back.seed, mc.seed);
  EXPECT_EQ(mc_back.mode, EvaluationMode::monte_carlo);
  EXPECT_THROW(criterion_report_from_json(R"({"mode":"guess"})"), FormatError);
}

TEST(ConstructionSpecJson, RoundTrip) {
  ConstructionSpec spec;
  spec.kind = ConstructionKind::w_neg_k2;
  spec.width = 8;
  spec.output_bias = 0.2;
  spec.scale_policy = ScalePolicy::optimized;
  const auto back = construction_spec_from_json(construction_spec_to_json(spec));
  EXPECT_EQ(back.kind, spec.kind);
  EXPECT_EQ(back.width, 8u);
  EXPECT_EQ(back.output_bias, spec.output_bias);
  EXPECT_EQ(back.scale_policy, spec.scale_policy);
  EXPECT_THROW(construction_spec_from_json(R"({"kind":"nope"})"), FormatError);
}

TEST(Files, SaveLoadAndErrors) {
  const auto dir = temp_dir();
  const auto path = dir / "net.json";
  save_network(path, figure1_network());
  EXPECT_EQ(load_network(path), figure1_network());

  const auto csv_path = dir / "data.csv";
  write_text_file(csv_path, distribution_to_csv(point_distribution({1.0, 2.0}, 1.0)));
  EXPECT_EQ(load_distribution(csv_path).size(), 2u);
  const auto json_path = dir / "data.json";
  write_text_file(json_path, distribution_to_json(point_distribution({1.0, 2.0}, 1.0)));
  EXPECT_EQ(load_distribution(json_path).size(), 2u);

  EXPECT_THROW(read_text_file(dir / "missing.json"), IoError);
  EXPECT_THROW(write_text_file(dir / "no" / "such" / "dir" / "x.txt", "x"), IoError);
  fs::remove_all(dir);
}
