#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dropnet/constructions.hpp"
#include "dropnet/criterion.hpp"
#include "dropnet/experiments.hpp"
#include "dropnet/network.hpp"

namespace dropnet {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// {"input_dim", "hidden_widths", "weights", "biases", "output_weights",
/// "output_bias"}; weights[j] is a list of rows. Round trips bit-exactly.
std::string network_to_json(const LayeredNetwork& net);
/// Throws FormatError on malformed input, ShapeError on inconsistent shapes.
LayeredNetwork network_from_json(std::string_view text);

/// Array of {"x": [...], "y": number, "weight": number}.
std::string distribution_to_json(const ExampleDistribution& dist);
ExampleDistribution distribution_from_json(std::string_view text);

/// Header x1..xK,y,weight then one line per example.
std::string distribution_to_csv(const ExampleDistribution& dist);
ExampleDistribution distribution_from_csv(std::string_view text);

std::string criterion_report_to_json(const CriterionReport& report);
CriterionReport criterion_report_from_json(std::string_view text);

std::string construction_spec_to_json(const ConstructionSpec& spec);
ConstructionSpec construction_spec_from_json(std::string_view text);

std::string negweights_csv(const NegWeightsResult& result);
/// Columns run,scale,loss_dropout,loss_wd,loss_none.
std::string scale_csv(const ScaleResult& result);
/// Per-scale means; columns scale,loss_dropout,loss_wd,loss_none,runs.
std::string scale_summary_csv(const ScaleResult& result);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

LayeredNetwork load_network(const std::filesystem::path& path);
void save_network(const std::filesystem::path& path, const LayeredNetwork& net);
/// CSV when the extension is .csv, JSON otherwise.
ExampleDistribution load_distribution(const std::filesystem::path& path);

}  // namespace dropnet
