#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "dropnet/error.hpp"
#include "dropnet/io.hpp"

namespace dropnet {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError(std::string(what) + ": invalid JSON (" + e.what() + ")");
  }
}

// Wraps nlohmann type errors so callers only ever see dropnet exceptions.
template <typename F>
auto decode(std::string_view what, F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

const json& field(const json& obj, const char* key, std::string_view what) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw FormatError(std::string(what) + ": missing field \"" + key + "\"");
  }
  return obj.at(key);
}

std::vector<double> number_list(const json& j, std::string_view what) {
  if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw FormatError(std::string(what) + ": expected a number");
    out.push_back(v.get<double>());
  }
  return out;
}

double parse_number(std::string_view token, std::size_t line) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) {
    token.remove_suffix(1);
  }
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || end != token.data() + token.size() || token.empty()) {
    throw FormatError("CSV line " + std::to_string(line) + ": \"" + std::string(token) +
                      "\" is not a number");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

std::string network_to_json(const LayeredNetwork& net) {
  json j;
  j["input_dim"] = net.input_dim();
  j["hidden_widths"] = net.hidden_widths();
  json weights = json::array();
  json biases = json::array();
  for (const auto& layer : net.hidden_layers()) {
    json rows = json::array();
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      const auto row = layer.weights.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    weights.push_back(std::move(rows));
    biases.push_back(layer.bias);
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  j["output_weights"] = std::vector<double>(net.output_weights().begin(), net.output_weights().end());
  j["output_bias"] = net.output_bias();
  return j.dump(2);
}

LayeredNetwork network_from_json(std::string_view text) {
  constexpr std::string_view what = "network";
  const json j = parse_json(text, what);
  return decode(what, [&] {
    NetworkParameters params;
    params.input_dim = field(j, "input_dim", what).get<std::size_t>();
    const auto widths = field(j, "hidden_widths", what).get<std::vector<std::size_t>>();
    const json& weights = field(j, "weights", what);
    const json& biases = field(j, "biases", what);
    if (!weights.is_array() || !biases.is_array() || weights.size() != widths.size() ||
        biases.size() != widths.size()) {
      throw FormatError("network: weights and biases need one entry per hidden layer");
    }
    std::size_t fan_in = params.input_dim;
    for (std::size_t l = 0; l < widths.size(); ++l) {
      const json& rows = weights[l];
      if (!rows.is_array() || rows.size() != widths[l]) {
        throw ShapeError("network: layer " + std::to_string(l + 1) + " needs " +
                         std::to_string(widths[l]) + " weight rows");
      }
      std::vector<std::vector<double>> matrix;
      for (const auto& row : rows) {
        matrix.push_back(number_list(row, what));
        if (matrix.back().size() != fan_in) {
          throw ShapeError("network: layer " + std::to_string(l + 1) + " rows need " +
                           std::to_string(fan_in) + " entries");
        }
      }
      params.hidden.push_back(DenseLayer{
          widths[l] == 0 ? Matrix(0, fan_in) : Matrix::from_rows(matrix), number_list(biases[l], what)});
      fan_in = widths[l];
    }
    params.output_weights = number_list(field(j, "output_weights", what), what);
    params.output_bias = field(j, "output_bias", what).get<double>();
    return LayeredNetwork(std::move(params));
  });
}

std::string distribution_to_json(const ExampleDistribution& dist) {
  json arr = json::array();
  for (const auto& e : dist.entries()) arr.push_back({{"x", e.x}, {"y", e.y}, {"weight", e.weight}});
  return arr.dump(2);
}

ExampleDistribution distribution_from_json(std::string_view text) {
  constexpr std::string_view what = "distribution";
  const json j = parse_json(text, what);
  if (!j.is_array()) throw FormatError("distribution: expected a JSON array of examples");
  return decode(what, [&] {
    std::vector<Example> entries;
    for (const auto& item : j) {
      Example e;
      e.x = number_list(field(item, "x", what), what);
      e.y = field(item, "y", what).get<double>();
      e.weight = item.contains("weight") ? item.at("weight").get<double>()
                                         : 1.0 / static_cast<double>(j.size());
      entries.push_back(std::move(e));
    }
    return ExampleDistribution(std::move(entries));
  });
}

std::string distribution_to_csv(const ExampleDistribution& dist) {
  std::string out;
  for (std::size_t i = 0; i < dist.input_dim(); ++i) out += "x" + std::to_string(i + 1) + ",";
  out += "y,weight\n";
  for (const auto& e : dist.entries()) {
    for (double v : e.x) out += format_double(v) + ",";
    out += format_double(e.y) + "," + format_double(e.weight) + "\n";
  }
  return out;
}

ExampleDistribution distribution_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw FormatError("distribution CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  if (header.size() < 3 || header[header.size() - 2] != "y" || header.back() != "weight") {
    throw FormatError("distribution CSV header must be x1,...,xK,y,weight");
  }
  const std::size_t k = header.size() - 2;
  for (std::size_t i = 0; i < k; ++i) {
    if (header[i] != "x" + std::to_string(i + 1)) {
      throw FormatError("distribution CSV header column " + std::to_string(i + 1) +
                        " must be x" + std::to_string(i + 1));
    }
  }
  std::vector<Example> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    if (cells.size() != k + 2) {
      throw FormatError("CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(k + 2) + " columns");
    }
    Example e;
    for (std::size_t i = 0; i < k; ++i) e.x.push_back(parse_number(cells[i], line_no));
    e.y = parse_number(cells[k], line_no);
    e.weight = parse_number(cells[k + 1], line_no);
    entries.push_back(std::move(e));
  }
  return ExampleDistribution(std::move(entries));
}

std::string criterion_report_to_json(const CriterionReport& r) {
  json j;
  j["risk"] = r.risk;
  j["criterion"] = r.criterion;
  j["penalty"] = r.penalty;
  j["mode"] = std::string(to_string(r.mode));
  j["std_error"] = optional_number(r.std_error);
  j["evaluations"] = r.evaluations;
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  j["keep_probability"] = r.keep_probability;
  return j.dump(2);
}

CriterionReport criterion_report_from_json(std::string_view text) {
  constexpr std::string_view what = "criterion report";
  const json j = parse_json(text, what);
  return decode(what, [&] {
    CriterionReport r;
    r.risk = field(j, "risk", what).get<double>();
    r.criterion = field(j, "criterion", what).get<double>();
    r.penalty = field(j, "penalty", what).get<double>();
    const auto mode = field(j, "mode", what).get<std::string>();
    if (mode == "exact") {
      r.mode = EvaluationMode::exact;
    } else if (mode == "monte-carlo") {
      r.mode = EvaluationMode::monte_carlo;
    } else {
      throw FormatError("criterion report: unknown mode \"" + mode + "\"");
    }
    if (j.contains("std_error") && !j["std_error"].is_null()) r.std_error = j["std_error"].get<double>();
    r.evaluations = field(j, "evaluations", what).get<std::uint64_t>();
    if (j.contains("seed") && !j["seed"].is_null()) r.seed = j["seed"].get<std::uint64_t>();
    r.keep_probability = field(j, "keep_probability", what).get<double>();
    return r;
  });
}

std::string construction_spec_to_json(const ConstructionSpec& spec) {
  json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["inputs"] = spec.inputs;
  j["width"] = spec.width;
  j["depth"] = spec.depth;
  j["target"] = spec.target;
  j["output_bias"] = optional_number(spec.output_bias);
  j["scale_policy"] =
      spec.scale_policy ? json(std::string(to_string(*spec.scale_policy))) : json(nullptr);
  return j.dump(2);
}

ConstructionSpec construction_spec_from_json(std::string_view text) {
  constexpr std::string_view what = "construction spec";
  const json j = parse_json(text, what);
  return decode(what, [&] {
    ConstructionSpec spec;
    const auto kind_name = field(j, "kind", what).get<std::string>();
    const auto kind = parse_construction_kind(kind_name);
    if (!kind) throw FormatError("construction spec: unknown kind \"" + kind_name + "\"");
    spec.kind = *kind;
    if (j.contains("inputs")) spec.inputs = j["inputs"].get<std::size_t>();
    if (j.contains("width")) spec.width = j["width"].get<std::size_t>();
    if (j.contains("depth")) spec.depth = j["depth"].get<std::size_t>();
    if (j.contains("target")) spec.target = j["target"].get<double>();
    if (j.contains("output_bias") && !j["output_bias"].is_null()) {
      spec.output_bias = j["output_bias"].get<double>();
    }
    if (j.contains("scale_policy") && !j["scale_policy"].is_null()) {
      const auto name = j["scale_policy"].get<std::string>();
      spec.scale_policy = parse_scale_policy(name);
      if (!spec.scale_policy) throw FormatError("construction spec: unknown scale policy \"" + name + "\"");
    }
    return spec;
  });
}

std::string negweights_csv(const NegWeightsResult& result) {
  std::string out = "rep,seed,neg_dropout,neg_plain,outcome\n";
  for (const auto& r : result.rows) {
    out += std::to_string(r.rep) + "," + std::to_string(r.seed) + "," +
           std::to_string(r.neg_dropout) + "," + std::to_string(r.neg_plain) + "," +
           std::string(to_string(r.outcome)) + "\n";
  }
  return out;
}

std::string scale_csv(const ScaleResult& result) {
  std::string out = "run,scale,loss_dropout,loss_wd,loss_none\n";
  for (const auto& r : result.rows) {
    out += std::to_string(r.run) + "," + format_double(r.scale) + "," +
           format_double(r.loss_dropout) + "," + format_double(r.loss_wd) + "," +
           format_double(r.loss_none) + "\n";
  }
  return out;
}

std::string scale_summary_csv(const ScaleResult& result) {
  std::string out = "scale,loss_dropout,loss_wd,loss_none,runs\n";
  for (const auto& r : result.mean_by_scale) {
    out += format_double(r.scale) + "," + format_double(r.loss_dropout) + "," +
           format_double(r.loss_wd) + "," + format_double(r.loss_none) + "," +
           std::to_string(r.run) + "\n";
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

LayeredNetwork load_network(const std::filesystem::path& path) {
  return network_from_json(read_text_file(path));
}

void save_network(const std::filesystem::path& path, const LayeredNetwork& net) {
  write_text_file(path, network_to_json(net) + "\n");
}

ExampleDistribution load_distribution(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  if (path.extension() == ".csv") return distribution_from_csv(text);
  return distribution_from_json(text);
}

}  // namespace dropnet
