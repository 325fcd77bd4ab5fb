#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "dropnet/closed_forms.hpp"
#include "dropnet/constructions.hpp"
#include "dropnet/criterion.hpp"
#include "dropnet/error.hpp"
#include "dropnet/experiments.hpp"
#include "dropnet/invariance.hpp"
#include "dropnet/io.hpp"

#ifndef DROPNET_VERSION
#define DROPNET_VERSION "unknown"
#endif

namespace dropnet::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Bad or missing arguments detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct Outcome {
  std::vector<Artifact> artifacts;
  std::vector<std::uint64_t> seeds;
};

struct Globals {
  std::size_t threads = 0;
  std::string output_dir;
};

struct DropoutOptions {
  double p = 0.5;
  std::string mode = "exact";
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  std::size_t cap = 26;
};

struct DataOptions {
  std::string path;
  std::vector<double> x;
  double y = 0.0;
  bool point_mass = false;
};

void add_dropout_options(CLI::App* app, DropoutOptions& o) {
  app->add_option("--p", o.p, "Keep probability")->capture_default_str();
  app->add_option("--mode", o.mode, "exact or mc")
      ->check(CLI::IsMember({"exact", "mc"}))
      ->capture_default_str();
  app->add_option("--samples", o.samples, "Monte Carlo samples")->capture_default_str();
  app->add_option("--seed", o.seed, "Monte Carlo seed")->capture_default_str();
  app->add_option("--cap", o.cap, "Largest droppable-node count for exact enumeration")
      ->capture_default_str();
}

DropoutConfig make_config(const DropoutOptions& o, std::size_t threads) {
  DropoutConfig c = o.mode == "mc" ? DropoutConfig::monte_carlo(o.samples, o.seed, o.p)
                                   : DropoutConfig::exact(o.p);
  c.enumeration_cap = o.cap;
  c.threads = threads;
  c.validate();
  return c;
}

void add_data_options(CLI::App* app, DataOptions& o) {
  app->add_option("--data", o.path, "Distribution file (.json or .csv)");
  app->add_option("--x", o.x, "Single input x; with --y builds P_(x,y)")->delimiter(',');
  app->add_option("--y", o.y, "Label for --x")->capture_default_str();
  app->add_flag("--point-mass", o.point_mass, "Use the point mass on (x,y) instead of P_(x,y)");
}

ExampleDistribution make_distribution(const DataOptions& o) {
  if (!o.path.empty()) {
    if (!o.x.empty()) throw UsageError("give either --data or --x, not both");
    return load_distribution(o.path);
  }
  if (o.x.empty()) throw UsageError("a distribution is required: pass --data FILE or --x and --y");
  return point_distribution(o.x, o.y, o.point_mass ? PointMode::point_mass : PointMode::with_origin);
}

json parsed(const std::string& text) { return json::parse(text); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<std::uint64_t> seeds_of(const DropoutConfig& c) {
  if (const auto* mc = std::get_if<MonteCarlo>(&c.mode)) return {mc->seed};
  return {};
}

json check_json(const PropertyCheck& c) {
  return {{"name", c.name},
          {"cases", c.cases},
          {"comparisons", c.comparisons},
          {"failures", c.failures},
          {"max_abs_error", c.max_abs_error},
          {"max_rel_error", c.max_rel_error},
          {"worst_slack", c.worst_slack},
          {"passed", c.passed}};
}

// Resolved option values of `app` and its parents, for the run manifest.
json describe_options(CLI::App* app) {
  json config = json::object();
  for (CLI::App* a = app; a != nullptr; a = a->get_parent()) {
    for (const CLI::Option* opt : a->get_options()) {
      const std::string name = opt->get_name(false, true);
      if (name.empty() || name == "--help" || name == "-h" || config.contains(name)) continue;
      if (opt->count() > 0) {
        const auto& results = opt->results();
        config[name] = results.size() == 1 ? json(results.front()) : json(results);
      } else if (!opt->get_default_str().empty()) {
        config[name] = opt->get_default_str();
      }
    }
  }
  return config;
}

std::string command_path(CLI::App* app) {
  std::string path;
  for (CLI::App* a = app; a != nullptr && a->get_parent() != nullptr; a = a->get_parent()) {
    path = path.empty() ? a->get_name() : a->get_name() + "-" + path;
  }
  return path;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(CLI::App* app, const Globals& g, const Outcome& outcome, std::ostream& out) {
  // Without --output only the primary (first) artifact goes to stdout.
  if (g.output_dir.empty()) {
    out << outcome.artifacts.front().content;
    return;
  }
  const fs::path dir(g.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  json files = json::array();
  for (const auto& a : outcome.artifacts) {
    write_text_file(dir / a.name, a.content);
    files.push_back((dir / a.name).string());
  }
  const std::string command = command_path(app);
  const json manifest = {{"command", command},
                         {"tool_version", DROPNET_VERSION},
                         {"timestamp", utc_timestamp()},
                         {"config", describe_options(app)},
                         {"seeds", outcome.seeds},
                         {"outputs", files}};
  const fs::path manifest_path = dir / (command + ".manifest.json");
  write_text_file(manifest_path, dump(manifest));
  for (const auto& f : files) out << f.get<std::string>() << "\n";
  out << manifest_path.string() << "\n";
}

using Handler = std::function<Outcome()>;

struct Registry {
  std::vector<std::pair<CLI::App*, Handler>> handlers;

  void add(CLI::App* app, Handler h) { handlers.emplace_back(app, std::move(h)); }
};

// State for every subcommand lives here so option bindings stay valid.
struct State {
  Globals globals;

  ConstructionSpec spec;
  std::string kind = "figure1";
  std::string spec_path;
  std::string policy;
  double output_bias = 0.0;

  std::string network_path;
  DataOptions data;
  DropoutOptions dropout;

  std::size_t kept = 0;
  std::vector<double> x;
  double y = 0.0;

  std::size_t k = 2;
  std::size_t n = 2;
  std::size_t d = 2;
  double lambda = 0.5;
  double activation = 0.0;

  InvarianceSuiteOptions invariance;
  std::size_t width = 1;
  std::string split = "even";

  NegWeightsOptions negweights;
  ScaleOptions scale;
  bool paper_scale = false;

  std::vector<double> ts{0.25, 0.5, 1.0, 2.0, 4.0};
  std::size_t layer_a = 0;
  std::size_t layer_b = 1;
};

void register_construct(CLI::App& app, State& s, Registry& reg) {
  auto* sub = app.add_subcommand("construct", "Build a named network construction");
  sub->add_option("--kind", s.kind, "figure1, w_neg, w_neg_k2 or uniform_growth")
      ->check(CLI::IsMember({"figure1", "w_neg", "w_neg_k2", "uniform_growth"}))
      ->capture_default_str();
  auto* k = sub->add_option("-K,--inputs", s.spec.inputs, "Input count K")->capture_default_str();
  auto* n = sub->add_option("-n,--width", s.spec.width, "Hidden width n")->capture_default_str();
  auto* d = sub->add_option("-d,--depth", s.spec.depth, "Depth d (hidden layers + output)")
                ->capture_default_str();
  auto* t = sub->add_option("--target", s.spec.target, "Target y for uniform_growth")
                ->capture_default_str();
  auto* b = sub->add_option("--output-bias", s.output_bias, "Output bias for w_neg variants");
  auto* pol = sub->add_option("--scale-policy", s.policy, "formula or optimized")
                  ->check(CLI::IsMember({"formula", "optimized"}));
  sub->add_option("--spec", s.spec_path, "ConstructionSpec JSON; explicit flags override it")
      ->check(CLI::ExistingFile);
  reg.add(sub, [&s, sub, k, n, d, t, b, pol] {
    ConstructionSpec spec = s.spec;
    if (!s.spec_path.empty()) {
      spec = construction_spec_from_json(read_text_file(s.spec_path));
      if (k->count()) spec.inputs = s.spec.inputs;
      if (n->count()) spec.width = s.spec.width;
      if (d->count()) spec.depth = s.spec.depth;
      if (t->count()) spec.target = s.spec.target;
    }
    if (s.spec_path.empty() || sub->get_option("--kind")->count()) {
      spec.kind = *parse_construction_kind(s.kind);
    }
    if (b->count()) spec.output_bias = s.output_bias;
    if (pol->count()) spec.scale_policy = parse_scale_policy(s.policy);
    const auto net = build(spec);
    return Outcome{{{"network.json", network_to_json(net) + "\n"},
                    {"construction.json", construction_spec_to_json(spec) + "\n"}},
                   {}};
  });
}

void register_criterion(CLI::App& app, State& s, Registry& reg, const std::string& name,
                        const std::string& help) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--network", s.network_path, "Network JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  add_data_options(sub, s.data);
  add_dropout_options(sub, s.dropout);
  reg.add(sub, [&s, name] {
    const auto net = load_network(s.network_path);
    const auto dist = make_distribution(s.data);
    const auto config = make_config(s.dropout, s.globals.threads);
    const auto report = name == "penalty" ? (config.is_exact() ? exact_penalty(net, dist, config)
                                                               : dropout_criterion(net, dist, config))
                                          : dropout_criterion(net, dist, config);
    return Outcome{{{name + ".json", criterion_report_to_json(report) + "\n"}}, seeds_of(config)};
  });
}

void register_psi(CLI::App& app, State& s, Registry& reg) {
  auto* sub = app.add_subcommand("psi", "Average dropout output with exactly l inputs kept");
  sub->add_option("--network", s.network_path, "Network JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* kept = sub->add_option("--kept", s.kept, "Kept input count l (all l when omitted)");
  sub->add_option("--x", s.x, "Input point (all ones when omitted)")->delimiter(',');
  add_dropout_options(sub, s.dropout);
  reg.add(sub, [&s, kept] {
    const auto net = load_network(s.network_path);
    const auto config = make_config(s.dropout, s.globals.threads);
    std::vector<std::size_t> ls;
    if (kept->count()) {
      ls.push_back(s.kept);
    } else {
      ls.resize(net.input_dim() + 1);
      std::iota(ls.begin(), ls.end(), std::size_t{0});
    }
    json values = json::array();
    for (std::size_t l : ls) values.push_back(psi(net, l, config, s.x));
    const json result = {{"kept_inputs", ls},
                         {"psi", values},
                         {"mode", config.is_exact() ? "exact" : "monte-carlo"},
                         {"keep_probability", config.keep_probability}};
    return Outcome{{{"psi.json", dump(result)}}, seeds_of(config)};
  });
}

void register_decompose(CLI::App& app, State& s, Registry& reg) {
  auto* sub = app.add_subcommand(
      "decompose", "Split one example's penalty into E(delta^2) + 2 (W(x) - y) E(delta)");
  sub->add_option("--network", s.network_path, "Network JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--x", s.x, "Input")->required()->delimiter(',');
  sub->add_option("--y", s.y, "Label")->required();
  add_dropout_options(sub, s.dropout);
  reg.add(sub, [&s] {
    const auto net = load_network(s.network_path);
    const auto config = make_config(s.dropout, s.globals.threads);
    const auto dec = penalty_decomposition(net, s.x, s.y, config);
    const json result = {{"e_delta", dec.e_delta},
                         {"e_delta_sq", dec.e_delta_sq},
                         {"penalty", dec.penalty},
                         {"plain_output", dec.plain_output},
                         {"y", s.y}};
    return Outcome{{{"decompose.json", dump(result)}}, {}};
  });
}

void register_closed_forms(CLI::App& app, State& s, Registry& reg) {
  auto* cf = app.add_subcommand("closed-form", "Evaluate a closed-form expression");
  cf->require_subcommand(1);
  auto value_outcome = [](const std::string& name, json inputs, double value) {
    const json result = {{"name", name}, {"inputs", std::move(inputs)}, {"value", value}};
    return Outcome{{{name + ".json", dump(result)}}, {}};
  };
  auto add_knd = [&s](CLI::App* sub) {
    sub->add_option("-K,--inputs", s.k, "Input count K")->required();
    sub->add_option("-n,--width", s.n, "Hidden width n")->required();
    sub->add_option("-d,--depth", s.d, "Depth d")->required();
  };

  auto* wc = cf->add_subcommand("wneg-criterion", "J_D of W_neg on P_((1..1),1)");
  add_knd(wc);
  reg.add(wc, [&s, value_outcome] {
    return value_outcome("wneg-criterion", {{"K", s.k}, {"n", s.n}, {"d", s.d}},
                         wneg_criterion_formula(s.k, s.n, s.d));
  });

  auto* ws = cf->add_subcommand("wneg-scale", "Output weight c of W_neg");
  add_knd(ws);
  reg.add(ws, [&s, value_outcome] {
    return value_outcome("wneg-scale", {{"K", s.k}, {"n", s.n}, {"d", s.d}},
                         wneg_output_scale_formula(s.k, s.n, s.d));
  });

  auto* gm = cf->add_subcommand("growth-moments", "Mean and second moment of the growth network");
  add_knd(gm);
  gm->add_option("--y", s.y, "Target y")->required();
  reg.add(gm, [&s] {
    const auto m = growth_moments(s.k, s.n, s.d, s.y);
    const json result = {{"name", "growth-moments"},
                         {"inputs", {{"K", s.k}, {"n", s.n}, {"d", s.d}, {"y", s.y}}},
                         {"mean", m.mean},
                         {"second_moment", m.second_moment},
                         {"variance", m.variance},
                         {"criterion", m.variance / 2.0}};
    return Outcome{{{"growth-moments.json", dump(result)}}, {}};
  });

  auto* wa = cf->add_subcommand("wd-aversion", "Weight-decay aversion min(1/4, lambda^2 / x.x)");
  wa->add_option("--lambda", s.lambda, "Weight-decay strength")->required();
  wa->add_option("--x", s.x, "Input x")->required()->delimiter(',');
  reg.add(wa, [&s, value_outcome] {
    return value_outcome("wd-aversion", {{"lambda", s.lambda}, {"x", s.x}},
                         weight_decay_aversion(s.lambda, s.x));
  });

  auto* j2 = cf->add_subcommand("j2", "L2 criterion as a function of the activation A");
  auto* act = j2->add_option("--activation", s.activation, "Activation A (optimal when omitted)");
  j2->add_option("--lambda", s.lambda, "Weight-decay strength")->required();
  j2->add_option("--x", s.x, "Input x")->required()->delimiter(',');
  reg.add(j2, [&s, act, value_outcome] {
    const double a = act->count() ? s.activation : optimal_activation(s.lambda, s.x);
    return value_outcome("j2", {{"lambda", s.lambda}, {"x", s.x}, {"activation", a}},
                         j2_of_activation(a, s.lambda, s.x));
  });

  auto* nb = cf->add_subcommand("nonneg-bound", "Lower bound 1/(36K) for non-negative networks");
  nb->add_option("-K,--inputs", s.k, "Input count K")->required();
  reg.add(nb, [&s, value_outcome] {
    return value_outcome("nonneg-bound", {{"K", s.k}}, nonnegative_criterion_bound(s.k));
  });
}

void register_invariance(CLI::App& app, State& s, Registry& reg) {
  auto* sub = app.add_subcommand("invariance-check", "Run the scale-invariance property suite");
  sub->add_option("--cases", s.invariance.cases, "Random networks per identity")
      ->capture_default_str();
  sub->add_option("--property-cases", s.invariance.property_cases, "Probes per inequality")
      ->capture_default_str();
  sub->add_option("--seed", s.invariance.seed, "Seed")->capture_default_str();
  sub->add_option("--p", s.invariance.keep_probability, "Keep probability")->capture_default_str();
  reg.add(sub, [&s] {
    auto options = s.invariance;
    options.threads = s.globals.threads;
    const auto checks = run_invariance_suite(options);
    json arr = json::array();
    bool all = true;
    for (const auto& c : checks) {
      arr.push_back(check_json(c));
      all = all && c.passed;
    }
    const json result = {{"checks", arr}, {"passed", all}};
    return Outcome{{{"invariance.json", dump(result)}}, {options.seed}};
  });
}

void register_wd_optimum(CLI::App& app, State& s, Registry& reg) {
  auto* sub = app.add_subcommand("wd-optimum", "Closed-form L2 optimum (aversion witness) on P_(x,1)");
  sub->add_option("--lambda", s.lambda, "Weight-decay strength")->required();
  sub->add_option("--x", s.x, "Input x")->required()->delimiter(',');
  sub->add_option("--width", s.width, "Hidden width n")->capture_default_str();
  sub->add_option("--split", s.split, "Budget split across nodes: even or single")
      ->check(CLI::IsMember({"even", "single"}))
      ->capture_default_str();
  reg.add(sub, [&s] {
    const auto opt = build_weight_decay_optimum(
        s.lambda, s.x, s.width, s.split == "even" ? BudgetSplit::even : BudgetSplit::single);
    const json result = {{"activation", opt.activation},
                         {"output_bias", opt.output_bias},
                         {"per_node_budget", opt.per_node_budget},
                         {"risk", opt.risk},
                         {"j2", opt.j2_value},
                         {"aversion", weight_decay_aversion(s.lambda, s.x)},
                         {"network", parsed(network_to_json(opt.network))}};
    return Outcome{{{"wd-optimum.json", dump(result)}}, {}};
  });
}

void register_experiments(CLI::App& app, State& s, Registry& reg) {
  auto* neg = app.add_subcommand("train-negweights",
                                 "Negative-weight counts after dropout vs plain training");
  neg->add_option("--reps", s.negweights.reps, "Repetitions")->capture_default_str();
  neg->add_option("--seed", s.negweights.first_seed, "First seed; rep r uses seed + r")
      ->capture_default_str();
  neg->add_option("--iters", s.negweights.max_iters, "SGD steps per training")
      ->capture_default_str();
  neg->add_option("--p", s.negweights.keep_probability, "Keep probability")->capture_default_str();
  neg->add_flag("--paper-scale", s.paper_scale, "Use 1000 repetitions");
  reg.add(neg, [&s] {
    auto options = s.negweights;
    if (s.paper_scale) options.reps = 1000;
    options.threads = s.globals.threads;
    const auto result = experiment_negweights(options);
    const json summary = {{"reps", options.reps},
                          {"first_seed", options.first_seed},
                          {"gt", result.gt},
                          {"lt", result.lt},
                          {"eq", result.eq},
                          {"diverged", result.diverged}};
    std::vector<std::uint64_t> seeds(options.reps);
    std::iota(seeds.begin(), seeds.end(), options.first_seed);
    return Outcome{{{"negweights.csv", negweights_csv(result)},
                    {"negweights-summary.json", dump(summary)}},
                   seeds};
  });

  auto* sc = app.add_subcommand("train-scale", "Training loss versus input scale");
  sc->add_option("--runs", s.scale.runs, "Independent runs")->capture_default_str();
  sc->add_option("--seed", s.scale.seed, "Base seed")->capture_default_str();
  sc->add_option("--iters", s.scale.max_iters, "SGD steps per training")->capture_default_str();
  sc->add_option("--lambda", s.scale.lambda, "Weight-decay strength")->capture_default_str();
  sc->add_option("--p", s.scale.keep_probability, "Keep probability")->capture_default_str();
  sc->add_flag("--paper-scale", s.paper_scale, "Use 10 runs");
  reg.add(sc, [&s] {
    auto options = s.scale;
    if (s.paper_scale) options.runs = 10;
    options.threads = s.globals.threads;
    const auto result = experiment_scale(options);
    return Outcome{{{"scale-summary.csv", scale_summary_csv(result)},
                    {"scale-runs.csv", scale_csv(result)}},
                   {options.seed}};
  });
}

void register_family(CLI::App& app, State& s, Registry& reg) {
  auto* sub = app.add_subcommand(
      "family", "J_D along the layer-rescaling family with factors t and 1/t");
  sub->add_option("--network", s.network_path, "Network JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  add_data_options(sub, s.data);
  add_dropout_options(sub, s.dropout);
  sub->add_option("--t", s.ts, "Family parameters")->delimiter(',')->capture_default_str();
  sub->add_option("--layer-a", s.layer_a, "Layer scaled by t (0-based)")->capture_default_str();
  sub->add_option("--layer-b", s.layer_b, "Layer scaled by 1/t (0-based)")->capture_default_str();
  reg.add(sub, [&s] {
    const auto net = load_network(s.network_path);
    const auto dist = make_distribution(s.data);
    const auto config = make_config(s.dropout, s.globals.threads);
    const auto points = equal_criterion_family(net, dist, s.ts, config, s.layer_a, s.layer_b);
    std::string csv = "t,criterion\n";
    for (const auto& p : points) csv += format_double(p.t) + "," + format_double(p.criterion) + "\n";
    return Outcome{{{"family.csv", csv}}, seeds_of(config)};
  });
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact and Monte Carlo dropout criteria for ReLU networks", "dropnet"};
  app.set_version_flag("--version", DROPNET_VERSION);
  app.set_config("--config", "", "TOML or INI file with option values; flags win");
  app.require_subcommand(1);
  app.fallthrough();

  State s;
  app.add_option("--threads", s.globals.threads, "Worker threads, 0 for all")
      ->envname("DROPNET_THREADS")
      ->capture_default_str();
  app.add_option("--output", s.globals.output_dir,
                 "Write results and a run manifest into this directory");

  Registry reg;
  register_construct(app, s, reg);
  register_criterion(app, s, reg, "criterion", "Risk, dropout criterion and penalty");
  register_criterion(app, s, reg, "penalty", "Dropout penalty J_D - risk");
  register_psi(app, s, reg);
  register_decompose(app, s, reg);
  register_closed_forms(app, s, reg);
  register_invariance(app, s, reg);
  register_wd_optimum(app, s, reg);
  register_experiments(app, s, reg);
  register_family(app, s, reg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (auto& [sub, handler] : reg.handlers) {
      if (sub->parsed()) {
        emit(sub, s.globals, handler(), out);
        return kExitOk;
      }
    }
    err << "error: no command given\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ShapeError& e) {
    err << "shape mismatch: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << "\n";
    return kExitComputation;
  } catch (const DivergenceError& e) {
    err << "training diverged: " << e.what() << "\n";
    return kExitComputation;
  } catch (const std::exception& e) {
    err << "computation error: " << e.what() << "\n";
    return kExitComputation;
  }
}

}  // namespace dropnet::cli
