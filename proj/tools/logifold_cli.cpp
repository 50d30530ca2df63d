#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "logifold/error.hpp"
#include "logifold/io.hpp"

using namespace logifold;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitCap = 3;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> chambers, regions, paths;
  std::string grid;
};

std::vector<double> parse_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') fail(ErrorCode::InvalidArgument, "bad number '" + item + "' in " + what);
    out.push_back(v);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s, const std::string& what) {
  std::vector<std::size_t> out;
  for (double v : parse_numbers(s, what)) {
    if (v < 0 || v != std::floor(v)) fail(ErrorCode::InvalidArgument, what + " takes nonnegative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

io::RunConfig effective_config(const Globals& g) {
  io::RunConfig c;
  if (!g.config.empty()) c = io::config_from_json(io::read_file(g.config), g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.chambers) c.chamber_cap = *g.chambers;
  if (g.regions) c.region_cap = *g.regions;
  if (g.paths) c.path_cap = *g.paths;
  if (!g.grid.empty()) c.grid = parse_numbers(g.grid, "--grid");
  c.check();
  return c;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_file(path, text);
  }
}

TargetPartition parse_partition(const std::string& s) { return io::partition_from_json(s, "partition argument"); }

std::optional<InputBox> parse_box(const std::string& lo, const std::string& hi) {
  if (lo.empty() && hi.empty()) return std::nullopt;
  return InputBox{parse_numbers(lo, "--lo"), parse_numbers(hi, "--hi")};
}

std::string report(const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string out = "{\n";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    out += "  \"" + fields[i].first + "\": " + fields[i].second + (i + 1 < fields.size() ? ",\n" : "\n");
  }
  return out + "}\n";
}

std::string json_string(const std::string& s) { return "\"" + s + "\""; }

// ---- commands ----

struct CompileArgs {
  std::string model, out, activation;
};

int run_compile(const Globals& gl, const CompileArgs& a) {
  const auto cfg = effective_config(gl);
  NetworkSpec net = io::network_from_json(io::read_file(a.model), a.model);
  if (!a.activation.empty()) net.hidden = activation_from_string(a.activation);
  net.final_activation = FinalActivation::IndexMax;
  CompileReport rep;
  const LogicalGraph g = compile_net(net, cfg.caps(), &rep);
  ValidateOptions vo;
  const auto v = validate_graph(g, vo);
  emit(a.out, io::graph_to_json(g));
  std::cerr << "compiled: " << g.vertex_count() << " vertices, " << g.arrow_count() << " arrows, " << v.target_count
            << " targets, " << rep.regions << " regions\n";
  return 0;
}

struct EvalArgs {
  std::string graph, points, out;
};

int run_eval(const Globals& gl, const EvalArgs& a) {
  (void)effective_config(gl);
  const LogicalGraph g = io::graph_from_json(io::read_file(a.graph), a.graph);
  validate_graph(g);
  const auto xs = io::points_from_csv(io::read_file(a.points), a.points);
  std::string out = "instance_id,label\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != g.input_dim()) fail(ErrorCode::DimensionMismatch, "points do not match the graph input dimension");
    out += std::to_string(i) + "," + evaluate(g, xs[i]) + "\n";
  }
  emit(a.out, out);
  return 0;
}

struct EquivArgs {
  std::string model, graph, out, activation;
  std::size_t samples = 10000;
  double box = 2.0;
};

int run_check_equiv(const Globals& gl, const EquivArgs& a) {
  const auto cfg = effective_config(gl);
  NetworkSpec net = io::network_from_json(io::read_file(a.model), a.model);
  if (!a.activation.empty()) net.hidden = activation_from_string(a.activation);
  net.final_activation = FinalActivation::IndexMax;
  const LogicalGraph g = io::graph_from_json(io::read_file(a.graph), a.graph);
  validate_graph(g);
  if (g.input_dim() != net.input_dim) fail(ErrorCode::DimensionMismatch, "model and graph read different dimensions");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-a.box, a.box);
  std::size_t mismatches = 0, ties = 0;
  for (std::size_t k = 0; k < a.samples; ++k) {
    Point x(net.input_dim);
    for (double& v : x) v = u(rng);
    Point z = forward_logits(net, x);
    std::sort(z.begin(), z.end());
    if (z.size() > 1 && z[z.size() - 1] - z[z.size() - 2] <= cfg.tie_margin) {
      ++ties;
      continue;
    }
    if (std::to_string(forward_classical(net, x)) != evaluate(g, x)) ++mismatches;
  }
  emit(a.out, report({{"samples", std::to_string(a.samples)},
                      {"excluded_ties", std::to_string(ties)},
                      {"mismatches", std::to_string(mismatches)},
                      {"config_hash", json_string(io::config_hash(cfg))}}));
  return mismatches == 0 ? 0 : kExitValidation;
}

struct ConvertArgs {
  std::string in, out;
};

int run_to_semilinear(const Globals& gl, const ConvertArgs& a) {
  const auto cfg = effective_config(gl);
  const LogicalGraph g = io::graph_from_json(io::read_file(a.in), a.in);
  validate_graph(g);
  emit(a.out, io::semilinear_to_json(from_llgraph(g, cfg.path_cap)));
  return 0;
}

int run_from_semilinear(const Globals& gl, const ConvertArgs& a) {
  const auto cfg = effective_config(gl);
  const SemilinearFunction f = io::semilinear_from_json(io::read_file(a.in), a.in);
  ToGraphOptions opt;
  opt.chamber_cap = cfg.chamber_cap;
  const LogicalGraph g = to_llgraph(f, opt);
  validate_graph(g);
  emit(a.out, io::graph_to_json(g));
  return 0;
}

struct GridArgs {
  std::string grid, manifest, save_grid;
  std::size_t diagonal = 0;
};

LabeledGrid load_grid(const GridArgs& a) {
  LabeledGrid grid;
  if (a.diagonal > 0) {
    grid = diagonal_grid(a.diagonal);
  } else {
    if (a.grid.empty() || a.manifest.empty()) fail(ErrorCode::InvalidArgument, "give --grid and --manifest, or --diagonal");
    grid = io::grid_from_files(io::read_file(a.grid), io::read_file(a.manifest), a.grid);
  }
  grid.check();
  if (!a.save_grid.empty()) {
    io::write_file(a.save_grid + ".csv", io::grid_to_csv(grid));
    io::write_file(a.save_grid + ".json", io::grid_manifest_json(grid));
  }
  return grid;
}

struct ApproxArgs {
  GridArgs grid;
  double epsilon = -1.0, fraction = 0.1;
  std::size_t budget = 1 << 16;
  std::string out, report_path;
};

int run_approx(const Globals& gl, const ApproxArgs& a) {
  const auto cfg = effective_config(gl);
  const LabeledGrid grid = load_grid(a.grid);
  const double eps = a.epsilon > 0 ? a.epsilon : a.fraction * grid.domain_measure();
  const Approximant ap = approximate(grid, eps, a.budget);
  const MismatchMeasure mm = mismatch_measure(grid, ap.cell_labels);
  emit(a.out, io::semilinear_to_json(ap.function));
  const std::string rep = report({{"domain_measure", io::format_number(grid.domain_measure())},
                                  {"epsilon", io::format_number(eps)},
                                  {"mismatch", io::format_number(ap.mismatch)},
                                  {"budget", std::to_string(ap.budget)},
                                  {"wrong", io::format_number(mm.wrong)},
                                  {"star", io::format_number(mm.star)},
                                  {"config_hash", json_string(io::config_hash(cfg))}});
  if (!a.report_path.empty()) io::write_file(a.report_path, rep);
  std::cerr << "approximant: mismatch " << ap.mismatch << " < epsilon " << eps << ", budget " << ap.budget << "\n";
  return 0;
}

struct ChartsArgs {
  GridArgs grid;
  double fraction = 0.1;
  std::size_t depth = 6;
  std::string out_dir, report_path;
};

int run_charts(const Globals& gl, const ChartsArgs& a) {
  const auto cfg = effective_config(gl);
  const LabeledGrid grid = load_grid(a.grid);
  const ChartFamily family = chart_family(grid, a.fraction * grid.domain_measure(), a.depth);
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    for (std::size_t k = 0; k < family.charts.size(); ++k) {
      io::write_file((std::filesystem::path(a.out_dir) / ("chart_" + std::to_string(k) + ".json")).string(),
                     io::semilinear_to_json(family.charts[k].function));
    }
  }
  std::string residual = "[";
  for (std::size_t k = 0; k < family.residual.size(); ++k) residual += (k ? ", " : "") + io::format_number(family.residual[k]);
  residual += "]";
  emit(a.report_path, report({{"charts", std::to_string(family.charts.size())},
                              {"residual", residual},
                              {"config_hash", json_string(io::config_hash(cfg))}}));
  return 0;
}

struct FuzzyArgs {
  std::string model, out, lo, hi;
};

int run_fuzzy_import(const Globals& gl, const FuzzyArgs& a) {
  const auto cfg = effective_config(gl);
  const NetworkSpec net = io::network_from_json(io::read_file(a.model), a.model);
  const auto box = parse_box(a.lo, a.hi);
  const FuzzyLogicalGraph g = net.hidden == Activation::Relu && net.hidden_count() > 0
                                  ? from_relu_softmax_net(net, cfg.caps(), box)
                                  : from_sigmoid_net(net, box);
  validate_fuzzy(g);
  emit(a.out, io::fuzzy_to_json(g));
  std::cerr << "fuzzy graph: " << g.vertex_count() << " vertices, " << g.arrow_count() << " arrows\n";
  return 0;
}

struct HyperArgs {
  double lr = 0.1, noise = 0.0;
  std::size_t batch = 16, epochs = 100;
};

Hyperparams hyper(const HyperArgs& h, std::uint64_t seed) {
  Hyperparams p;
  p.learning_rate = h.lr;
  p.batch_size = h.batch;
  p.epochs = h.epochs;
  p.noise_std = h.noise;
  p.seed = seed;
  return p;
}

struct TrainArgs {
  std::string data, widths = "2,8,3", hidden = "sigmoid", partition, out, loss;
  double scale = 1.0;
  HyperArgs h;
};

int run_train(const Globals& gl, const TrainArgs& a) {
  const auto cfg = effective_config(gl);
  Dataset d = io::dataset_from_csv(io::read_file(a.data), a.data);
  d.check();
  if (!a.partition.empty()) d = relabel(d, parse_partition(a.partition));
  std::mt19937_64 rng(cfg.seed);
  const NetworkSpec init =
      random_network(parse_sizes(a.widths, "--widths"), activation_from_string(a.hidden), FinalActivation::Softmax, rng, a.scale);
  if (init.input_dim != d.dim()) fail(ErrorCode::DimensionMismatch, "--widths must start with the data dimension");
  const TrainResult r = train_sgd(init, d, hyper(a.h, cfg.seed));
  emit(a.out, io::network_to_json(r.net));
  if (!a.loss.empty()) io::write_file(a.loss, io::loss_to_csv(r.loss));
  const Dataset test = d.subset(Split::Test);
  std::cerr << "loss " << r.loss.front() << " -> " << r.loss.back() << ", test accuracy "
            << accuracy(r.net, test.features, test.labels) << "\n";
  return 0;
}

struct SpecializeArgs {
  std::string model, data, base, target, out, loss;
  HyperArgs h;
};

int run_specialize(const Globals& gl, const SpecializeArgs& a) {
  const auto cfg = effective_config(gl);
  const NetworkSpec net = io::network_from_json(io::read_file(a.model), a.model);
  const Dataset d = io::dataset_from_csv(io::read_file(a.data), a.data);
  const TargetPartition base = parse_partition(a.base), target = parse_partition(a.target);
  const TrainResult r = specialize(net, base, target, d, hyper(a.h, cfg.seed));
  emit(a.out, io::network_to_json(r.net));
  if (!a.loss.empty()) io::write_file(a.loss, io::loss_to_csv(r.loss));
  return 0;
}

struct GenArgs {
  std::string kind = "blobs", out;
  std::size_t dim = 2, classes = 3, size = 300;
  double sigma = 1.0, separation = 4.0;
};

int run_gen_data(const Globals& gl, const GenArgs& a) {
  const auto cfg = effective_config(gl);
  SynthOptions o;
  o.sigma = a.sigma;
  o.separation = a.separation;
  emit(a.out, io::dataset_to_csv(synth_dataset(synth_kind_from_string(a.kind), a.dim, a.classes, a.size, cfg.seed, o)));
  return 0;
}

struct EnsembleArgs {
  std::string charts, data, calibration, out, split = "test", predictions;
  double epsilon = 0.0;
};

struct Loaded {
  std::vector<ModelChart> charts;
  TargetGraph graph;
  Dataset data;
};

Loaded load_ensemble(const EnsembleArgs& a, bool need_data) {
  Loaded l;
  l.charts = io::load_charts(a.charts);
  std::vector<int> classes;
  for (const auto& c : l.charts) {
    for (int k : c.flattening()) classes.push_back(k);
  }
  if (need_data) {
    l.data = io::dataset_from_csv(io::read_file(a.data), a.data);
    l.data.check();
    for (const auto& c : l.charts) c.check(l.data.dim());
    classes.insert(classes.end(), l.data.labels.begin(), l.data.labels.end());
  }
  l.graph = build_target_graph(partitions_of(l.charts), classes);
  return l;
}

void save_predictions(const std::string& dir, const std::vector<ModelChart>& charts, const PredictionTable& t) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < charts.size(); ++i) {
    io::write_file((std::filesystem::path(dir) / (charts[i].id + ".csv")).string(), io::predictions_to_csv(t[i]));
  }
}

std::vector<std::string> chart_ids(const std::vector<ModelChart>& charts) {
  std::vector<std::string> ids;
  for (const auto& c : charts) ids.push_back(c.id);
  return ids;
}

int run_target_graph(const Globals& gl, const EnsembleArgs& a) {
  (void)effective_config(gl);
  const Loaded l = load_ensemble(a, false);
  emit(a.out, io::target_graph_to_json(l.graph));
  return 0;
}

int run_calibrate(const Globals& gl, const EnsembleArgs& a) {
  const auto cfg = effective_config(gl);
  const Loaded l = load_ensemble(a, true);
  const Dataset val = l.data.subset(Split::Val);
  const PredictionTable t = predict_all(l.charts, val.features);
  save_predictions(a.predictions, l.charts, t);
  VoteOptions vo;
  vo.epsilon = a.epsilon;
  const Calibration cal = calibrate(l.graph, t, val.labels, cfg.grid, vo);
  emit(a.out, io::calibration_to_json(cal, l.graph, chart_ids(l.charts), io::config_hash(cfg)));
  return 0;
}

Calibration load_calibration(const std::string& path, const Loaded& l) {
  Calibration cal = io::calibration_from_json(io::read_file(path), path);
  if (cal.curves.size() != l.charts.size()) fail(ErrorCode::MalformedFile, path + ": calibration is for a different chart list");
  for (const auto& ch : cal.choices) {
    for (std::size_t n : ch.path) {
      if (n >= l.graph.nodes.size()) fail(ErrorCode::MalformedFile, path + ": path leaves the target graph");
    }
  }
  return cal;
}

int run_vote(const Globals& gl, const EnsembleArgs& a) {
  const auto cfg = effective_config(gl);
  Loaded l = load_ensemble(a, true);
  const Calibration cal = load_calibration(a.calibration, l);
  const Dataset part = l.data.subset(split_from_string(a.split));
  const PredictionTable t = predict_all(l.charts, part.features);
  save_predictions(a.predictions, l.charts, t);
  std::vector<io::VoteRecord> recs;
  for (std::size_t k = 0; k < part.size(); ++k) {
    const auto outs = instance_outputs(t, k);
    recs.push_back({k, vote_with_validation_history(l.graph, cal, outs), part.labels[k], simple_average_prediction(l.graph, outs)});
  }
  emit(a.out, io::vote_report_to_json(recs, io::config_hash(cfg)));
  return 0;
}

int run_report(const Globals& gl, const EnsembleArgs& a) {
  const auto cfg = effective_config(gl);
  Loaded l = load_ensemble(a, true);
  const Calibration cal = load_calibration(a.calibration, l);
  const Dataset part = l.data.subset(split_from_string(a.split));
  const PredictionTable t = predict_all(l.charts, part.features);
  std::size_t hist = 0, avg = 0;
  std::vector<std::size_t> single(l.charts.size(), 0), covered(l.charts.size(), 0);
  for (std::size_t k = 0; k < part.size(); ++k) {
    const auto outs = instance_outputs(t, k);
    hist += vote_with_validation_history(l.graph, cal, outs).prediction == part.labels[k];
    avg += simple_average_prediction(l.graph, outs) == part.labels[k];
    for (std::size_t i = 0; i < l.charts.size(); ++i) {
      const int b = l.charts[i].partition.block_of(part.labels[k]);
      if (b < 0) continue;
      ++covered[i];
      single[i] += static_cast<int>(argmax(outs[i])) == b;
    }
  }
  const double n = part.size() ? static_cast<double>(part.size()) : 1.0;
  std::string charts = "[";
  for (std::size_t i = 0; i < l.charts.size(); ++i) {
    const double acc = covered[i] ? static_cast<double>(single[i]) / static_cast<double>(covered[i]) : 0.0;
    charts += std::string(i ? ", " : "") + "{\"id\": " + json_string(l.charts[i].id) + ", \"partition\": " +
              json_string(l.charts[i].partition.str()) + ", \"block_accuracy\": " + io::format_number(acc) + "}";
  }
  charts += "]";
  emit(a.out, report({{"instances", std::to_string(part.size())},
                      {"history_accuracy", io::format_number(static_cast<double>(hist) / n)},
                      {"simple_average_accuracy", io::format_number(static_cast<double>(avg) / n)},
                      {"charts", charts},
                      {"config_hash", json_string(io::config_hash(cfg))}}));
  return 0;
}

int exit_code(const Error& e) {
  if (e.code() == ErrorCode::MalformedFile) return kExitData;
  if (e.code() == ErrorCode::InvalidArgument) return kExitUsage;
  if (is_cap_error(e.code())) return kExitCap;
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logifold: linear logical graphs, fuzzy graphs and ensemble voting"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals gl;
  app.add_option("--config", gl.config, "run configuration (JSON)");
  app.add_option("--seed", gl.seed, "random seed");
  app.add_option("--caps.chambers", gl.chambers, "chamber cap per guard");
  app.add_option("--caps.regions", gl.regions, "region cap");
  app.add_option("--caps.paths", gl.paths, "path cap");
  app.add_option("--grid", gl.grid, "threshold grid, comma separated");

  std::function<int()> action;

  CompileArgs ca;
  auto* compile = app.add_subcommand("compile", "model -> linear logical graph");
  compile->add_option("--model", ca.model)->required();
  compile->add_option("--activation", ca.activation)->check(CLI::IsMember({"step", "relu"}));
  compile->add_option("--out", ca.out);
  compile->callback([&] { action = [&] { return run_compile(gl, ca); }; });

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "graph + points -> labels");
  eval->add_option("--graph", ea.graph)->required();
  eval->add_option("--points", ea.points)->required();
  eval->add_option("--out", ea.out);
  eval->callback([&] { action = [&] { return run_eval(gl, ea); }; });

  EquivArgs qa;
  auto* equiv = app.add_subcommand("check-equiv", "sample a model against its graph");
  equiv->add_option("--model", qa.model)->required();
  equiv->add_option("--graph", qa.graph)->required();
  equiv->add_option("--activation", qa.activation)->check(CLI::IsMember({"step", "relu"}));
  equiv->add_option("--samples", qa.samples);
  equiv->add_option("--box", qa.box, "sample in [-box, box]^n");
  equiv->add_option("--out", qa.out);
  equiv->callback([&] { action = [&] { return run_check_equiv(gl, qa); }; });

  ConvertArgs ts, fs;
  auto* to_sl = app.add_subcommand("to-semilinear", "graph -> semilinear function");
  to_sl->add_option("--graph", ts.in)->required();
  to_sl->add_option("--out", ts.out);
  to_sl->callback([&] { action = [&] { return run_to_semilinear(gl, ts); }; });
  auto* from_sl = app.add_subcommand("from-semilinear", "semilinear function -> graph");
  from_sl->add_option("--semilinear", fs.in)->required();
  from_sl->add_option("--out", fs.out);
  from_sl->callback([&] { action = [&] { return run_from_semilinear(gl, fs); }; });

  auto grid_options = [](CLI::App* sub, GridArgs& g) {
    sub->add_option("--cells", g.grid, "grid CSV");
    sub->add_option("--manifest", g.manifest, "grid box and resolution (JSON)");
    sub->add_option("--diagonal", g.diagonal, "use the diagonal grid of this resolution");
    sub->add_option("--save-grid", g.save_grid, "write the grid as PREFIX.csv and PREFIX.json");
  };

  ApproxArgs aa;
  auto* approx = app.add_subcommand("approx", "grid + epsilon -> approximant");
  grid_options(approx, aa.grid);
  approx->add_option("--epsilon", aa.epsilon, "absolute epsilon");
  approx->add_option("--fraction", aa.fraction, "epsilon as a fraction of the domain measure");
  approx->add_option("--budget", aa.budget, "largest rectangle budget");
  approx->add_option("--out", aa.out);
  approx->add_option("--report", aa.report_path);
  approx->callback([&] { action = [&] { return run_approx(gl, aa); }; });

  ChartsArgs cha;
  auto* charts = app.add_subcommand("charts", "chart family of approximants");
  grid_options(charts, cha.grid);
  charts->add_option("--fraction", cha.fraction, "first epsilon as a fraction of the domain measure");
  charts->add_option("--depth", cha.depth);
  charts->add_option("--out-dir", cha.out_dir);
  charts->add_option("--report", cha.report_path);
  charts->callback([&] { action = [&] { return run_charts(gl, cha); }; });

  FuzzyArgs fa;
  auto* fuzzy = app.add_subcommand("fuzzy-import", "sigmoid or relu/softmax model -> fuzzy graph");
  fuzzy->add_option("--model", fa.model)->required();
  fuzzy->add_option("--lo", fa.lo, "input box lower corner");
  fuzzy->add_option("--hi", fa.hi, "input box upper corner");
  fuzzy->add_option("--out", fa.out);
  fuzzy->callback([&] { action = [&] { return run_fuzzy_import(gl, fa); }; });

  auto hyper_options = [](CLI::App* sub, HyperArgs& h) {
    sub->add_option("--lr", h.lr);
    sub->add_option("--batch", h.batch);
    sub->add_option("--epochs", h.epochs);
    sub->add_option("--noise", h.noise);
  };

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "SGD on a dataset");
  train->add_option("--data", ta.data)->required();
  train->add_option("--widths", ta.widths, "layer widths, input first");
  train->add_option("--hidden", ta.hidden)->check(CLI::IsMember({"relu", "sigmoid"}));
  train->add_option("--partition", ta.partition, "train on blocks, e.g. [[0,1],[2]]");
  train->add_option("--init-scale", ta.scale);
  hyper_options(train, ta.h);
  train->add_option("--out", ta.out);
  train->add_option("--loss", ta.loss, "loss trace CSV");
  train->callback([&] { action = [&] { return run_train(gl, ta); }; });

  SpecializeArgs sa;
  auto* spec = app.add_subcommand("specialize", "append and train a head for a coarser target");
  spec->add_option("--model", sa.model)->required();
  spec->add_option("--data", sa.data)->required();
  spec->add_option("--base", sa.base, "partition of the model output")->required();
  spec->add_option("--target", sa.target, "new partition")->required();
  hyper_options(spec, sa.h);
  spec->add_option("--out", sa.out);
  spec->add_option("--loss", sa.loss);
  spec->callback([&] { action = [&] { return run_specialize(gl, sa); }; });

  GenArgs ga;
  auto* gen = app.add_subcommand("gen-data", "synthetic dataset");
  gen->add_option("--kind", ga.kind)->check(CLI::IsMember({"blobs", "grid_diagonal", "rings"}));
  gen->add_option("--dim", ga.dim);
  gen->add_option("--classes", ga.classes);
  gen->add_option("--size", ga.size);
  gen->add_option("--sigma", ga.sigma);
  gen->add_option("--separation", ga.separation);
  gen->add_option("--out", ga.out);
  gen->callback([&] { action = [&] { return run_gen_data(gl, ga); }; });

  EnsembleArgs ens;
  auto* ensemble = app.add_subcommand("ensemble", "target graph, calibration and voting");
  ensemble->require_subcommand(1);
  auto* calib = ensemble->add_subcommand("calibrate", "accuracy curves and per-class (path, threshold) on the val split");
  auto* tgraph = ensemble->add_subcommand("target-graph", "target graph of a chart list");
  auto* vote = ensemble->add_subcommand("vote", "validation-history vote on a split");
  auto* rep = ensemble->add_subcommand("report", "accuracy summary on a split");
  for (auto* sub : {calib, tgraph, vote, rep}) {
    sub->add_option("--charts", ens.charts, "chart list (JSON)")->required();
    sub->add_option("--out", ens.out);
  }
  for (auto* sub : {calib, vote, rep}) sub->add_option("--data", ens.data)->required();
  for (auto* sub : {vote, rep}) {
    sub->add_option("--calibration", ens.calibration)->required();
    sub->add_option("--split", ens.split)->check(CLI::IsMember({"train", "val", "test"}));
  }
  for (auto* sub : {calib, vote}) sub->add_option("--predictions", ens.predictions, "directory for per-chart prediction CSVs");
  calib->add_option("--epsilon", ens.epsilon, "weight of uncertain models");
  calib->callback([&] { action = [&] { return run_calibrate(gl, ens); }; });
  tgraph->callback([&] { action = [&] { return run_target_graph(gl, ens); }; });
  vote->callback([&] { action = [&] { return run_vote(gl, ens); }; });
  rep->callback([&] { action = [&] { return run_report(gl, ens); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  try {
    return action ? action() : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
