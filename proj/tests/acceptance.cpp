// One line per acceptance criterion; exit status 1 when any fails.
#define DOCTEST_CONFIG_DISABLE
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "logifold/algebra.hpp"
#include "logifold/compile.hpp"
#include "logifold/ensemble.hpp"
#include "logifold/fuzzy.hpp"
#include "logifold/semilinear.hpp"
#include "logifold/uat.hpp"
#include "support.hpp"

using namespace logifold;
using namespace testing_support;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct CompiledCase {
  NetworkSpec net;
  LogicalGraph graph;
  bool relu = false;
};

struct CompiledPool {
  std::vector<CompiledCase> cases;
  double seconds = 0;
};

// 50 step and 50 ReLU classifiers, n <= 3, hidden width <= 4, 1..3 hidden layers.
const CompiledPool& compiled_pool() {
  static const CompiledPool pool = [] {
    const auto t0 = Clock::now();
    CompiledPool p;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> dim(1, 3), depth(1, 3);
    for (int k = 0; k < 100; ++k) {
      const bool relu = k >= 50;
      const NetworkSpec net = random_classifier(rng, dim(rng), 4, depth(rng), relu ? Activation::Relu : Activation::Step);
      LogicalGraph g = relu ? compile_relu_net(net) : compile_step_net(net);
      p.cases.push_back({net, std::move(g), relu});
    }
    p.seconds = seconds_since(t0);
    return p;
  }();
  return pool;
}

Outcome compiler_fidelity() {
  const auto t0 = Clock::now();
  const CompiledPool& pool = compiled_pool();
  std::mt19937_64 rng(1);
  std::size_t step_bad = 0, relu_bad = 0, skipped = 0;
  for (const auto& c : pool.cases) {
    validate_graph(c.graph);
    const std::size_t n = c.net.input_dim;
    for (int i = 0; i < 10000; ++i) {
      const Point x = uniform_point(rng, n, -3, 3);
      if (c.relu && logit_margin(c.net, x) <= 1e-9) {
        ++skipped;
        continue;
      }
      const bool bad = evaluate(c.graph, x) != std::to_string(forward_classical(c.net, x));
      (c.relu ? relu_bad : step_bad) += bad;
    }
  }
  const double t = seconds_since(t0);
  std::ostringstream os;
  os << "step mismatches " << step_bad << ", relu mismatches " << relu_bad << " (" << skipped << " ties skipped), "
     << t << " s";
  return {step_bad == 0 && relu_bad == 0 && t < 60, os.str()};
}

Outcome path_sum_oracle() {
  std::mt19937_64 rng(2);
  std::size_t bad = 0, evaluations = 0;
  for (const auto& c : compiled_pool().cases) {
    const auto paths = enumerate_paths(c.graph);
    for (int i = 0; i < 1000; ++i) {
      const Point x = uniform_point(rng, c.net.input_dim, -3, 3);
      const auto r = evaluate_pathsum(c.graph, paths, x);
      bad += r.nonzero_terms != 1 || r.label != evaluate(c.graph, x);
      ++evaluations;
    }
  }
  std::ostringstream os;
  os << bad << " failures over " << evaluations << " evaluations on " << compiled_pool().cases.size() << " graphs";
  return {bad == 0, os.str()};
}

BasicSemilinearSet random_system(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> rows(3, 6), kind(0, 5), coef(-2, 2);
  BasicSemilinearSet b;
  b.dim = 3;
  for (int k = rows(rng); k > 0; --k) {
    LinearRow r;
    for (int i = 0; i < 3; ++i) r.a.push_back(coef(rng));
    r.b = coef(rng);
    const int t = kind(rng);
    (t == 0 ? b.eq : t < 3 ? b.ge : b.gt).push_back(r);
  }
  return b;
}

Outcome semilinear_round_trips() {
  std::mt19937_64 rng(3);
  std::size_t forward_bad = 0, reverse_bad = 0, cases = 0, large = 0;
  for (const auto& c : compiled_pool().cases) {
    const LogicalGraph& g = c.graph;
    const std::size_t n = c.net.input_dim;
    const SemilinearFunction f = from_llgraph(g);
    std::size_t pieces = 0;
    for (const auto& fiber : f.fibers) pieces += fiber.second.pieces.size();
    // the single-guard graph over many rows costs one exact test per chamber
    if (pieces > 20) {
      ++large;
      continue;
    }
    const LogicalGraph back = to_llgraph(f);
    const SemilinearFunction f2 = from_llgraph(back);
    for (int i = 0; i < 10000; ++i) {
      const Point x = uniform_point(rng, n, -3, 3);
      forward_bad += evaluate(back, x) != evaluate(g, x);
      reverse_bad += label_of(f2, x) != label_of(f, x);
    }
    ++cases;
  }
  std::size_t empty = 0, nonempty = 0, unproven = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const BasicSemilinearSet b = random_system(rng);
    const EmptinessCheck v = check_emptiness(b, true);
    if (v.empty) {
      ++empty;
      unproven += !v.certificate || !verify_certificate(b.constraints(), *v.certificate);
    } else {
      ++nonempty;
      unproven += !contains_exact(b, v.witness);
    }
  }
  std::ostringstream os;
  os << cases << " cases (" << large << " with over 20 pieces left out), graph round trip mismatches " << forward_bad << ", function round trip mismatches "
     << reverse_bad << "; " << empty << " empty and " << nonempty << " nonempty systems, " << unproven << " unproven";
  return {forward_bad == 0 && reverse_bad == 0 && unproven == 0, os.str()};
}

Outcome ring_laws() {
  std::mt19937_64 rng(4);
  auto f2 = [&] { return compile_step_net(random_network({2, 3, 2}, Activation::Step, FinalActivation::IndexMax, rng)); };
  const LogicalGraph a = f2(), b = f2(), c = f2();
  const LogicalGraph one = constant_graph(2, "1"), zero = constant_graph(2, "0");
  auto add = [](const LogicalGraph& x, const LogicalGraph& y) { return boolean_combine(x, y, F2Op::Add); };
  auto mul = [](const LogicalGraph& x, const LogicalGraph& y) { return boolean_combine(x, y, F2Op::Mul); };
  const std::vector<std::pair<LogicalGraph, LogicalGraph>> laws{
      {add(a, b), add(b, a)},
      {mul(a, b), mul(b, a)},
      {add(add(a, b), c), add(a, add(b, c))},
      {mul(mul(a, b), c), mul(a, mul(b, c))},
      {mul(a, add(b, c)), add(mul(a, b), mul(a, c))},
      {add(a, zero), a},
      {mul(a, one), a},
      {add(a, a), zero},
      {mul(a, a), a},
  };
  std::size_t f2_bad = 0;
  for (const auto& [lhs, rhs] : laws) {
    for (int i = 0; i < 1000; ++i) {
      const Point x = uniform_point(rng, 2, -2, 2);
      f2_bad += evaluate(lhs, x) != evaluate(rhs, x);
    }
  }

  const InputBox box{{-2, -2}, {2, 2}};
  auto fz = [&] { return from_sigmoid_net(random_network({2, 3, 1}, Activation::Sigmoid, FinalActivation::Softmax, rng), box); };
  const FuzzyLogicalGraph p = fz(), q = fz(), r = fz();
  auto u = [](const FuzzyLogicalGraph& x, const FuzzyLogicalGraph& y) { return fuzzy_union(x, y); };
  auto n = [](const FuzzyLogicalGraph& x, const FuzzyLogicalGraph& y) { return fuzzy_intersection(x, y); };
  const std::vector<std::pair<FuzzyLogicalGraph, FuzzyLogicalGraph>> fuzzy_laws{
      {u(p, q), u(q, p)},
      {n(p, q), n(q, p)},
      {u(u(p, q), r), u(p, u(q, r))},
      {n(n(p, q), r), n(p, n(q, r))},
      {n(p, u(q, r)), u(n(p, q), n(p, r))},
      {u(p, n(q, r)), n(u(p, q), u(p, r))},
      {u(p, n(p, q)), p},
      {u(p, p), p},
  };
  double worst = 0;
  for (const auto& [lhs, rhs] : fuzzy_laws) {
    for (int i = 0; i < 1000; ++i) {
      const Point x = uniform_point(rng, 2, -2, 2);
      worst = std::max(worst, std::abs(scalar_value(evaluate_fuzzy(lhs, x)) - scalar_value(evaluate_fuzzy(rhs, x))));
    }
  }
  std::ostringstream os;
  os << laws.size() << " F2 laws with " << f2_bad << " mismatches; " << fuzzy_laws.size()
     << " fuzzy laws, worst deviation " << worst;
  return {f2_bad == 0 && worst <= 1e-9, os.str()};
}

Outcome grid_approximation() {
  const LabeledGrid g = diagonal_grid(32);
  const double eps = 0.1 * g.domain_measure();
  const Approximant a = approximate(g, eps);
  std::size_t wrong = 0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) wrong += a.cell_labels[c] >= 0 && a.cell_labels[c] != g.labels[c];
  const MismatchMeasure mm = mismatch_measure(g, a.function);
  const ChartFamily family = chart_family(g, 0.25 * g.domain_measure(), 6);
  std::ostringstream os;
  os << "mismatch " << a.mismatch << " < " << eps << ", " << wrong << " wrong labeled cells, remeasured wrong "
     << mm.wrong << ", chart residual after " << family.residual.size() << " rounds " << family.residual.back();
  return {a.mismatch < eps && wrong == 0 && mm.wrong == 0 && family.residual.size() <= 6 && family.residual.back() == 0,
          os.str()};
}

double max_diff(const Point& a, const Point& b) {
  if (a.size() != b.size()) return 1e300;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Outcome fuzzy_import() {
  std::mt19937_64 rng(6);
  const InputBox box{{-2, -2}, {2, 2}};
  double worst = 0;
  std::size_t label_bad = 0, compared = 0;
  const std::vector<std::vector<std::size_t>> shapes{{2, 4, 3}, {2, 3, 3, 2}, {2, 4, 1}, {2, 2, 4, 3}};
  for (const auto& widths : shapes) {
    const NetworkSpec sig = random_network(widths, Activation::Sigmoid, FinalActivation::Softmax, rng);
    const FuzzyLogicalGraph gs = from_sigmoid_net(sig, box);
    for (int i = 0; i < 1000; ++i) {
      const Point x = uniform_point(rng, 2, -2, 2);
      worst = std::max(worst, max_diff(evaluate_fuzzy(gs, x).state, forward_probabilities(sig, x)));
    }
    if (widths.back() < 2) continue;
    const NetworkSpec relu = random_network(widths, Activation::Relu, FinalActivation::Softmax, rng);
    const FuzzyLogicalGraph gr = from_relu_softmax_net(relu, {}, box);
    NetworkSpec classical = relu;
    classical.final_activation = FinalActivation::IndexMax;
    const LogicalGraph lg = compile_relu_net(classical);
    for (int i = 0; i < 1000; ++i) {
      const Point x = uniform_point(rng, 2, -2, 2);
      const Point p = evaluate_fuzzy(gr, x).state;
      worst = std::max(worst, max_diff(p, forward_probabilities(relu, x)));
      if (logit_margin(relu, x) <= 1e-9) continue;
      ++compared;
      label_bad += std::to_string(argmax(p)) != evaluate(lg, x);
    }
  }
  std::ostringstream os;
  os << "worst deviation " << worst << ", argmax disagreements " << label_bad << " of " << compared;
  return {worst <= 1e-9 && label_bad == 0, os.str()};
}

Outcome worked_vote() {
  const TargetPartition t1{{{1, 2, 3}, {4, 5}}}, t2{{{1, 2}, {3, 4}, {5}}};
  const TargetGraph g = build_target_graph({t1, t1, t2, TargetPartition{{{1}, {2}}}}, {1, 2, 3, 4, 5});
  const NodeAnswer a = vote_at_node(g.nodes.front(), {{0.8, 0.2}, {0.4, 0.6}, {0.5, 0.3, 0.2}, {0.5, 0.5}}, {1, 1, 1, 1}, 0);
  const Point expect{0.416667, 0.21, 0.20, 0.173333};
  double worst = a.values.size() == 4 ? 0 : 1e300;
  for (std::size_t i = 0; i < 4 && i < a.values.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - expect[i]));
  const double sum = std::accumulate(a.values.begin(), a.values.end(), 0.0);
  // the closed form as printed, with b1 + b2 in place of b2 + b3 in the second entry
  const double a1 = 0.6, a2 = 0.4, b1 = 0.5, b2 = 0.3, b3 = 0.2, p1 = 2.0 / 3, p2 = 1.0 / 3;
  const Point printed{a1 * b1 + a1 * b1 * b3 * p1 / (b1 + b2) + a2 * b1 * p2, a1 * b2 + a1 * b2 * b3 * p1 / (b2 + b3),
                      a2 * b2 + a2 * b1 * b2 * p1 / (b2 + b3), a2 * b3 + a1 * b3 * p2 + a2 * b1 * b3 * p1 / (b2 + b3)};
  const bool differs = a.values.size() == 4 && std::abs(printed[1] - a.values[1]) > 1e-3;
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << "values (" << (a.values.size() == 4 ? a.values[0] : 0) << ", " << a.values.at(1) << ", "
     << a.values.at(2) << ", " << a.values.at(3) << "), |sum - 1| = " << std::scientific << std::abs(sum - 1)
     << ", printed second entry " << std::fixed << printed[1];
  return {worst <= 1e-6 && std::abs(sum - 1) <= 1e-12 && differs, os.str()};
}

struct Fixture {
  Dataset data;
  std::vector<ModelChart> charts;
  TargetGraph graph;
  Calibration calibration;
  double build_seconds = 0;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    const auto t0 = Clock::now();
    Fixture fx;
    SynthOptions so;
    so.separation = 2.0;
    fx.data = synth_dataset(SynthKind::Blobs, 2, 3, 600, 7, so);
    std::mt19937_64 rng(7);
    Hyperparams h;
    h.learning_rate = 0.5;
    h.epochs = 60;
    h.seed = 7;
    const TargetPartition fine = TargetPartition::fine(3), pair{{{0}, {1}}}, thick{{{0, 1}, {2}}};
    const NetworkSpec gen =
        train_sgd(random_network({2, 8, 3}, Activation::Sigmoid, FinalActivation::Softmax, rng), fx.data, h).net;
    const NetworkSpec spec = specialize(gen, fine, pair, fx.data, h).net;
    const NetworkSpec thick_net =
        train_sgd(random_network({2, 8, 2}, Activation::Sigmoid, FinalActivation::Softmax, rng), relabel(fx.data, thick), h)
            .net;
    fx.charts = {{"generalist", gen, Embedding::identity(), fine},
                 {"specialist", spec, Embedding::identity(), pair},
                 {"thick", thick_net, Embedding::identity(), thick}};
    fx.graph = build_target_graph(partitions_of(fx.charts), {0, 1, 2});
    const Dataset val = fx.data.subset(Split::Val);
    fx.calibration = calibrate(fx.graph, predict_all(fx.charts, val.features), val.labels);
    fx.build_seconds = seconds_since(t0);
    return fx;
  }();
  return f;
}

Outcome ensemble_conservation() {
  const Fixture& fx = fixture();
  const Dataset val = fx.data.subset(Split::Val);
  std::vector<double> grid;
  for (int k = 0; k < 20; ++k) grid.push_back(k / 20.0);
  std::size_t nesting_bad = 0;
  for (const auto& chart : fx.charts) {
    std::vector<Point> outs;
    std::vector<int> labels;
    for (std::size_t i = 0; i < val.size(); ++i) {
      if (chart.partition.block_of(val.labels[i]) < 0) continue;
      outs.push_back(chart.predict(val.features[i]));
      labels.push_back(val.labels[i]);
    }
    std::vector<std::size_t> prev;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto cur = fuzzy_accuracy(chart.partition, outs, labels, grid[k]).certain;
      if (k > 0) nesting_bad += !std::includes(prev.begin(), prev.end(), cur.begin(), cur.end());
      prev = cur;
    }
  }

  std::mt19937_64 rng(8);
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> w(0.05, 1.0), alpha(0.0, 0.6);
  auto simplex = [&](std::size_t k) {
    Point p(k);
    double s = 0;
    for (double& v : p) s += (v = e(rng) + 1e-3);
    for (double& v : p) v /= s;
    return p;
  };
  const TargetPartition t1{{{1, 2, 3}, {4, 5}}}, t2{{{1, 2}, {3, 4}, {5}}};
  const TargetGraph g = build_target_graph({t1, t1, t2, TargetPartition{{{1}, {2}}}}, {1, 2, 3, 4, 5});
  double worst = 0;
  std::size_t counted = 0, excluded = 0, unit = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::vector<Point> outs{simplex(2), simplex(2), simplex(3), simplex(2)};
    const std::vector<double> phi{w(rng), w(rng), w(rng), w(rng)};
    const double a = alpha(rng);
    const auto answers = node_answers(g, outs, phi, a);
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
      const NodeAnswer& n = answers[v];
      if (n.beta_fallback || n.silent) {
        ++excluded;
        continue;
      }
      // sum over all combinations of the group products, one factor per group
      double mass = 1.0;
      for (const auto& members : g.nodes[v].groups) {
        std::vector<Point> group_outs;
        std::vector<double> group_phi;
        for (std::size_t i : members) {
          group_outs.push_back(outs[i]);
          group_phi.push_back(phi[i]);
        }
        const Point p = vote_shared_targets(group_outs, group_phi, a).p;
        mass *= std::accumulate(p.begin(), p.end(), 0.0);
      }
      ++counted;
      unit += mass == 1.0 || std::abs(mass - 1.0) <= 1e-12;
      worst = std::max(worst, std::abs(std::accumulate(n.values.begin(), n.values.end(), 0.0) - mass));
    }
  }
  std::ostringstream os;
  os << nesting_bad << " nesting violations over " << fx.charts.size() << " charts; " << counted
     << " node answers (" << unit << " of unit mass), worst deviation from the combined mass " << worst << " (" << excluded
     << " fallback or silent)";
  return {nesting_bad == 0 && unit > 0 && worst <= 1e-12, os.str()};
}

Outcome end_to_end() {
  const auto t0 = Clock::now();
  const Fixture& fx = fixture();
  const Dataset test = fx.data.subset(Split::Test);
  const PredictionTable table = predict_all(fx.charts, test.features);
  std::size_t hist = 0, avg = 0, gen = 0;
  for (std::size_t k = 0; k < test.size(); ++k) {
    const auto outs = instance_outputs(table, k);
    hist += vote_with_validation_history(fx.graph, fx.calibration, outs).prediction == test.labels[k];
    avg += simple_average_prediction(fx.graph, outs) == test.labels[k];
    gen += chart_prediction(fx.charts[0].partition, outs[0]) == test.labels[k];
  }
  const double n = static_cast<double>(test.size());
  const double h = hist / n, a = avg / n, best = gen / n;
  const double t = fx.build_seconds + seconds_since(t0);
  std::ostringstream os;
  os << "history " << h << ", simple average " << a << ", best single chart " << best << " on " << test.size()
     << " test instances, " << t << " s";
  return {h >= a && h >= best - 0.02 && t < 120, os.str()};
}

Outcome gradient() {
  std::mt19937_64 rng(10);
  const Dataset d = synth_dataset(SynthKind::Blobs, 2, 3, 60, 10);
  const NetworkSpec net = random_network({2, 8, 3}, Activation::Sigmoid, FinalActivation::Softmax, rng);
  const GradientCheck gc = gradient_check(net, d.features, d.labels, rng, 10);
  std::ostringstream os;
  os << "worst relative error " << gc.worst_relative << " on " << gc.coordinates << " coordinates";
  return {gc.worst_relative <= 1e-6 && gc.coordinates == 10, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"compiler fidelity", compiler_fidelity},
      {"path sum oracle", path_sum_oracle},
      {"semilinear round trips and emptiness proofs", semilinear_round_trips},
      {"boolean ring and fuzzy semiring laws", ring_laws},
      {"32x32 diagonal grid approximation", grid_approximation},
      {"fuzzy import fidelity", fuzzy_import},
      {"worked voting example", worked_vote},
      {"certain part nesting and node mass conservation", ensemble_conservation},
      {"end to end three chart ensemble", end_to_end},
      {"trainer gradient check", gradient},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures ? 1 : 0;
}
