#include "logifold/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "logifold/error.hpp"

namespace logifold {

namespace {

bool contains(const std::vector<int>& sorted, int c) { return std::binary_search(sorted.begin(), sorted.end(), c); }

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::size_t class_index(const TargetGraph& g, int c) {
  auto it = std::lower_bound(g.classes.begin(), g.classes.end(), c);
  if (it == g.classes.end() || *it != c) fail(ErrorCode::InvalidArgument, "class " + std::to_string(c) + " is not a class of the target graph");
  return static_cast<std::size_t>(it - g.classes.begin());
}

}  // namespace

// ---- charts ----

std::string_view to_string(EmbeddingKind k) {
  switch (k) {
    case EmbeddingKind::Identity: return "identity";
    case EmbeddingKind::CoordinateSubset: return "subset";
    case EmbeddingKind::Resample: return "resample";
  }
  return "identity";
}

EmbeddingKind embedding_kind_from_string(std::string_view s) {
  if (s == "identity") return EmbeddingKind::Identity;
  if (s == "subset") return EmbeddingKind::CoordinateSubset;
  if (s == "resample") return EmbeddingKind::Resample;
  fail(ErrorCode::InvalidArgument, "unknown embedding '" + std::string(s) + "'");
}

Embedding Embedding::subset(std::vector<std::size_t> indices) {
  Embedding e;
  e.kind = EmbeddingKind::CoordinateSubset;
  e.indices = std::move(indices);
  return e;
}

Embedding Embedding::resample(std::size_t size) {
  if (size == 0) fail(ErrorCode::InvalidArgument, "resample size must be >= 1");
  Embedding e;
  e.kind = EmbeddingKind::Resample;
  e.size = size;
  return e;
}

Point Embedding::apply(std::span<const double> x) const {
  switch (kind) {
    case EmbeddingKind::Identity:
      return Point(x.begin(), x.end());
    case EmbeddingKind::CoordinateSubset: {
      Point out;
      for (std::size_t i : indices) {
        if (i >= x.size()) fail(ErrorCode::DimensionMismatch, "subset index " + std::to_string(i) + " out of range");
        out.push_back(x[i]);
      }
      return out;
    }
    case EmbeddingKind::Resample: {
      if (x.empty()) fail(ErrorCode::DimensionMismatch, "cannot resample an empty point");
      Point out(size);
      const double last = static_cast<double>(x.size() - 1);
      for (std::size_t j = 0; j < size; ++j) {
        const double pos = size == 1 ? 0.0 : last * static_cast<double>(j) / static_cast<double>(size - 1);
        const std::size_t lo = std::min(x.size() - 1, static_cast<std::size_t>(std::floor(pos)));
        const std::size_t hi = std::min(x.size() - 1, lo + 1);
        const double w = pos - static_cast<double>(lo);
        out[j] = (1.0 - w) * x[lo] + w * x[hi];
      }
      return out;
    }
  }
  return {};
}

Point ModelChart::predict(std::span<const double> x) const {
  Point p = forward_probabilities(net, embedding.apply(x));
  if (p.size() != partition.blocks.size()) {
    fail(ErrorCode::InvalidArgument, "chart " + id + " outputs " + std::to_string(p.size()) + " values for " +
                                         std::to_string(partition.blocks.size()) + " blocks");
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) fail(ErrorCode::InvalidArgument, "chart " + id + " output does not sum to 1");
  return p;
}

void ModelChart::check(std::size_t input_dim) const {
  partition.check();
  net.check();
  std::size_t dim = input_dim;
  if (embedding.kind == EmbeddingKind::CoordinateSubset) {
    for (std::size_t i : embedding.indices) {
      if (i >= input_dim) fail(ErrorCode::InvalidArgument, "chart " + id + " selects coordinate " + std::to_string(i));
    }
    dim = embedding.indices.size();
  } else if (embedding.kind == EmbeddingKind::Resample) {
    dim = embedding.size;
  }
  if (dim != net.input_dim) {
    fail(ErrorCode::InvalidArgument, "chart " + id + " embeds into dimension " + std::to_string(dim) +
                                         ", its model reads " + std::to_string(net.input_dim));
  }
  (void)predict(Point(input_dim, 0.0));
}

PredictionTable predict_all(const std::vector<ModelChart>& charts, const std::vector<Point>& xs) {
  PredictionTable table(charts.size());
  for (std::size_t i = 0; i < charts.size(); ++i) {
    table[i].reserve(xs.size());
    for (const Point& x : xs) table[i].push_back(charts[i].predict(x));
  }
  return table;
}

std::vector<TargetPartition> partitions_of(const std::vector<ModelChart>& charts) {
  std::vector<TargetPartition> out;
  for (const auto& c : charts) out.push_back(c.partition);
  return out;
}

std::vector<Point> instance_outputs(const PredictionTable& table, std::size_t instance) {
  std::vector<Point> out;
  for (const auto& chart : table) out.push_back(chart.at(instance));
  return out;
}

// ---- refinement ----

bool Refinement::all_thin() const {
  return std::all_of(valid.begin(), valid.end(), [](const auto& b) { return b.size() == 1; });
}

int Refinement::block_containing(int c) const {
  for (std::size_t s = 0; s < valid.size(); ++s) {
    if (contains(valid[s], c)) return static_cast<int>(s);
  }
  return -1;
}

Refinement refinement(const std::vector<TargetPartition>& partitions) {
  if (partitions.empty()) fail(ErrorCode::InvalidArgument, "refinement of no partitions");
  for (const auto& p : partitions) p.check();
  const std::vector<int> flat = partitions.front().flattening();
  for (const auto& p : partitions) {
    if (p.flattening() != flat) {
      fail(ErrorCode::FlatteningMismatch, partitions.front().str() + " and " + p.str() + " cover different classes");
    }
  }
  std::size_t total = 1;
  for (const auto& p : partitions) {
    total *= p.blocks.size();
    if (total > 1'000'000) fail(ErrorCode::BudgetCap, "refinement has more than 10^6 combinations");
  }
  Refinement r;
  r.partitions = partitions;
  std::vector<std::size_t> idx(partitions.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::vector<int> cut = partitions[0].blocks[idx[0]];
    for (std::size_t i = 1; i < partitions.size(); ++i) {
      std::vector<int> next;
      const auto& b = partitions[i].blocks[idx[i]];
      std::set_intersection(cut.begin(), cut.end(), b.begin(), b.end(), std::back_inserter(next));
      cut = std::move(next);
    }
    const std::size_t comb = r.combinations.size();
    r.combinations.push_back(idx);
    if (cut.empty()) {
      r.refinement_of.push_back(-1);
      r.invalid.push_back(comb);
    } else {
      r.refinement_of.push_back(static_cast<int>(r.valid.size()));
      r.valid.push_back(cut);
      r.component.push_back(comb);
    }
    r.intersections.push_back(std::move(cut));
    for (std::size_t i = partitions.size(); i-- > 0;) {
      if (++idx[i] < partitions[i].blocks.size()) break;
      idx[i] = 0;
    }
  }
  return r;
}

// ---- target graph ----

std::optional<std::size_t> TargetGraph::find(const std::vector<int>& flattening) const {
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].flattening == flattening) return v;
  }
  return std::nullopt;
}

TargetGraph build_target_graph(const std::vector<TargetPartition>& charts, const std::vector<int>& classes) {
  TargetGraph g;
  g.classes = classes;
  std::sort(g.classes.begin(), g.classes.end());
  g.classes.erase(std::unique(g.classes.begin(), g.classes.end()), g.classes.end());
  if (g.classes.empty()) fail(ErrorCode::InvalidArgument, "target graph needs at least one class");
  g.chart_partitions = charts;

  std::vector<TargetPartition> distinct;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < charts.size(); ++i) {
    charts[i].check();
    if (!is_subset(charts[i].flattening(), g.classes)) {
      fail(ErrorCode::InvalidArgument, "chart " + std::to_string(i) + " predicts classes outside the class set");
    }
    auto it = std::find(distinct.begin(), distinct.end(), charts[i]);
    if (it == distinct.end()) {
      distinct.push_back(charts[i]);
      groups.push_back({i});
    } else {
      groups[static_cast<std::size_t>(it - distinct.begin())].push_back(i);
    }
  }
  std::vector<std::vector<int>> flats;
  for (const auto& p : distinct) {
    auto f = p.flattening();
    if (std::find(flats.begin(), flats.end(), f) == flats.end()) flats.push_back(std::move(f));
  }
  std::stable_sort(flats.begin(), flats.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  if (flats.empty() || flats.front() != g.classes) fail(ErrorCode::NoRootModel, "no chart predicts every class");

  for (std::size_t i = 0; i < flats.size(); ++i) {
    TargetNode node;
    node.flattening = flats[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (flats[i].size() < flats[j].size() && is_subset(flats[i], flats[j])) g.nodes[j].next.push_back(i);
    }
    for (std::size_t d = 0; d < distinct.size(); ++d) {
      if (distinct[d].flattening() != node.flattening) continue;
      node.partitions.push_back(distinct[d]);
      node.groups.push_back(groups[d]);
      node.models.insert(node.models.end(), groups[d].begin(), groups[d].end());
    }
    std::sort(node.models.begin(), node.models.end());
    node.refinement = refinement(node.partitions);
    g.nodes.push_back(std::move(node));
  }
  for (const auto& node : g.nodes) {
    if (node.next.empty() && !node.refinement.all_thin()) {
      fail(ErrorCode::AssumptionViolation, "minimal node " + TargetPartition{{node.flattening}}.str() +
                                               " has the thick refinement " + node.refinement.as_partition().str());
    }
  }
  return g;
}

// ---- accuracy ----

double certainty(std::span<const double> output) {
  if (output.empty()) fail(ErrorCode::InvalidArgument, "empty output");
  return *std::max_element(output.begin(), output.end());
}

AccuracyResult fuzzy_accuracy(const TargetPartition& partition, const std::vector<Point>& outputs,
                              const std::vector<int>& labels, double alpha) {
  if (outputs.size() != labels.size()) fail(ErrorCode::InvalidArgument, "outputs and labels differ in length");
  AccuracyResult res;
  std::size_t hit = 0;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    const int block = partition.block_of(labels[k]);
    if (block < 0) fail(ErrorCode::InvalidArgument, "label " + std::to_string(labels[k]) + " lies outside " + partition.str());
    if (certainty(outputs[k]) < alpha) continue;
    res.certain.push_back(k);
    if (static_cast<int>(argmax(outputs[k])) == block) ++hit;
  }
  if (!res.certain.empty()) res.phi = static_cast<double>(hit) / static_cast<double>(res.certain.size());
  return res;
}

AccuracyCurve accuracy_curve(const TargetPartition& partition, const std::vector<Point>& outputs,
                             const std::vector<int>& labels, const std::vector<double>& thresholds) {
  AccuracyCurve curve;
  curve.thresholds = thresholds;
  for (double a : thresholds) {
    const AccuracyResult r = fuzzy_accuracy(partition, outputs, labels, a);
    curve.phi.push_back(r.phi);
    curve.certain_sizes.push_back(r.certain.size());
  }
  return curve;
}

// ---- voting ----

SharedVote vote_shared_targets(const std::vector<Point>& outputs, const std::vector<double>& phi, double alpha,
                               const VoteOptions& options) {
  if (outputs.empty() || outputs.size() != phi.size()) fail(ErrorCode::InvalidArgument, "group outputs and accuracies differ");
  SharedVote v;
  v.p.assign(outputs.front().size(), 0.0);
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].size() != v.p.size()) fail(ErrorCode::DimensionMismatch, "group outputs differ in length");
    const double rho = certainty(outputs[i]) >= alpha ? 1.0 : options.epsilon;
    const double w = rho * phi[i];
    v.weight += w;
    for (std::size_t j = 0; j < v.p.size(); ++j) v.p[j] += w * outputs[i][j];
  }
  if (v.weight == 0.0) {
    std::fill(v.p.begin(), v.p.end(), 0.0);
  } else {
    for (double& x : v.p) x /= v.weight;
  }
  return v;
}

NodeAnswer vote_at_node(const Refinement& r, const std::vector<SharedVote>& groups) {
  const std::size_t n = r.partitions.size();
  if (groups.size() != n) fail(ErrorCode::InvalidArgument, "one group answer per partition expected");
  for (std::size_t i = 0; i < n; ++i) {
    if (groups[i].p.size() != r.partitions[i].blocks.size()) {
      fail(ErrorCode::DimensionMismatch, "group answer does not match " + r.partitions[i].str());
    }
  }
  NodeAnswer ans;
  double total = 0.0;
  for (const auto& gv : groups) total += gv.weight;
  ans.silent = total == 0.0;
  for (const auto& gv : groups) ans.psi.push_back(ans.silent ? 0.0 : gv.weight / total);

  std::vector<double> pj(r.combinations.size());
  for (std::size_t k = 0; k < r.combinations.size(); ++k) {
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) prod *= groups[i].p[r.combinations[k][i]];
    pj[k] = prod;
  }
  ans.values.assign(r.valid.size(), 0.0);
  for (std::size_t s = 0; s < r.valid.size(); ++s) ans.values[s] = pj[r.component[s]];

  // inside[i][j]: valid blocks contained in block j of partition i
  std::vector<std::vector<std::vector<std::size_t>>> inside(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : r.partitions[i].blocks) {
      std::vector<std::size_t> sub;
      for (std::size_t s = 0; s < r.valid.size(); ++s) {
        if (is_subset(r.valid[s], t)) sub.push_back(s);
      }
      inside[i].push_back(std::move(sub));
    }
  }
  for (std::size_t k : r.invalid) {
    for (std::size_t i = 0; i < n; ++i) {
      const double mass = pj[k] * ans.psi[i];
      if (mass == 0.0) continue;
      const auto& sub = inside[i][r.combinations[k][i]];
      double denom = 0.0;
      for (std::size_t s : sub) denom += pj[r.component[s]];
      if (denom > 0.0) {
        for (std::size_t s : sub) ans.values[s] += mass * pj[r.component[s]] / denom;
      } else {
        ans.beta_fallback = true;
        for (std::size_t s : sub) ans.values[s] += mass / static_cast<double>(sub.size());
      }
    }
  }
  return ans;
}

NodeAnswer vote_at_node(const TargetNode& node, const std::vector<Point>& outputs, const std::vector<double>& phi,
                        double alpha, const VoteOptions& options) {
  std::vector<SharedVote> groups;
  for (const auto& members : node.groups) {
    std::vector<Point> outs;
    std::vector<double> ph;
    for (std::size_t i : members) {
      outs.push_back(outputs.at(i));
      ph.push_back(phi.at(i));
    }
    groups.push_back(vote_shared_targets(outs, ph, alpha, options));
  }
  return vote_at_node(node.refinement, groups);
}

std::vector<NodeAnswer> node_answers(const TargetGraph& g, const std::vector<Point>& outputs,
                                     const std::vector<double>& phi, double alpha, const VoteOptions& options) {
  std::vector<NodeAnswer> out;
  for (const auto& node : g.nodes) out.push_back(vote_at_node(node, outputs, phi, alpha, options));
  return out;
}

std::vector<NodePath> valid_paths(const TargetGraph& g, int c) {
  (void)class_index(g, c);
  std::vector<NodePath> out;
  NodePath path{0};
  auto dfs = [&](auto&& self) -> void {
    const TargetNode& node = g.nodes[path.back()];
    if (node.refinement.all_thin()) out.push_back(path);
    for (std::size_t next : node.next) {
      if (!contains(g.nodes[next].flattening, c)) continue;
      path.push_back(next);
      self(self);
      path.pop_back();
    }
  };
  dfs(dfs);
  if (out.empty()) fail(ErrorCode::NoValidPath, "no valid path for class " + std::to_string(c));
  return out;
}

PathVote vote_along_path(const TargetGraph& g, const NodePath& path, const std::vector<NodeAnswer>& answers) {
  if (path.empty() || path.front() != 0) fail(ErrorCode::InvalidArgument, "a path starts at the root");
  const Refinement& last = g.nodes.at(path.back()).refinement;
  if (!last.all_thin()) fail(ErrorCode::InvalidArgument, "a path ends at an all-thin refinement");
  PathVote v;
  for (const auto& b : last.valid) {
    const int t = b.front();
    double prod = 1.0;
    for (std::size_t node : path) {
      const int s = g.nodes.at(node).refinement.block_containing(t);
      if (s < 0) fail(ErrorCode::InvalidArgument, "class " + std::to_string(t) + " leaves the path");
      prod *= answers.at(node).values[static_cast<std::size_t>(s)];
    }
    v.classes.push_back(t);
    v.values.push_back(prod);
  }
  // a silent path abstains instead of naming its first class
  if (std::any_of(v.values.begin(), v.values.end(), [](double x) { return x > 0.0; })) {
    v.prediction = v.classes[argmax(v.values)];
  }
  return v;
}

double expected_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels, int c) {
  if (labels.empty()) fail(ErrorCode::EmptyValidation, "no validation instances");
  if (predictions.size() != labels.size()) fail(ErrorCode::InvalidArgument, "predictions and labels differ in length");
  std::size_t good = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if ((predictions[k] == c) == (labels[k] == c)) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(labels.size());
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid{0.0};
  for (int k = 1; k <= 19; ++k) grid.push_back(0.05 * k);
  grid.push_back(0.99);
  return grid;
}

std::vector<double> Calibration::phi_at(std::size_t k) const {
  std::vector<double> out;
  for (const auto& c : curves) out.push_back(c.phi.at(k));
  return out;
}

const ClassChoice& Calibration::choice(int c) const {
  for (const auto& ch : choices) {
    if (ch.c == c) return ch;
  }
  fail(ErrorCode::InvalidArgument, "calibration has no entry for class " + std::to_string(c));
}

Calibration calibrate(const TargetGraph& g, const PredictionTable& val, const std::vector<int>& val_labels,
                      const std::vector<double>& grid, const VoteOptions& options) {
  if (val_labels.empty()) fail(ErrorCode::EmptyValidation, "no validation instances");
  if (val.size() != g.chart_partitions.size()) fail(ErrorCode::InvalidArgument, "one prediction column per chart expected");
  for (const auto& col : val) {
    if (col.size() != val_labels.size()) fail(ErrorCode::InvalidArgument, "prediction rows and labels differ in length");
  }
  if (grid.empty() || grid.front() != 0.0) fail(ErrorCode::InvalidArgument, "threshold grid must start at 0");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= 1.0) || (k > 0 && !(grid[k] > grid[k - 1]))) {
      fail(ErrorCode::InvalidArgument, "threshold grid must rise inside [0, 1]");
    }
  }
  for (int y : val_labels) (void)class_index(g, y);

  Calibration cal;
  cal.grid = grid;
  cal.options = options;
  for (std::size_t i = 0; i < val.size(); ++i) {
    const TargetPartition& p = g.chart_partitions[i];
    std::vector<Point> outs;
    std::vector<int> labels;
    for (std::size_t k = 0; k < val_labels.size(); ++k) {
      if (p.block_of(val_labels[k]) < 0) continue;
      outs.push_back(val[i][k]);
      labels.push_back(val_labels[k]);
    }
    cal.curves.push_back(accuracy_curve(p, outs, labels, grid));
  }

  // answers[k][x] = node answers at grid point k on validation instance x
  std::vector<std::vector<std::vector<NodeAnswer>>> answers(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto phi = cal.phi_at(k);
    for (std::size_t x = 0; x < val_labels.size(); ++x) {
      answers[k].push_back(node_answers(g, instance_outputs(val, x), phi, grid[k], options));
    }
  }
  for (int c : g.classes) {
    const auto paths = valid_paths(g, c);
    ClassChoice best;
    best.c = c;
    best.r = -1.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (const auto& path : paths) {
        std::vector<int> pred;
        for (std::size_t x = 0; x < val_labels.size(); ++x) pred.push_back(vote_along_path(g, path, answers[k][x]).prediction);
        const double r = expected_accuracy(pred, val_labels, c);
        if (r > best.r) {
          best.r = r;
          best.path = path;
          best.alpha = grid[k];
          best.alpha_index = k;
        }
      }
    }
    cal.choices.push_back(best);
  }
  return cal;
}

HistoryVote vote_with_validation_history(const TargetGraph& g, const Calibration& cal, const std::vector<Point>& outputs) {
  HistoryVote v;
  std::map<std::size_t, std::vector<NodeAnswer>> cache;
  for (int c : g.classes) {
    const ClassChoice& ch = cal.choice(c);
    auto it = cache.find(ch.alpha_index);
    if (it == cache.end()) {
      it = cache.emplace(ch.alpha_index, node_answers(g, outputs, cal.phi_at(ch.alpha_index), ch.alpha, cal.options)).first;
    }
    const PathVote pv = vote_along_path(g, ch.path, it->second);
    const auto pos = std::find(pv.classes.begin(), pv.classes.end(), c);
    v.values.push_back(pv.values[static_cast<std::size_t>(pos - pv.classes.begin())]);
    v.paths.push_back(ch.path);
    for (std::size_t node : ch.path) v.fallback = v.fallback || it->second[node].beta_fallback || it->second[node].silent;
  }
  v.prediction = g.classes[argmax(v.values)];
  return v;
}

Point simple_average(const TargetGraph& g, const std::vector<Point>& outputs) {
  if (outputs.size() != g.chart_partitions.size()) fail(ErrorCode::InvalidArgument, "one output per chart expected");
  Point avg(g.classes.size(), 0.0);
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& blocks = g.chart_partitions[i].blocks;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (int c : blocks[b]) avg[class_index(g, c)] += outputs[i].at(b) / static_cast<double>(blocks[b].size());
    }
  }
  for (double& a : avg) a /= static_cast<double>(outputs.size());
  return avg;
}

int simple_average_prediction(const TargetGraph& g, const std::vector<Point>& outputs) {
  return g.classes[argmax(simple_average(g, outputs))];
}

int chart_prediction(const TargetPartition& partition, std::span<const double> output) {
  return partition.blocks.at(argmax(output)).front();
}

// ---- bundle ----

double fuzzy_belonging(std::span<const double> rho, std::span<const double> values) {
  if (rho.size() != values.size()) fail(ErrorCode::InvalidArgument, "one weight per chart expected");
  double total = 0.0, p = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] >= 0.0)) fail(ErrorCode::InvalidArgument, "weights must be nonnegative");
    total += rho[i];
    p += rho[i] * values[i];
  }
  if (total > 1.0 + 1e-12) fail(ErrorCode::InvalidArgument, "weights sum to more than 1");
  if (total == 0.0) fail(ErrorCode::UncoveredInstance, "no chart covers the instance");
  return p;
}

std::vector<double> LogifoldBundle::rho(const std::vector<Point>& outputs, int label) const {
  if (outputs.size() != partitions.size()) fail(ErrorCode::InvalidArgument, "one output per chart expected");
  const ClassChoice& ch = calibration.choice(label);
  std::vector<double> w(partitions.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    if (partitions[i].block_of(label) < 0 || certainty(outputs[i]) < ch.alpha) continue;
    w[i] = calibration.curves.at(i).phi.at(ch.alpha_index);
    total += w[i];
  }
  if (total > 0.0) {
    for (double& x : w) x /= total;
  }
  return w;
}

std::vector<double> LogifoldBundle::characteristic(const std::vector<Point>& outputs, int label) const {
  std::vector<double> f(partitions.size(), 0.0);
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    const int b = partitions[i].block_of(label);
    if (b >= 0) f[i] = outputs.at(i).at(static_cast<std::size_t>(b));
  }
  return f;
}

double LogifoldBundle::belonging(const std::vector<Point>& outputs, int label) const {
  return fuzzy_belonging(rho(outputs, label), characteristic(outputs, label));
}

}  // namespace logifold
