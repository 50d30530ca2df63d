#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logifold/network.hpp"
#include "logifold/trainer.hpp"

namespace logifold {

// ---- charts ----

enum class EmbeddingKind { Identity, CoordinateSubset, Resample };
std::string_view to_string(EmbeddingKind k);
EmbeddingKind embedding_kind_from_string(std::string_view s);

/// Feature transform applied before a chart's model.
struct Embedding {
  EmbeddingKind kind = EmbeddingKind::Identity;
  std::vector<std::size_t> indices;  // CoordinateSubset
  std::size_t size = 0;              // Resample: output length, linear interpolation

  static Embedding identity() { return {}; }
  static Embedding subset(std::vector<std::size_t> indices);
  static Embedding resample(std::size_t size);

  Point apply(std::span<const double> x) const;
  bool operator==(const Embedding&) const = default;
};

struct ModelChart {
  std::string id;
  NetworkSpec net;
  Embedding embedding;
  TargetPartition partition;

  std::vector<int> flattening() const { return partition.flattening(); }
  /// Output distribution over the blocks of the partition.
  Point predict(std::span<const double> x) const;
  /// InvalidArgument when the net output does not match the partition.
  void check(std::size_t input_dim) const;
};

/// table[chart][instance] = chart output on that instance.
using PredictionTable = std::vector<std::vector<Point>>;

PredictionTable predict_all(const std::vector<ModelChart>& charts, const std::vector<Point>& xs);
std::vector<TargetPartition> partitions_of(const std::vector<ModelChart>& charts);

/// Outputs of every chart on one instance.
std::vector<Point> instance_outputs(const PredictionTable& table, std::size_t instance);

// ---- refinement and target graph ----

/// All intersections of one block from each partition, the first partition
/// varying slowest.
struct Refinement {
  std::vector<TargetPartition> partitions;
  std::vector<std::vector<std::size_t>> combinations;  // block index per partition
  std::vector<std::vector<int>> intersections;         // per combination, possibly empty
  std::vector<int> refinement_of;                      // per combination: valid block index or -1
  std::vector<std::vector<int>> valid;                 // the refinement blocks
  std::vector<std::size_t> component;                  // per valid block: its combination
  std::vector<std::size_t> invalid;                    // empty-intersection combinations

  TargetPartition as_partition() const { return {valid}; }
  bool all_thin() const;
  /// Valid block holding class c, or -1.
  int block_containing(int c) const;
};

/// FlatteningMismatch unless all partitions share one flattening;
/// BlockMismatch for malformed partitions.
Refinement refinement(const std::vector<TargetPartition>& partitions);

struct TargetNode {
  std::vector<int> flattening;
  std::vector<TargetPartition> partitions;         // distinct, in order of first appearance
  std::vector<std::vector<std::size_t>> groups;    // chart indices per partition
  std::vector<std::size_t> models;                 // all chart indices
  std::vector<std::size_t> next;                   // nodes with strictly smaller flattening
  Refinement refinement;
};

/// Nodes sorted by decreasing flattening size; node 0 is the root.
struct TargetGraph {
  std::vector<int> classes;
  std::vector<TargetNode> nodes;
  std::vector<TargetPartition> chart_partitions;

  std::optional<std::size_t> find(const std::vector<int>& flattening) const;
};

/// NoRootModel when no chart covers every class; AssumptionViolation when a
/// node with no smaller node below it has a refinement with a thick block.
TargetGraph build_target_graph(const std::vector<TargetPartition>& charts, const std::vector<int>& classes);

// ---- voting ----

/// Certainty C(x), the largest output component.
double certainty(std::span<const double> output);

struct AccuracyResult {
  double phi = 0.0;
  std::vector<std::size_t> certain;  // instance indices with C >= alpha
};

/// Labels are classes and must lie in the partition's flattening.
AccuracyResult fuzzy_accuracy(const TargetPartition& partition, const std::vector<Point>& outputs,
                              const std::vector<int>& labels, double alpha);

struct AccuracyCurve {
  std::vector<double> thresholds;
  std::vector<double> phi;
  std::vector<std::size_t> certain_sizes;
};

AccuracyCurve accuracy_curve(const TargetPartition& partition, const std::vector<Point>& outputs,
                             const std::vector<int>& labels, const std::vector<double>& thresholds);

struct VoteOptions {
  /// Weight of a model below the threshold; 0 drops it.
  double epsilon = 0.0;
};

struct SharedVote {
  Point p;             // weighted answer over the shared partition
  double weight = 0;   // Phi_G
};

/// Models sharing one partition; phi[i] is the accuracy of model i at alpha.
SharedVote vote_shared_targets(const std::vector<Point>& outputs, const std::vector<double>& phi, double alpha,
                               const VoteOptions& options = {});

struct NodeAnswer {
  Point values;              // per refinement block
  std::vector<double> psi;   // per group
  bool beta_fallback = false;  // a contribution factor had a zero denominator
  bool silent = false;         // every group weight was zero
};

/// Combines the group answers (one per partition of r) at a node.
NodeAnswer vote_at_node(const Refinement& r, const std::vector<SharedVote>& groups);

/// outputs[i] and phi[i] are indexed by chart.
NodeAnswer vote_at_node(const TargetNode& node, const std::vector<Point>& outputs, const std::vector<double>& phi,
                        double alpha, const VoteOptions& options = {});

std::vector<NodeAnswer> node_answers(const TargetGraph& g, const std::vector<Point>& outputs,
                                     const std::vector<double>& phi, double alpha, const VoteOptions& options = {});

using NodePath = std::vector<std::size_t>;

/// Root-anchored paths along next arrows keeping c at every node and ending
/// at an all-thin refinement, in depth-first order. NoValidPath when none.
std::vector<NodePath> valid_paths(const TargetGraph& g, int c);

struct PathVote {
  std::vector<int> classes;  // thin targets of the last node
  Point values;
  int prediction = -1;
};

PathVote vote_along_path(const TargetGraph& g, const NodePath& path, const std::vector<NodeAnswer>& answers);

/// (|TP| + |TN|) / |X| for the event "predicted c". EmptyValidation on no data.
double expected_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels, int c);

std::vector<double> default_threshold_grid();

struct ClassChoice {
  int c = 0;
  NodePath path;
  double alpha = 0.0;
  std::size_t alpha_index = 0;
  double r = 0.0;
};

struct Calibration {
  std::vector<double> grid;
  std::vector<AccuracyCurve> curves;   // per chart, on validation data inside its flattening
  std::vector<ClassChoice> choices;    // per class of the graph
  VoteOptions options;

  /// phi of every chart at grid point k.
  std::vector<double> phi_at(std::size_t k) const;
  const ClassChoice& choice(int c) const;
};

/// Grid must be ascending in [0, 1] and contain 0. Per class, the (path,
/// threshold) with the largest expected accuracy; ties go to the smaller
/// threshold, then the earlier path.
Calibration calibrate(const TargetGraph& g, const PredictionTable& val, const std::vector<int>& val_labels,
                      const std::vector<double>& grid = default_threshold_grid(), const VoteOptions& options = {});

struct HistoryVote {
  Point values;  // per class of the graph
  int prediction = -1;
  std::vector<NodePath> paths;  // per class
  bool fallback = false;
};

HistoryVote vote_with_validation_history(const TargetGraph& g, const Calibration& cal, const std::vector<Point>& outputs);

/// Block mass spread evenly over its classes, averaged over charts.
Point simple_average(const TargetGraph& g, const std::vector<Point>& outputs);
int simple_average_prediction(const TargetGraph& g, const std::vector<Point>& outputs);

/// Class predicted by a chart with a fine partition.
int chart_prediction(const TargetPartition& partition, std::span<const double> output);

// ---- bundle ----

/// sum_i rho_i * values_i. rho must be nonnegative with sum <= 1;
/// UncoveredInstance when every rho_i is zero.
double fuzzy_belonging(std::span<const double> rho, std::span<const double> values);

/// Charts weighted per instance by their accuracy at the calibrated threshold
/// of the instance's class, among charts that cover the class and are certain.
struct LogifoldBundle {
  std::vector<TargetPartition> partitions;
  Calibration calibration;

  /// Normalized weights; all zero when no chart covers the instance.
  std::vector<double> rho(const std::vector<Point>& outputs, int label) const;
  /// Each chart's probability of the block holding the label.
  std::vector<double> characteristic(const std::vector<Point>& outputs, int label) const;
  double belonging(const std::vector<Point>& outputs, int label) const;
};

}  // namespace logifold
