#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "logifold/compile.hpp"
#include "logifold/ensemble.hpp"
#include "logifold/fuzzy.hpp"
#include "logifold/llg.hpp"
#include "logifold/network.hpp"
#include "logifold/semilinear.hpp"
#include "logifold/trainer.hpp"
#include "logifold/uat.hpp"

/// Text formats. Readers take an `origin` (usually the path) for diagnostics
/// and throw MalformedFile as "origin:line: message" where a line is known.
namespace logifold::io {

/// printf "%.17g".
std::string format_number(double v);

/// Whole file; MalformedFile naming the path when it cannot be read.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

std::string graph_to_json(const LogicalGraph& g);
LogicalGraph graph_from_json(const std::string& text, const std::string& origin = "<graph>");

std::string network_to_json(const NetworkSpec& net);
NetworkSpec network_from_json(const std::string& text, const std::string& origin = "<model>");

std::string semilinear_to_json(const SemilinearFunction& f);
SemilinearFunction semilinear_from_json(const std::string& text, const std::string& origin = "<semilinear>");

/// Cells in ravel order, columns i1..in,label.
std::string grid_to_csv(const LabeledGrid& grid);
/// lo, hi and resolution.
std::string grid_manifest_json(const LabeledGrid& grid);
LabeledGrid grid_from_files(const std::string& csv, const std::string& manifest, const std::string& origin = "<grid>");

std::string fuzzy_to_json(const FuzzyLogicalGraph& g);
FuzzyLogicalGraph fuzzy_from_json(const std::string& text, const std::string& origin = "<fuzzy graph>");

/// Columns x1..xn,label,split.
std::string dataset_to_csv(const Dataset& d);
Dataset dataset_from_csv(const std::string& text, const std::string& origin = "<dataset>");

/// Leading x1..xn columns of a CSV; later columns are ignored.
std::vector<Point> points_from_csv(const std::string& text, const std::string& origin = "<points>");
std::string points_to_csv(const std::vector<Point>& points);

/// Columns epoch,loss (epoch 0 is the untrained net).
std::string loss_to_csv(const std::vector<double>& loss);

/// Columns instance_id,p_block_1..p_block_k.
std::string predictions_to_csv(const std::vector<Point>& rows);
std::vector<Point> predictions_from_csv(const std::string& text, const std::string& origin = "<predictions>");

std::string partition_to_json(const TargetPartition& p);
TargetPartition partition_from_json(const std::string& text, const std::string& origin = "<partition>");

/// Chart list: ids, model paths (relative to the list file), partitions, embeddings.
struct ChartEntry {
  std::string id;
  std::string model;
  TargetPartition partition;
  Embedding embedding;
};
std::string charts_to_json(const std::vector<ChartEntry>& charts);
std::vector<ChartEntry> charts_from_json(const std::string& text, const std::string& origin = "<charts>");
/// Loads every model of the list, resolving paths against the list's directory.
std::vector<ModelChart> load_charts(const std::string& path);

std::string target_graph_to_json(const TargetGraph& g);

std::string calibration_to_json(const Calibration& cal, const TargetGraph& g, const std::vector<std::string>& chart_ids,
                                const std::string& config_hash);
Calibration calibration_from_json(const std::string& text, const std::string& origin = "<calibration>");

struct VoteRecord {
  std::size_t instance = 0;
  HistoryVote vote;
  int label = -1;          // -1 when unknown
  int baseline = -1;       // simple-average prediction
};
std::string vote_report_to_json(const std::vector<VoteRecord>& records, const std::string& config_hash);

/// Settings shared by every command; all randomness flows from `seed`.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t chamber_cap = kDefaultChamberCap;
  std::size_t region_cap = 100'000;
  std::size_t path_cap = kDefaultPathCap;
  std::vector<double> grid = default_threshold_grid();
  double tie_margin = 1e-9;     // check-equiv: ReLU points this close to an argmax tie are skipped
  double simplex_tolerance = kSimplexTolerance;
  std::map<std::string, std::string> paths;

  /// InvalidArgument on zero caps or a grid outside [0, 1].
  void check() const;
  CompileCaps caps() const { return {chamber_cap, region_cap}; }
};

std::string config_to_json(const RunConfig& c);
RunConfig config_from_json(const std::string& text, const std::string& origin = "<config>");
/// fnv1a_hex of the canonical config file.
std::string config_hash(const RunConfig& c);

}  // namespace logifold::io
