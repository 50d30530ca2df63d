#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "logifold/affine.hpp"

namespace logifold {

enum class VertexKind { Source, Internal, Target };

std::string_view to_string(VertexKind kind);
VertexKind vertex_kind_from_string(std::string_view s);

struct Vertex {
  std::string id;
  VertexKind kind = VertexKind::Internal;
};

struct Arrow {
  std::string id;
  std::size_t src = 0;
  std::size_t dst = 0;
};

/// Decision DAG with affine guards: a linear logical graph.
///
/// Vertices with more than one outgoing arrow carry a guard l : R^n -> R^k and a
/// routing table from sign vectors of l to outgoing arrows. All guards act on
/// the input space R^n. Targets carry the output labels.
class LogicalGraph {
 public:
  LogicalGraph() = default;
  explicit LogicalGraph(std::size_t input_dim) : input_dim_(input_dim) {}

  std::size_t input_dim() const { return input_dim_; }

  std::size_t add_vertex(std::string id, VertexKind kind);
  /// Adds a vertex with a generated id ("v<index>").
  std::size_t add_vertex(VertexKind kind);
  std::size_t add_target(std::string label);
  std::size_t add_arrow(std::string id, std::size_t src, std::size_t dst);
  std::size_t add_arrow(std::size_t src, std::size_t dst);

  void set_kind(std::size_t v, VertexKind kind) { vertices_.at(v).kind = kind; }
  void set_guard(std::size_t v, AffineMap guard);
  void clear_guard(std::size_t v);
  void set_route(std::size_t v, const SignVector& s, std::size_t arrow);
  void set_label(std::size_t v, std::string label);
  void clear_label(std::size_t v);

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t arrow_count() const { return arrows_.size(); }
  const Vertex& vertex(std::size_t v) const { return vertices_.at(v); }
  const Arrow& arrow(std::size_t a) const { return arrows_.at(a); }
  const std::vector<std::size_t>& out_arrows(std::size_t v) const { return out_.at(v); }
  std::size_t in_degree(std::size_t v) const { return in_degree_.at(v); }
  const std::optional<AffineMap>& guard(std::size_t v) const { return guards_.at(v); }
  const std::map<std::string, std::size_t>& routing(std::size_t v) const { return routing_.at(v); }
  const std::optional<std::string>& label(std::size_t v) const { return labels_.at(v); }

  std::optional<std::size_t> find_vertex(const std::string& id) const;
  std::optional<std::size_t> find_arrow(const std::string& id) const;

  /// The unique vertex with no incoming arrow; throws MultipleSources/DanglingVertex otherwise.
  std::size_t source() const;
  std::vector<std::size_t> targets() const;
  /// Target labels in vertex order.
  std::vector<std::string> label_set() const;

  /// The arrow taken at v for input x (guard-driven when v is guarded).
  std::size_t choose_arrow(std::size_t v, std::span<const double> x) const;

 private:
  std::size_t input_dim_ = 0;
  std::vector<Vertex> vertices_;
  std::vector<Arrow> arrows_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::size_t> in_degree_;
  std::vector<std::optional<AffineMap>> guards_;
  std::vector<std::map<std::string, std::size_t>> routing_;
  std::vector<std::optional<std::string>> labels_;
  std::map<std::string, std::size_t> vertex_index_;
  std::map<std::string, std::size_t> arrow_index_;
  std::set<std::size_t> roots_;  // vertices without incoming arrows
};

struct ValidateOptions {
  /// Confirms, with exact chamber enumeration, that every realizable sign
  /// vector of every guard has a routing entry.
  bool check_realizability = true;
};

struct ValidationReport {
  std::vector<std::size_t> topological_order;
  std::size_t source = 0;
  std::size_t target_count = 0;
  std::size_t guard_count = 0;
};

/// Throws CyclicGraph, MultipleSources, IncompleteRouting or DanglingVertex
/// naming the offending ids; returns the canonical (Kahn, lowest index first)
/// topological order otherwise.
ValidationReport validate_graph(const LogicalGraph& g, const ValidateOptions& options = {});

std::string evaluate(const LogicalGraph& g, std::span<const double> x);
/// Index of the target vertex reached by the walk.
std::size_t evaluate_vertex(const LogicalGraph& g, std::span<const double> x);

struct PathSumTerm {
  std::vector<std::size_t> path;  // arrow indices from the source
  int coefficient = 0;            // c_gamma(x) in {0, 1}
  std::string head;               // label of the target the path ends at
};

struct PathSumResult {
  std::string label;
  std::vector<PathSumTerm> terms;
  std::size_t nonzero_terms = 0;
};

inline constexpr std::size_t kDefaultPathCap = 1'000'000;

/// Number of source-to-target paths, saturating at cap + 1.
std::size_t count_paths(const LogicalGraph& g, std::size_t cap = kDefaultPathCap);

/// All source-to-target paths (arrow sequences) in depth-first order.
std::vector<std::vector<std::size_t>> enumerate_paths(const LogicalGraph& g, std::size_t cap = kDefaultPathCap);

/// Sum-over-paths form: every path gets the product of its chamber indicators.
PathSumResult evaluate_pathsum(const LogicalGraph& g, std::span<const double> x, std::size_t cap = kDefaultPathCap);

/// Same as above over a path list computed once by enumerate_paths.
PathSumResult evaluate_pathsum(const LogicalGraph& g, const std::vector<std::vector<std::size_t>>& paths,
                               std::span<const double> x);

}  // namespace logifold
