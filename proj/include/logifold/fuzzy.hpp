#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logifold/compile.hpp"
#include "logifold/llg.hpp"
#include "logifold/network.hpp"

namespace logifold {

inline constexpr double kSimplexTolerance = 1e-9;

/// Product of standard simplices S^{d_1} x ... x S^{d_m}. A point is stored in
/// ambient coordinates, factor after factor, d_k + 1 entries each. Its reduced
/// coordinates drop the first entry of every factor; guards and affine arrow
/// maps act on those (S^d identified with its affine hull R^d).
struct StateSpace {
  std::vector<std::size_t> factors;

  static StateSpace cube(std::size_t n);      // (S^1)^n
  static StateSpace simplex(std::size_t d);   // S^d

  std::size_t factor_count() const { return factors.size(); }
  std::size_t ambient_dim() const;
  std::size_t reduced_dim() const;
  std::size_t ambient_offset(std::size_t factor) const;
  std::size_t reduced_offset(std::size_t factor) const;
  /// Number of corners e_I.
  std::size_t corner_count() const;

  Point reduce(std::span<const double> point) const;
  Point lift(std::span<const double> reduced) const;
  bool contains(std::span<const double> point, double tol = kSimplexTolerance) const;
  /// "S^1xS^2"
  std::string str() const;

  StateSpace concat(const StateSpace& other) const;
  StateSpace slice(std::size_t first, std::size_t count) const;

  bool operator==(const StateSpace&) const = default;
};

enum class MapKind {
  Identity,
  AffineSigmoid,  // (S^1)^k, coordinate-wise sigmoid of an affine map
  AffineSoftmax,  // S^{k-1}, softmax of an affine map
  Project,        // keeps the listed factors
  Diagonal,       // x -> (x, ..., x)
  Constant,
  CoordProduct,   // S^1 scalar prod_k u_k^{(i_k)} for a corner I
  Min,            // S^1 scalar min over (S^1)^k
  Max,
  Block,          // inner map on a run of factors, identity on the rest
};

std::string_view to_string(MapKind k);
MapKind map_kind_from_string(std::string_view s);

/// Continuous map between state spaces, drawn from a closed family so that
/// graphs stay serializable. A scalar v in S^1 is the point (1 - v, v).
struct ArrowMap {
  MapKind kind = MapKind::Identity;
  AffineMap affine;                  // AffineSigmoid / AffineSoftmax, on reduced coordinates
  std::vector<std::size_t> indices;  // Project: factors kept; CoordProduct: the corner
  std::size_t copies = 0;            // Diagonal
  std::size_t first = 0, count = 0;  // Block: factor run
  StateSpace space;                  // Constant: target space
  Point point;                       // Constant: ambient point
  std::shared_ptr<const ArrowMap> inner;  // Block

  static ArrowMap identity();
  static ArrowMap affine_sigmoid(AffineMap a);
  static ArrowMap affine_softmax(AffineMap a);
  static ArrowMap project(std::vector<std::size_t> factors);
  static ArrowMap diagonal(std::size_t copies);
  static ArrowMap constant(StateSpace space, Point point);
  static ArrowMap coord_product(std::vector<std::size_t> corner);
  static ArrowMap min();
  static ArrowMap max();
  static ArrowMap block(std::size_t first, std::size_t count, ArrowMap inner);

  bool operator==(const ArrowMap& other) const;
};

/// Space the map sends `in` to; StateSpaceMismatch when the map does not apply.
StateSpace output_space(const ArrowMap& m, const StateSpace& in);
Point apply_map(const ArrowMap& m, const StateSpace& in, std::span<const double> point);

/// Rewrites A acting on ambient coordinates of `space` as a map on reduced ones.
AffineMap to_reduced(const AffineMap& ambient, const StateSpace& space);

struct FuzzyVertex {
  std::string id;
  VertexKind kind = VertexKind::Internal;
  StateSpace space;
};

struct FuzzyArrow {
  std::string id;
  std::size_t src = 0;
  std::size_t dst = 0;
  ArrowMap map;
};

/// Inputs x in the box [lo, hi] enter the source cube as (x - lo) / (hi - lo).
struct InputBox {
  Point lo, hi;
  bool operator==(const InputBox&) const = default;
};

/// Decision DAG whose vertices carry product-of-simplex state spaces and whose
/// arrows carry maps between them. Guards read the current state.
class FuzzyLogicalGraph {
 public:
  std::size_t add_vertex(std::string id, VertexKind kind, StateSpace space);
  std::size_t add_arrow(std::string id, std::size_t src, std::size_t dst, ArrowMap map);
  std::size_t add_arrow(std::size_t src, std::size_t dst, ArrowMap map);

  void set_kind(std::size_t v, VertexKind kind) { vertices_.at(v).kind = kind; }
  /// Guard columns are the reduced coordinates of the vertex space.
  void set_guard(std::size_t v, AffineMap guard);
  void set_route(std::size_t v, const SignVector& s, std::size_t arrow);
  void set_input_box(std::optional<InputBox> box);

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t arrow_count() const { return arrows_.size(); }
  const FuzzyVertex& vertex(std::size_t v) const { return vertices_.at(v); }
  const FuzzyArrow& arrow(std::size_t a) const { return arrows_.at(a); }
  const std::vector<std::size_t>& out_arrows(std::size_t v) const { return out_.at(v); }
  std::size_t in_degree(std::size_t v) const { return in_degree_.at(v); }
  const std::optional<AffineMap>& guard(std::size_t v) const { return guards_.at(v); }
  const std::map<std::string, std::size_t>& routing(std::size_t v) const { return routing_.at(v); }
  const std::optional<InputBox>& input_box() const { return box_; }

  std::optional<std::size_t> find_vertex(const std::string& id) const;
  std::optional<std::size_t> find_arrow(const std::string& id) const;
  std::size_t source() const;
  std::vector<std::size_t> targets() const;
  const StateSpace& input_space() const { return vertices_.at(source()).space; }

  /// Ambient source state for an input point (box-squeezed when a box is set).
  Point encode_input(std::span<const double> x) const;
  std::size_t choose_arrow(std::size_t v, std::span<const double> state) const;

 private:
  std::vector<FuzzyVertex> vertices_;
  std::vector<FuzzyArrow> arrows_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::size_t> in_degree_;
  std::vector<std::optional<AffineMap>> guards_;
  std::vector<std::map<std::string, std::size_t>> routing_;
  std::map<std::string, std::size_t> vertex_index_;
  std::map<std::string, std::size_t> arrow_index_;
  std::optional<InputBox> box_;
};

/// Structural checks as for LogicalGraph, arrow-map endpoint spaces, and
/// routing of every chamber a state can reach (StateSpaceMismatch,
/// IncompleteRouting, ...). Reachable sets are tracked exactly through
/// identity, block and diagonal maps and widened to the whole space elsewhere.
ValidationReport validate_fuzzy(const FuzzyLogicalGraph& g, bool check_realizability = true);

struct FuzzyValue {
  std::size_t target = 0;
  Point state;  // ambient coordinates in the target's space
};

/// Walks the graph from encode_input(x); StateSpaceViolation when a state
/// leaves its simplex.
FuzzyValue evaluate_fuzzy(const FuzzyLogicalGraph& g, std::span<const double> x);

struct FuzzyPathTerm {
  std::vector<std::size_t> path;
  int coefficient = 0;
};

struct FuzzyPathSum {
  FuzzyValue value;
  std::vector<FuzzyPathTerm> terms;
  std::size_t nonzero_terms = 0;
};

std::vector<std::vector<std::size_t>> enumerate_fuzzy_paths(const FuzzyLogicalGraph& g,
                                                            std::size_t cap = kDefaultPathCap);
FuzzyPathSum evaluate_fuzzy_pathsum(const FuzzyLogicalGraph& g, std::span<const double> x,
                                    std::size_t cap = kDefaultPathCap);
FuzzyPathSum evaluate_fuzzy_pathsum(const FuzzyLogicalGraph& g, const std::vector<std::vector<std::size_t>>& paths,
                                    std::span<const double> x);

struct OutcomeLabel {
  std::string vertex;
  std::vector<std::size_t> corner;
  auto operator<=>(const OutcomeLabel&) const = default;
};

/// prod_k point^{(i_k)} over the factors.
double corner_probability(const StateSpace& space, std::span<const double> point, const std::vector<std::size_t>& corner);
/// Corners of every target; only the reached target gets nonzero mass.
std::map<OutcomeLabel, double> outcome_distribution(const FuzzyLogicalGraph& g, std::span<const double> x);
/// Throws UnknownOutcome for a non-target vertex or an out-of-range corner.
double characteristic(const FuzzyLogicalGraph& g, std::span<const double> x, const OutcomeLabel& t);

/// Chain of AFFINE_SIGMOID arrows on cubes, AFFINE_SOFTMAX into the output
/// simplex (a single logit z gives (1 - s(z), s(z)) in S^1), heads after that.
FuzzyLogicalGraph from_sigmoid_net(const NetworkSpec& net, const std::optional<InputBox>& box = std::nullopt);

/// Region tree of the net on the input cube; each leaf region reaches the
/// single output vertex by the softmax of its composed affine logits.
FuzzyLogicalGraph from_relu_softmax_net(const NetworkSpec& net, const CompileCaps& caps = {},
                                        const std::optional<InputBox>& box = std::nullopt);

/// Two vertices joined by an identity arrow.
FuzzyLogicalGraph fuzzy_identity(const StateSpace& space);

/// Diagonal into k copies of the shared input space, then each graph run on
/// its own block; output is the tuple of outputs.
FuzzyLogicalGraph fuzzy_product(const std::vector<const FuzzyLogicalGraph*>& graphs);
FuzzyLogicalGraph fuzzy_union(const FuzzyLogicalGraph& f1, const FuzzyLogicalGraph& f2);
FuzzyLogicalGraph fuzzy_intersection(const FuzzyLogicalGraph& f1, const FuzzyLogicalGraph& f2);

/// Scalar value v of a state in S^1.
double scalar_value(const FuzzyValue& v);

}  // namespace logifold
