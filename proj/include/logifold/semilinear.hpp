#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logifold/exact.hpp"
#include "logifold/llg.hpp"

namespace logifold {

/// Affine row a·x + b.
struct LinearRow {
  std::vector<double> a;
  double b = 0.0;

  /// Offset first, then left to right, as in AffineMap::row_value.
  double value(std::span<const double> x) const;
  LinearRow negated() const;
  bool operator==(const LinearRow&) const = default;
  auto operator<=>(const LinearRow&) const = default;
};

LinearRow row_of(const AffineMap& l, std::size_t r);

/// {x : eq_i(x) = 0, gt_j(x) > 0, ge_k(x) >= 0}.
///
/// The weak rows are a shorthand: each one is the union of its `= 0` and `> 0`
/// cases, and to_canonical expands them.
struct BasicSemilinearSet {
  std::size_t dim = 0;
  std::vector<LinearRow> eq;
  std::vector<LinearRow> gt;
  std::vector<LinearRow> ge;

  std::size_t row_count() const { return eq.size() + gt.size() + ge.size(); }
  /// Equalities become two weak constraints.
  std::vector<Constraint> constraints() const;
  BasicSemilinearSet intersect(const BasicSemilinearSet& other) const;
};

struct SemilinearSet {
  std::size_t dim = 0;
  std::vector<BasicSemilinearSet> pieces;
};

/// Fibers f^{-1}(t), one semilinear set per label.
struct SemilinearFunction {
  std::size_t dim = 0;
  std::map<std::string, SemilinearSet> fibers;
};

inline const std::string kBottomLabel = "⊥";
inline constexpr double kEqualityTolerance = 1e-12;
inline constexpr std::size_t kExactDimensionBudget = 8;

enum class ContainsMode { Float, Rational };

/// Float mode accepts |eq(x)| <= 1e-12; rational mode converts x exactly and
/// compares exactly.
bool contains(const BasicSemilinearSet& b, std::span<const double> x, ContainsMode mode = ContainsMode::Float);
bool contains(const SemilinearSet& s, std::span<const double> x, ContainsMode mode = ContainsMode::Float);
bool contains_exact(const BasicSemilinearSet& b, const RationalPoint& x);
bool contains_exact(const SemilinearSet& s, const RationalPoint& x);

struct EmptinessCheck {
  bool empty = false;
  RationalPoint witness;                        // when nonempty
  std::optional<FarkasCertificate> certificate;  // when empty and requested
};

/// Exact verdict; throws DimensionBudgetExceeded past 8 dimensions.
EmptinessCheck check_emptiness(const BasicSemilinearSet& b, bool want_certificate = false);
bool is_empty(const BasicSemilinearSet& b);

/// Equivalent pieces using only `eq` and `gt` rows, empty ones dropped.
std::vector<BasicSemilinearSet> to_canonical(const BasicSemilinearSet& b);

/// Label of the first fiber containing x, if any.
std::optional<std::string> label_of(const SemilinearFunction& f, std::span<const double> x,
                                    ContainsMode mode = ContainsMode::Float);

/// Basic set of one chamber of l: PLUS rows as l_i >= 0, MINUS rows as -l_i > 0.
BasicSemilinearSet chamber_set(const AffineMap& l, const SignVector& s);

/// Fibers as unions over source-to-target paths of chamber intersections.
SemilinearFunction from_llgraph(const LogicalGraph& g, std::size_t path_cap = kDefaultPathCap);

struct ToGraphOptions {
  std::size_t chamber_cap = kDefaultChamberCap;
};

/// Single guard (l_1, -l_1, ..., l_N, -l_N) over the distinct defining rows.
/// Chambers meeting no fiber go to the reserved label ⊥.
LogicalGraph to_llgraph(const SemilinearFunction& f, const ToGraphOptions& options = {});

}  // namespace logifold
