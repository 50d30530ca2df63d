#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "logifold/semilinear.hpp"

namespace logifold {

inline constexpr int kOutside = -1;  // cell not in the domain D
inline constexpr int kStar = -2;     // the extra value * of an approximant

/// Gridded function on a box: cells indexed row-major, last axis fastest.
struct LabeledGrid {
  std::vector<double> lo, hi;
  std::vector<std::size_t> resolution;
  std::vector<int> labels;

  std::size_t dims() const { return resolution.size(); }
  std::size_t cell_count() const;
  double cell_volume() const;
  std::vector<std::size_t> unravel(std::size_t cell) const;
  std::size_t ravel(const std::vector<std::size_t>& index) const;
  Point cell_center(std::size_t cell) const;
  /// Lower and upper coordinates of cell boundary i along axis k.
  double boundary(std::size_t axis, std::size_t i) const;
  /// Cell count of {c : label(c) != OUTSIDE} times the cell volume.
  double domain_measure() const;
  /// Throws InvalidArgument on inconsistent sizes.
  void check() const;
};

/// [0,1]^2 with res x res cells; label 1 iff column index > row index.
LabeledGrid diagonal_grid(std::size_t res);
LabeledGrid constant_grid(const std::vector<std::size_t>& resolution, int label);

/// Index box [lo, hi) per axis; geometrically the half-open box (a_k, b_k].
struct CellBox {
  std::vector<std::size_t> lo, hi;
  std::size_t cells() const;
  bool operator==(const CellBox&) const = default;
};

struct RectangleCover {
  std::map<int, std::vector<CellBox>> rects;
  /// |fiber(t) symmetric-difference union of rects(t)| in cells.
  std::map<int, std::size_t> symmetric_difference;
};

inline constexpr std::size_t kUnlimitedBudget = static_cast<std::size_t>(-1);

/// Greedy: repeatedly takes the box of fiber cells claiming the most uncovered
/// fiber cells (ties: lexicographically smallest corners), per label, until
/// the fiber is exhausted or `budget` boxes are used.
RectangleCover build_cover(const LabeledGrid& grid, std::size_t budget);

struct Approximant {
  std::vector<int> cell_labels;  // in T, kStar on D \ (labeled part), kOutside off D
  std::vector<std::size_t> mismatch_cells;  // E = D \ union of the disjointified covers
  double epsilon_used = 0.0;
  double mismatch = 0.0;  // mu(E)
  std::size_t budget = 0;
  RectangleCover cover;
  SemilinearFunction function;  // over R^n, fibers "t" and "*"
};

/// Doubles the per-label budget from `start_budget` until mu(E) < epsilon.
/// Throws BudgetCap when `max_budget` is passed first.
Approximant approximate(const LabeledGrid& grid, double epsilon, std::size_t max_budget = 1 << 16,
                        std::size_t start_budget = 1);

struct ChartFamily {
  std::vector<Approximant> charts;
  std::vector<double> residual;  // measure left uncovered after each chart
};

/// Round k approximates on the cells still unresolved with epsilon_0 / 2^k,
/// starting its budget search at twice the budget of round k - 1.
ChartFamily chart_family(const LabeledGrid& grid, double epsilon0, std::size_t depth);

struct MismatchMeasure {
  double wrong = 0.0;  // cells with L(c) in T and L(c) != f(c)
  double star = 0.0;   // cells with L(c) = *
};

MismatchMeasure mismatch_measure(const LabeledGrid& grid, const std::vector<int>& cell_labels);
/// Evaluates L at cell centers; a center outside every fiber counts as *.
MismatchMeasure mismatch_measure(const LabeledGrid& grid, const SemilinearFunction& l);

/// Semilinear function whose fibers are the cell labels (kStar as "*"),
/// each fiber a union of half-open boxes. kOutside cells are left out.
SemilinearFunction grid_function(const LabeledGrid& grid, const std::vector<int>& cell_labels);

}  // namespace logifold
