#include <cmath>

#include "doctest.h"
#include "logifold/uat.hpp"
#include "support.hpp"

using namespace logifold;

namespace {

std::size_t fiber_cells(const LabeledGrid& g, int t) {
  std::size_t n = 0;
  for (int l : g.labels) n += l == t;
  return n;
}

/// Cells of the union of the rectangles for t, counted by brute force.
std::size_t symmetric_difference_oracle(const LabeledGrid& g, const std::vector<CellBox>& boxes, int t) {
  std::size_t diff = 0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto idx = g.unravel(c);
    bool in = false;
    for (const auto& b : boxes) {
      bool inside = true;
      for (std::size_t k = 0; k < idx.size(); ++k) inside = inside && b.lo[k] <= idx[k] && idx[k] < b.hi[k];
      in = in || inside;
    }
    diff += in != (g.labels[c] == t);
  }
  return diff;
}

}  // namespace

TEST_CASE("grid geometry") {
  const LabeledGrid g = diagonal_grid(4);
  CHECK(g.cell_count() == 16);
  CHECK(g.cell_volume() == doctest::Approx(1.0 / 16));
  CHECK(g.ravel(g.unravel(7)) == 7);
  CHECK(g.labels[g.ravel({0, 1})] == 1);
  CHECK(g.labels[g.ravel({1, 0})] == 0);
  CHECK(g.labels[g.ravel({2, 2})] == 0);
  CHECK(g.domain_measure() == doctest::Approx(1.0));
  const Point c = g.cell_center(g.ravel({0, 3}));
  CHECK(c[0] == doctest::Approx(0.125));
  CHECK(c[1] == doctest::Approx(0.875));
}

TEST_CASE("inconsistent grids are rejected") {
  LabeledGrid g = diagonal_grid(4);
  g.labels.pop_back();
  CHECK_CODE(g.check(), ErrorCode::InvalidArgument);
  LabeledGrid h = diagonal_grid(4);
  h.hi[0] = h.lo[0];
  CHECK_CODE(h.check(), ErrorCode::InvalidArgument);
}

TEST_CASE("8x8 diagonal cover with budget 8") {
  const LabeledGrid g = diagonal_grid(8);
  const RectangleCover cover = build_cover(g, 8);
  for (int t : {0, 1}) {
    REQUIRE(cover.rects.count(t));
    CHECK(cover.rects.at(t).size() <= 8);
    const std::size_t diff = symmetric_difference_oracle(g, cover.rects.at(t), t);
    CHECK(diff == cover.symmetric_difference.at(t));
    CHECK(diff <= 8);
  }
}

TEST_CASE("an unlimited budget covers exactly") {
  const LabeledGrid g = diagonal_grid(8);
  const RectangleCover cover = build_cover(g, kUnlimitedBudget);
  for (int t : {0, 1}) CHECK(cover.symmetric_difference.at(t) == 0);
  const RectangleCover one = build_cover(constant_grid({5, 3}, 2), 1);
  CHECK(one.rects.at(2).size() == 1);
  CHECK(one.rects.at(2).front().cells() == 15);
}

TEST_CASE("32x32 approximant") {
  const LabeledGrid g = diagonal_grid(32);
  const double eps = 0.1 * g.domain_measure();
  const Approximant a = approximate(g, eps);
  CHECK(a.mismatch < eps);
  std::size_t agree = 0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (a.cell_labels[c] >= 0) {
      CHECK(a.cell_labels[c] == g.labels[c]);
      ++agree;
    }
  }
  CHECK(static_cast<double>(agree) >= 0.9 * static_cast<double>(g.cell_count()));
  const MismatchMeasure mm = mismatch_measure(g, a.cell_labels);
  CHECK(mm.wrong == 0.0);
  CHECK(mm.star == doctest::Approx(a.mismatch));
}

TEST_CASE("the semilinear approximant remeasures to its own mismatch") {
  const LabeledGrid g = diagonal_grid(16);
  const Approximant a = approximate(g, 0.2);
  const MismatchMeasure mm = mismatch_measure(g, a.function);
  CHECK(mm.wrong == 0.0);
  CHECK(mm.star == doctest::Approx(a.mismatch).epsilon(1e-12));
}

TEST_CASE("budget cap") {
  const LabeledGrid g = diagonal_grid(32);
  CHECK(approximate(g, 1e-6).mismatch == 0.0);
  CHECK_CODE(approximate(g, 0.001, 2), ErrorCode::BudgetCap);
}

TEST_CASE("chart family residuals") {
  const LabeledGrid g = diagonal_grid(32);
  const ChartFamily f = chart_family(g, 0.25 * g.domain_measure(), 6);
  REQUIRE(!f.charts.empty());
  for (std::size_t k = 1; k < f.residual.size(); ++k) CHECK(f.residual[k] < f.residual[k - 1]);
  CHECK(f.residual.back() == 0.0);
  for (const auto& chart : f.charts) {
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      if (chart.cell_labels[c] >= 0) CHECK(chart.cell_labels[c] == g.labels[c]);
    }
  }
  CHECK_CODE(chart_family(g, 0.1, 0), ErrorCode::InvalidArgument);
}

TEST_CASE("cells outside the domain are ignored") {
  LabeledGrid g = diagonal_grid(8);
  for (std::size_t c = 0; c < 8; ++c) g.labels[c] = kOutside;
  CHECK(g.domain_measure() == doctest::Approx(56.0 / 64));
  CHECK(fiber_cells(g, kOutside) == 8);
  const Approximant a = approximate(g, 0.05);
  for (std::size_t c = 0; c < 8; ++c) CHECK(a.cell_labels[c] == kOutside);
  CHECK(mismatch_measure(g, a.cell_labels).wrong == 0.0);
}
