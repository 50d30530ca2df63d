#include "logifold/uat.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "logifold/error.hpp"

namespace logifold {

std::size_t LabeledGrid::cell_count() const {
  std::size_t n = 1;
  for (std::size_t r : resolution) n *= r;
  return n;
}

double LabeledGrid::cell_volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < dims(); ++k) v *= (hi[k] - lo[k]) / static_cast<double>(resolution[k]);
  return v;
}

std::vector<std::size_t> LabeledGrid::unravel(std::size_t cell) const {
  std::vector<std::size_t> idx(dims());
  for (std::size_t k = dims(); k-- > 0;) {
    idx[k] = cell % resolution[k];
    cell /= resolution[k];
  }
  return idx;
}

std::size_t LabeledGrid::ravel(const std::vector<std::size_t>& index) const {
  std::size_t cell = 0;
  for (std::size_t k = 0; k < dims(); ++k) cell = cell * resolution[k] + index[k];
  return cell;
}

double LabeledGrid::boundary(std::size_t axis, std::size_t i) const {
  if (i == resolution[axis]) return hi[axis];
  return lo[axis] + (hi[axis] - lo[axis]) * static_cast<double>(i) / static_cast<double>(resolution[axis]);
}

Point LabeledGrid::cell_center(std::size_t cell) const {
  const auto idx = unravel(cell);
  Point p(dims());
  for (std::size_t k = 0; k < dims(); ++k) p[k] = 0.5 * (boundary(k, idx[k]) + boundary(k, idx[k] + 1));
  return p;
}

double LabeledGrid::domain_measure() const {
  const auto n = std::count_if(labels.begin(), labels.end(), [](int l) { return l != kOutside; });
  return static_cast<double>(n) * cell_volume();
}

void LabeledGrid::check() const {
  if (resolution.empty() || lo.size() != resolution.size() || hi.size() != resolution.size()) {
    fail(ErrorCode::InvalidArgument, "grid box and resolution disagree in dimension");
  }
  for (std::size_t k = 0; k < dims(); ++k) {
    if (resolution[k] == 0) fail(ErrorCode::InvalidArgument, "grid resolution must be at least 1 per axis");
    if (!(hi[k] > lo[k])) fail(ErrorCode::InvalidArgument, "grid box has an empty side");
  }
  if (labels.size() != cell_count()) {
    fail(ErrorCode::InvalidArgument, "grid has " + std::to_string(labels.size()) + " labels for " +
                                         std::to_string(cell_count()) + " cells");
  }
  for (int l : labels) {
    if (l < 0 && l != kOutside) fail(ErrorCode::InvalidArgument, "grid labels must be nonnegative or OUTSIDE");
  }
}

LabeledGrid diagonal_grid(std::size_t res) {
  LabeledGrid g{{0.0, 0.0}, {1.0, 1.0}, {res, res}, std::vector<int>(res * res)};
  for (std::size_t i = 0; i < res; ++i) {
    for (std::size_t j = 0; j < res; ++j) g.labels[i * res + j] = j > i ? 1 : 0;
  }
  return g;
}

LabeledGrid constant_grid(const std::vector<std::size_t>& resolution, int label) {
  LabeledGrid g{std::vector<double>(resolution.size(), 0.0), std::vector<double>(resolution.size(), 1.0), resolution, {}};
  g.labels.assign(g.cell_count(), label);
  return g;
}

std::size_t CellBox::cells() const {
  std::size_t n = 1;
  for (std::size_t k = 0; k < lo.size(); ++k) n *= hi[k] - lo[k];
  return n;
}

namespace {

// n-dimensional summed-area table over (r_1 + 1) x ... x (r_n + 1) corners.
class PrefixSum {
 public:
  PrefixSum(const std::vector<std::size_t>& resolution, const std::vector<int>& values) : ext_(resolution) {
    for (auto& e : ext_) ++e;
    std::size_t total = 1;
    for (std::size_t e : ext_) total *= e;
    sums_.assign(total, 0);
    stride_.assign(ext_.size(), 1);
    for (std::size_t k = ext_.size() - 1; k-- > 0;) stride_[k] = stride_[k + 1] * ext_[k + 1];
    // Place values at corner index + 1, then sweep each axis.
    for (std::size_t cell = 0; cell < values.size(); ++cell) {
      std::size_t rem = cell, pos = 0;
      for (std::size_t k = ext_.size(); k-- > 0;) {
        const std::size_t r = ext_[k] - 1;
        pos += (rem % r + 1) * stride_[k];
        rem /= r;
      }
      sums_[pos] = values[cell];
    }
    for (std::size_t k = 0; k < ext_.size(); ++k) {
      for (std::size_t pos = 0; pos < total; ++pos) {
        if ((pos / stride_[k]) % ext_[k] != 0) sums_[pos] += sums_[pos - stride_[k]];
      }
    }
  }

  long long box(const std::vector<std::size_t>& lo, const std::vector<std::size_t>& hi) const {
    const std::size_t n = ext_.size();
    long long total = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      std::size_t pos = 0;
      int parity = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (mask & (std::size_t{1} << k)) {
          pos += lo[k] * stride_[k];
          ++parity;
        } else {
          pos += hi[k] * stride_[k];
        }
      }
      total += (parity % 2 ? -1 : 1) * sums_[pos];
    }
    return total;
  }

 private:
  std::vector<std::size_t> ext_;
  std::vector<std::size_t> stride_;
  std::vector<long long> sums_;
};

// Visits every index box in lexicographic order of (lo, hi) per axis.
template <class F>
void for_each_box(const std::vector<std::size_t>& resolution, F&& visit) {
  const std::size_t n = resolution.size();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> choices(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < resolution[k]; ++a) {
      for (std::size_t b = a + 1; b <= resolution[k]; ++b) choices[k].emplace_back(a, b);
    }
  }
  std::vector<std::size_t> pick(n, 0);
  CellBox box{std::vector<std::size_t>(n), std::vector<std::size_t>(n)};
  while (true) {
    for (std::size_t k = 0; k < n; ++k) std::tie(box.lo[k], box.hi[k]) = choices[k][pick[k]];
    visit(box);
    std::size_t k = n;
    while (k-- > 0) {
      if (++pick[k] < choices[k].size()) break;
      pick[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
}

void mark_box(const LabeledGrid& grid, const CellBox& box, std::vector<int>& flags, int value) {
  const std::size_t n = grid.dims();
  std::vector<std::size_t> idx = box.lo;
  while (true) {
    flags[grid.ravel(idx)] = value;
    std::size_t k = n;
    while (k-- > 0) {
      if (++idx[k] < box.hi[k]) break;
      idx[k] = box.lo[k];
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
}

std::string label_name(int l) { return l == kStar ? "*" : std::to_string(l); }

}  // namespace

namespace {

struct GreedyRun {
  std::map<int, std::vector<CellBox>> rects;
  std::map<int, std::vector<std::size_t>> gains;  // uncovered cells claimed by each box
  std::map<int, std::size_t> fiber_size;
};

// Greedy order is independent of the budget, so one run serves every prefix.
GreedyRun greedy_cover(const LabeledGrid& grid, std::size_t budget) {
  std::set<int> labels;
  for (int l : grid.labels) {
    if (l != kOutside) labels.insert(l);
  }
  GreedyRun run;
  for (int t : labels) {
    std::vector<int> fiber(grid.cell_count()), uncovered(grid.cell_count());
    std::size_t remaining = 0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      fiber[c] = uncovered[c] = grid.labels[c] == t;
      remaining += fiber[c];
    }
    run.fiber_size[t] = remaining;
    const PrefixSum in_fiber(grid.resolution, fiber);
    auto& rects = run.rects[t];
    auto& gains = run.gains[t];
    while (remaining > 0 && rects.size() < budget) {
      PrefixSum fresh(grid.resolution, uncovered);
      long long best_gain = 0;
      std::size_t best_area = 0;
      CellBox best;
      for_each_box(grid.resolution, [&](const CellBox& box) {
        const std::size_t area = box.cells();
        if (static_cast<std::size_t>(in_fiber.box(box.lo, box.hi)) != area) return;
        const long long gain = fresh.box(box.lo, box.hi);
        if (gain > best_gain || (gain == best_gain && gain > 0 && area > best_area)) {
          best_gain = gain;
          best_area = area;
          best = box;
        }
      });
      mark_box(grid, best, uncovered, 0);
      remaining -= static_cast<std::size_t>(best_gain);
      rects.push_back(best);
      gains.push_back(static_cast<std::size_t>(best_gain));
    }
  }
  return run;
}

RectangleCover truncate(const GreedyRun& run, std::size_t budget) {
  RectangleCover cover;
  for (const auto& [t, rects] : run.rects) {
    const std::size_t k = std::min(budget, rects.size());
    cover.rects[t].assign(rects.begin(), rects.begin() + static_cast<std::ptrdiff_t>(k));
    std::size_t covered = 0;
    for (std::size_t i = 0; i < k; ++i) covered += run.gains.at(t)[i];
    cover.symmetric_difference[t] = run.fiber_size.at(t) - covered;
  }
  return cover;
}

}  // namespace

RectangleCover build_cover(const LabeledGrid& grid, std::size_t budget) {
  grid.check();
  if (budget == 0) fail(ErrorCode::InvalidArgument, "cover budget must be at least 1");
  return truncate(greedy_cover(grid, budget), budget);
}

SemilinearFunction grid_function(const LabeledGrid& grid, const std::vector<int>& cell_labels) {
  LabeledGrid relabeled = grid;
  relabeled.labels = cell_labels;
  // Shift * to a nonnegative code so the exact cover can treat it as a label.
  int star_code = 0;
  for (int l : cell_labels) star_code = std::max(star_code, l + 1);
  for (int& l : relabeled.labels) {
    if (l == kStar) l = star_code;
  }
  const RectangleCover exact = build_cover(relabeled, kUnlimitedBudget);
  SemilinearFunction f;
  f.dim = grid.dims();
  for (const auto& [code, boxes] : exact.rects) {
    const bool is_star = code == star_code && std::find(cell_labels.begin(), cell_labels.end(), kStar) != cell_labels.end();
    SemilinearSet& set = f.fibers[label_name(is_star ? kStar : code)];
    set.dim = f.dim;
    for (const CellBox& box : boxes) {
      BasicSemilinearSet piece;
      piece.dim = f.dim;
      for (std::size_t k = 0; k < f.dim; ++k) {
        LinearRow above{std::vector<double>(f.dim, 0.0), -grid.boundary(k, box.lo[k])};
        above.a[k] = 1.0;
        LinearRow below{std::vector<double>(f.dim, 0.0), grid.boundary(k, box.hi[k])};
        below.a[k] = -1.0;
        piece.gt.push_back(std::move(above));
        piece.ge.push_back(std::move(below));
      }
      set.pieces.push_back(std::move(piece));
    }
  }
  return f;
}

Approximant approximate(const LabeledGrid& grid, double epsilon, std::size_t max_budget, std::size_t start_budget) {
  grid.check();
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  const double vol = grid.cell_volume();
  const GreedyRun run = greedy_cover(grid, max_budget);
  if (start_budget == 0) fail(ErrorCode::InvalidArgument, "start budget must be at least 1");
  for (std::size_t budget = start_budget;; budget *= 2) {
    if (budget > max_budget) {
      fail(ErrorCode::BudgetCap, "epsilon " + format_double(epsilon) + " not reached within " +
                                     std::to_string(max_budget) + " rectangles per label");
    }
    Approximant a;
    a.cover = truncate(run, budget);
    a.budget = budget;
    a.epsilon_used = epsilon;
    // S_t as cell sets, then drop S_* (cells claimed by two labels).
    std::vector<int> owner(grid.cell_count(), kOutside);
    std::vector<int> claims(grid.cell_count(), 0);
    for (const auto& [t, boxes] : a.cover.rects) {
      std::vector<int> in(grid.cell_count(), 0);
      for (const CellBox& box : boxes) mark_box(grid, box, in, 1);
      for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        if (!in[c]) continue;
        ++claims[c];
        owner[c] = t;
      }
    }
    a.cell_labels.assign(grid.cell_count(), kOutside);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      if (grid.labels[c] == kOutside) continue;
      if (claims[c] == 1) {
        a.cell_labels[c] = owner[c];
      } else {
        a.cell_labels[c] = kStar;
        a.mismatch_cells.push_back(c);
      }
    }
    a.mismatch = static_cast<double>(a.mismatch_cells.size()) * vol;
    const bool exhausted = std::all_of(a.cover.symmetric_difference.begin(), a.cover.symmetric_difference.end(),
                                       [](const auto& kv) { return kv.second == 0; });
    if (a.mismatch < epsilon || exhausted) {
      if (!(a.mismatch < epsilon)) {
        fail(ErrorCode::BudgetCap, "exact cover still leaves measure " + format_double(a.mismatch));
      }
      a.function = grid_function(grid, a.cell_labels);
      return a;
    }
  }
}

ChartFamily chart_family(const LabeledGrid& grid, double epsilon0, std::size_t depth) {
  grid.check();
  if (depth == 0) fail(ErrorCode::InvalidArgument, "chart family depth must be at least 1");
  ChartFamily family;
  LabeledGrid residual = grid;
  double eps = epsilon0;
  std::size_t budget = 1;
  for (std::size_t k = 0; k < depth; ++k) {
    Approximant a = approximate(residual, eps, std::max<std::size_t>(1 << 16, budget), budget);
    budget = 2 * a.budget;
    LabeledGrid next = residual;
    std::size_t left = 0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      if (a.cell_labels[c] != kStar) next.labels[c] = kOutside;
      left += a.cell_labels[c] == kStar;
    }
    family.residual.push_back(static_cast<double>(left) * grid.cell_volume());
    family.charts.push_back(std::move(a));
    if (left == 0) break;
    residual = std::move(next);
    eps /= 2.0;
  }
  return family;
}

MismatchMeasure mismatch_measure(const LabeledGrid& grid, const std::vector<int>& cell_labels) {
  if (cell_labels.size() != grid.cell_count()) fail(ErrorCode::DimensionMismatch, "label vector does not match grid");
  MismatchMeasure m;
  const double vol = grid.cell_volume();
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    if (grid.labels[c] == kOutside) continue;
    if (cell_labels[c] == kStar) {
      m.star += vol;
    } else if (cell_labels[c] != grid.labels[c]) {
      m.wrong += vol;
    }
  }
  return m;
}

MismatchMeasure mismatch_measure(const LabeledGrid& grid, const SemilinearFunction& l) {
  if (l.dim != grid.dims()) fail(ErrorCode::DimensionMismatch, "function dimension does not match grid");
  std::vector<int> labels(grid.cell_count(), kStar);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto name = label_of(l, grid.cell_center(c));
    if (!name || *name == "*") continue;
    labels[c] = std::stoi(*name);
  }
  return mismatch_measure(grid, labels);
}

}  // namespace logifold
