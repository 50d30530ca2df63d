#include "logifold/semilinear.hpp"

#include <cmath>
#include <set>

#include "logifold/error.hpp"

namespace logifold {

double LinearRow::value(std::span<const double> x) const {
  double acc = b;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * x[i];
  return acc;
}

LinearRow LinearRow::negated() const {
  LinearRow out{a, -b};
  for (double& v : out.a) v = -v;
  return out;
}

LinearRow row_of(const AffineMap& l, std::size_t r) {
  const auto row = l.row(r);
  return {std::vector<double>(row.begin(), row.end()), l.offset(r)};
}

namespace {

Constraint to_constraint(const LinearRow& r, bool strict) { return make_constraint(r.a, r.b, strict); }

Rational exact_value(const LinearRow& r, const RationalPoint& x) {
  Rational acc = r.b;
  for (std::size_t i = 0; i < r.a.size(); ++i) {
    if (r.a[i] != 0.0) acc += Rational(r.a[i]) * x[i];
  }
  return acc;
}

void check_dim(std::size_t dim, std::size_t got) {
  if (dim != got) {
    fail(ErrorCode::DimensionMismatch, "point of dimension " + std::to_string(got) + " for a set in R^" +
                                           std::to_string(dim));
  }
}

}  // namespace

std::vector<Constraint> BasicSemilinearSet::constraints() const {
  std::vector<Constraint> out;
  out.reserve(2 * eq.size() + gt.size() + ge.size());
  for (const LinearRow& r : eq) {
    out.push_back(to_constraint(r, false));
    out.push_back(to_constraint(r.negated(), false));
  }
  for (const LinearRow& r : gt) out.push_back(to_constraint(r, true));
  for (const LinearRow& r : ge) out.push_back(to_constraint(r, false));
  return out;
}

BasicSemilinearSet BasicSemilinearSet::intersect(const BasicSemilinearSet& other) const {
  if (other.dim != dim) fail(ErrorCode::DimensionMismatch, "intersecting sets of different dimension");
  BasicSemilinearSet out = *this;
  out.eq.insert(out.eq.end(), other.eq.begin(), other.eq.end());
  out.gt.insert(out.gt.end(), other.gt.begin(), other.gt.end());
  out.ge.insert(out.ge.end(), other.ge.begin(), other.ge.end());
  return out;
}

bool contains_exact(const BasicSemilinearSet& b, const RationalPoint& x) {
  check_dim(b.dim, x.size());
  for (const LinearRow& r : b.eq) {
    if (sgn(exact_value(r, x)) != 0) return false;
  }
  for (const LinearRow& r : b.gt) {
    if (sgn(exact_value(r, x)) <= 0) return false;
  }
  for (const LinearRow& r : b.ge) {
    if (sgn(exact_value(r, x)) < 0) return false;
  }
  return true;
}

bool contains_exact(const SemilinearSet& s, const RationalPoint& x) {
  check_dim(s.dim, x.size());
  for (const auto& p : s.pieces) {
    if (contains_exact(p, x)) return true;
  }
  return false;
}

bool contains(const BasicSemilinearSet& b, std::span<const double> x, ContainsMode mode) {
  check_dim(b.dim, x.size());
  if (mode == ContainsMode::Rational) return contains_exact(b, to_rational(x));
  for (const LinearRow& r : b.eq) {
    if (!(std::fabs(r.value(x)) <= kEqualityTolerance)) return false;
  }
  for (const LinearRow& r : b.gt) {
    if (!(r.value(x) > 0.0)) return false;
  }
  for (const LinearRow& r : b.ge) {
    if (!(r.value(x) >= 0.0)) return false;
  }
  return true;
}

bool contains(const SemilinearSet& s, std::span<const double> x, ContainsMode mode) {
  check_dim(s.dim, x.size());
  if (mode == ContainsMode::Rational) return contains_exact(s, to_rational(x));
  for (const auto& p : s.pieces) {
    if (contains(p, x, mode)) return true;
  }
  return false;
}

EmptinessCheck check_emptiness(const BasicSemilinearSet& b, bool want_certificate) {
  if (b.dim > kExactDimensionBudget) {
    fail(ErrorCode::DimensionBudgetExceeded, "exact emptiness is limited to " + std::to_string(kExactDimensionBudget) +
                                                 " dimensions, got " + std::to_string(b.dim));
  }
  Feasibility f = solve_system(b.constraints(), b.dim, want_certificate);
  EmptinessCheck out;
  out.empty = !f.feasible;
  out.witness = std::move(f.witness);
  out.certificate = std::move(f.certificate);
  return out;
}

bool is_empty(const BasicSemilinearSet& b) { return check_emptiness(b).empty; }

std::vector<BasicSemilinearSet> to_canonical(const BasicSemilinearSet& b) {
  if (b.ge.size() > 16) fail(ErrorCode::GuardExplosion, "too many weak rows to expand");
  std::vector<BasicSemilinearSet> out;
  BasicSemilinearSet base = b;
  base.ge.clear();
  const std::size_t count = std::size_t{1} << b.ge.size();
  for (std::size_t mask = 0; mask < count; ++mask) {
    BasicSemilinearSet piece = base;
    for (std::size_t i = 0; i < b.ge.size(); ++i) {
      // Bit clear: strict side first, so the all-strict piece comes first.
      if (mask & (std::size_t{1} << (b.ge.size() - 1 - i))) {
        piece.eq.push_back(b.ge[i]);
      } else {
        piece.gt.push_back(b.ge[i]);
      }
    }
    if (!is_empty(piece)) out.push_back(std::move(piece));
  }
  return out;
}

std::optional<std::string> label_of(const SemilinearFunction& f, std::span<const double> x, ContainsMode mode) {
  for (const auto& [label, set] : f.fibers) {
    if (contains(set, x, mode)) return label;
  }
  return std::nullopt;
}

BasicSemilinearSet chamber_set(const AffineMap& l, const SignVector& s) {
  BasicSemilinearSet out;
  out.dim = l.cols();
  for (std::size_t r = 0; r < l.rows(); ++r) {
    if (s[r] == Sign::Plus) {
      out.ge.push_back(row_of(l, r));
    } else {
      out.gt.push_back(row_of(l, r).negated());
    }
  }
  return out;
}

SemilinearFunction from_llgraph(const LogicalGraph& g, std::size_t path_cap) {
  if (count_paths(g, path_cap) > path_cap) {
    fail(ErrorCode::PathExplosion, "graph has more than " + std::to_string(path_cap) + " source-to-target paths");
  }
  SemilinearFunction f;
  f.dim = g.input_dim();
  for (const std::string& label : g.label_set()) f.fibers[label].dim = f.dim;

  struct Frame {
    std::size_t vertex;
    BasicSemilinearSet set;
    std::vector<Constraint> cs;
    RationalPoint witness;
  };
  std::vector<Frame> stack;
  BasicSemilinearSet whole;
  whole.dim = f.dim;
  stack.push_back({g.source(), whole, {}, RationalPoint(f.dim)});
  std::size_t pieces = 0;
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    const auto& outs = g.out_arrows(fr.vertex);
    if (outs.empty()) {
      if (++pieces > path_cap) fail(ErrorCode::PathExplosion, "more than " + std::to_string(path_cap) + " pieces");
      f.fibers[*g.label(fr.vertex)].pieces.push_back(std::move(fr.set));
      continue;
    }
    const auto& guard = g.guard(fr.vertex);
    if (!guard) {
      fr.vertex = g.arrow(outs.front()).dst;
      stack.push_back(std::move(fr));
      continue;
    }
    // Only chambers meeting the current piece survive; the rest are empty.
    auto chambers = enumerate_chambers(*guard, fr.cs, fr.witness);
    for (auto it = chambers.rbegin(); it != chambers.rend(); ++it) {
      auto route = g.routing(fr.vertex).find(it->signs.str());
      if (route == g.routing(fr.vertex).end()) {
        fail(ErrorCode::IncompleteRouting, "sign vector " + it->signs.str() + " has no route at '" +
                                               g.vertex(fr.vertex).id + "'");
      }
      Frame child{g.arrow(route->second).dst, fr.set.intersect(chamber_set(*guard, it->signs)), fr.cs,
                  std::move(it->witness)};
      for (std::size_t r = 0; r < guard->rows(); ++r) child.cs.push_back(side_constraint(*guard, r, it->signs[r]));
      stack.push_back(std::move(child));
    }
  }
  return f;
}

LogicalGraph to_llgraph(const SemilinearFunction& f, const ToGraphOptions& options) {
  std::vector<LinearRow> rows;
  std::set<LinearRow> seen;
  auto collect = [&](const LinearRow& r) {
    if (r.a.size() != f.dim) fail(ErrorCode::DimensionMismatch, "row dimension differs from function dimension");
    if (seen.count(r) || seen.count(r.negated())) return;
    seen.insert(r);
    rows.push_back(r);
  };
  for (const auto& [label, set] : f.fibers) {
    if (set.dim != f.dim) fail(ErrorCode::DimensionMismatch, "fiber '" + label + "' has a different dimension");
    for (const auto& piece : set.pieces) {
      for (const auto& r : piece.eq) collect(r);
      for (const auto& r : piece.gt) collect(r);
      for (const auto& r : piece.ge) collect(r);
    }
  }

  AffineMap guard(2 * rows.size(), f.dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < f.dim; ++c) {
      guard.at(2 * i, c) = rows[i].a[c];
      guard.at(2 * i + 1, c) = -rows[i].a[c];
    }
    guard.offset(2 * i) = rows[i].b;
    guard.offset(2 * i + 1) = -rows[i].b;
  }

  auto fiber_of = [&](const RationalPoint& w) {
    std::optional<std::string> found;
    for (const auto& [label, set] : f.fibers) {
      if (!contains_exact(set, w)) continue;
      if (found) fail(ErrorCode::AmbiguousFiber, "chamber witness " + format_point(to_double(w)) + " lies in fibers '" +
                                                     *found + "' and '" + label + "'");
      found = label;
    }
    return found.value_or(kBottomLabel);
  };

  std::vector<Chamber> chambers;
  if (rows.empty()) {
    chambers.push_back({SignVector(), RationalPoint(f.dim)});
  } else {
    chambers = enumerate_chambers(guard, options.chamber_cap);
  }
  std::vector<std::string> chamber_label;
  chamber_label.reserve(chambers.size());
  for (const Chamber& c : chambers) chamber_label.push_back(fiber_of(c.witness));

  LogicalGraph g(f.dim);
  const std::size_t src = g.add_vertex("source", VertexKind::Source);
  std::map<std::string, std::size_t> arrow_for;
  for (const std::string& label : chamber_label) {
    if (arrow_for.count(label)) continue;
    const std::size_t t = g.add_vertex("t" + std::to_string(arrow_for.size()), VertexKind::Target);
    g.set_label(t, label);
    arrow_for.emplace(label, g.add_arrow(src, t));
  }
  if (arrow_for.size() > 1) {
    g.set_guard(src, guard);
    for (std::size_t i = 0; i < chambers.size(); ++i) g.set_route(src, chambers[i].signs, arrow_for.at(chamber_label[i]));
  }
  return g;
}

}  // namespace logifold
