#include "logifold/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "logifold/error.hpp"
#include "logifold/exact.hpp"

namespace logifold {

// ---- state spaces ----

StateSpace StateSpace::cube(std::size_t n) { return {std::vector<std::size_t>(n, 1)}; }
StateSpace StateSpace::simplex(std::size_t d) { return {{d}}; }

std::size_t StateSpace::ambient_dim() const {
  std::size_t n = 0;
  for (std::size_t d : factors) n += d + 1;
  return n;
}

std::size_t StateSpace::reduced_dim() const {
  std::size_t n = 0;
  for (std::size_t d : factors) n += d;
  return n;
}

std::size_t StateSpace::ambient_offset(std::size_t factor) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < factor; ++k) n += factors.at(k) + 1;
  return n;
}

std::size_t StateSpace::reduced_offset(std::size_t factor) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < factor; ++k) n += factors.at(k);
  return n;
}

std::size_t StateSpace::corner_count() const {
  std::size_t n = 1;
  for (std::size_t d : factors) n *= d + 1;
  return n;
}

Point StateSpace::reduce(std::span<const double> point) const {
  if (point.size() != ambient_dim()) {
    fail(ErrorCode::DimensionMismatch, "state of size " + std::to_string(point.size()) + " for " + str());
  }
  Point out;
  out.reserve(reduced_dim());
  std::size_t o = 0;
  for (std::size_t d : factors) {
    for (std::size_t i = 1; i <= d; ++i) out.push_back(point[o + i]);
    o += d + 1;
  }
  return out;
}

Point StateSpace::lift(std::span<const double> reduced) const {
  if (reduced.size() != reduced_dim()) {
    fail(ErrorCode::DimensionMismatch, "reduced point of size " + std::to_string(reduced.size()) + " for " + str());
  }
  Point out;
  out.reserve(ambient_dim());
  std::size_t o = 0;
  for (std::size_t d : factors) {
    double rest = 1.0;
    for (std::size_t i = 0; i < d; ++i) rest -= reduced[o + i];
    out.push_back(rest);
    out.insert(out.end(), reduced.begin() + o, reduced.begin() + o + d);
    o += d;
  }
  return out;
}

bool StateSpace::contains(std::span<const double> point, double tol) const {
  if (point.size() != ambient_dim()) return false;
  std::size_t o = 0;
  for (std::size_t d : factors) {
    double total = 0.0;
    for (std::size_t i = 0; i <= d; ++i) {
      if (!(point[o + i] >= -tol)) return false;
      total += point[o + i];
    }
    if (!(std::fabs(total - 1.0) <= tol)) return false;
    o += d + 1;
  }
  return true;
}

std::string StateSpace::str() const {
  if (factors.empty()) return "()";
  std::string s;
  for (std::size_t k = 0; k < factors.size(); ++k) s += (k ? "xS^" : "S^") + std::to_string(factors[k]);
  return s;
}

StateSpace StateSpace::concat(const StateSpace& other) const {
  StateSpace out = *this;
  out.factors.insert(out.factors.end(), other.factors.begin(), other.factors.end());
  return out;
}

StateSpace StateSpace::slice(std::size_t first, std::size_t count) const {
  if (first + count > factors.size()) fail(ErrorCode::StateSpaceMismatch, "factor run outside " + str());
  return {std::vector<std::size_t>(factors.begin() + first, factors.begin() + first + count)};
}

// ---- arrow maps ----

namespace {

constexpr std::pair<MapKind, std::string_view> kMapNames[] = {
    {MapKind::Identity, "IDENTITY"},           {MapKind::AffineSigmoid, "AFFINE_SIGMOID"},
    {MapKind::AffineSoftmax, "AFFINE_SOFTMAX"}, {MapKind::Project, "PROJECT"},
    {MapKind::Diagonal, "DIAGONAL"},           {MapKind::Constant, "CONSTANT"},
    {MapKind::CoordProduct, "COORD_PRODUCT"},  {MapKind::Min, "MIN"},
    {MapKind::Max, "MAX"},                     {MapKind::Block, "BLOCK"},
};

[[noreturn]] void mismatch(const ArrowMap& m, const StateSpace& in, const std::string& why) {
  fail(ErrorCode::StateSpaceMismatch, std::string(to_string(m.kind)) + " on " + in.str() + ": " + why);
}

}  // namespace

std::string_view to_string(MapKind k) {
  for (const auto& [kind, name] : kMapNames) {
    if (kind == k) return name;
  }
  return "IDENTITY";
}

MapKind map_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kMapNames) {
    if (name == s) return kind;
  }
  fail(ErrorCode::InvalidArgument, "unknown arrow map kind '" + std::string(s) + "'");
}

ArrowMap ArrowMap::identity() { return {}; }

ArrowMap ArrowMap::affine_sigmoid(AffineMap a) {
  ArrowMap m;
  m.kind = MapKind::AffineSigmoid;
  m.affine = std::move(a);
  return m;
}

ArrowMap ArrowMap::affine_softmax(AffineMap a) {
  ArrowMap m;
  m.kind = MapKind::AffineSoftmax;
  m.affine = std::move(a);
  return m;
}

ArrowMap ArrowMap::project(std::vector<std::size_t> factors) {
  ArrowMap m;
  m.kind = MapKind::Project;
  m.indices = std::move(factors);
  return m;
}

ArrowMap ArrowMap::diagonal(std::size_t copies) {
  ArrowMap m;
  m.kind = MapKind::Diagonal;
  m.copies = copies;
  return m;
}

ArrowMap ArrowMap::constant(StateSpace space, Point point) {
  ArrowMap m;
  m.kind = MapKind::Constant;
  m.space = std::move(space);
  m.point = std::move(point);
  return m;
}

ArrowMap ArrowMap::coord_product(std::vector<std::size_t> corner) {
  ArrowMap m;
  m.kind = MapKind::CoordProduct;
  m.indices = std::move(corner);
  return m;
}

ArrowMap ArrowMap::min() {
  ArrowMap m;
  m.kind = MapKind::Min;
  return m;
}

ArrowMap ArrowMap::max() {
  ArrowMap m;
  m.kind = MapKind::Max;
  return m;
}

ArrowMap ArrowMap::block(std::size_t first, std::size_t count, ArrowMap inner) {
  ArrowMap m;
  m.kind = MapKind::Block;
  m.first = first;
  m.count = count;
  m.inner = std::make_shared<const ArrowMap>(std::move(inner));
  return m;
}

bool ArrowMap::operator==(const ArrowMap& o) const {
  if (kind != o.kind || !(affine == o.affine) || indices != o.indices || copies != o.copies || first != o.first ||
      count != o.count || !(space == o.space) || point != o.point) {
    return false;
  }
  if (!inner || !o.inner) return !inner && !o.inner;
  return *inner == *o.inner;
}

StateSpace output_space(const ArrowMap& m, const StateSpace& in) {
  switch (m.kind) {
    case MapKind::Identity:
      return in;
    case MapKind::AffineSigmoid:
    case MapKind::AffineSoftmax:
      if (m.affine.cols() != in.reduced_dim()) {
        mismatch(m, in, "affine map takes " + std::to_string(m.affine.cols()) + " coordinates");
      }
      if (m.affine.rows() == 0) mismatch(m, in, "affine map has no rows");
      return m.kind == MapKind::AffineSigmoid ? StateSpace::cube(m.affine.rows())
                                              : StateSpace::simplex(m.affine.rows() - 1);
    case MapKind::Project: {
      StateSpace out;
      for (std::size_t k : m.indices) {
        if (k >= in.factor_count()) mismatch(m, in, "factor " + std::to_string(k) + " out of range");
        out.factors.push_back(in.factors[k]);
      }
      if (out.factors.empty()) mismatch(m, in, "keeps no factor");
      return out;
    }
    case MapKind::Diagonal: {
      if (m.copies == 0) mismatch(m, in, "zero copies");
      StateSpace out;
      for (std::size_t c = 0; c < m.copies; ++c) out = out.concat(in);
      return out;
    }
    case MapKind::Constant:
      if (!m.space.contains(m.point)) mismatch(m, in, "constant point is not in " + m.space.str());
      return m.space;
    case MapKind::CoordProduct:
      if (m.indices.size() != in.factor_count()) mismatch(m, in, "corner has the wrong length");
      for (std::size_t k = 0; k < m.indices.size(); ++k) {
        if (m.indices[k] > in.factors[k]) mismatch(m, in, "corner index out of range");
      }
      return StateSpace::cube(1);
    case MapKind::Min:
    case MapKind::Max:
      if (in.factors.empty()) mismatch(m, in, "no factors");
      for (std::size_t d : in.factors) {
        if (d != 1) mismatch(m, in, "needs a product of intervals");
      }
      return StateSpace::cube(1);
    case MapKind::Block: {
      if (!m.inner) mismatch(m, in, "missing inner map");
      const StateSpace mid = output_space(*m.inner, in.slice(m.first, m.count));
      return in.slice(0, m.first).concat(mid).concat(in.slice(m.first + m.count, in.factor_count() - m.first - m.count));
    }
  }
  return in;
}

Point apply_map(const ArrowMap& m, const StateSpace& in, std::span<const double> point) {
  if (point.size() != in.ambient_dim()) {
    fail(ErrorCode::DimensionMismatch, "state of size " + std::to_string(point.size()) + " for " + in.str());
  }
  switch (m.kind) {
    case MapKind::Identity:
      return Point(point.begin(), point.end());
    case MapKind::AffineSigmoid: {
      output_space(m, in);
      const Point r = in.reduce(point);
      Point out;
      out.reserve(2 * m.affine.rows());
      for (std::size_t i = 0; i < m.affine.rows(); ++i) {
        const double s = sigmoid(m.affine.row_value(i, r));
        out.push_back(1.0 - s);
        out.push_back(s);
      }
      return out;
    }
    case MapKind::AffineSoftmax:
      output_space(m, in);
      return softmax(m.affine.apply(in.reduce(point)));
    case MapKind::Project: {
      output_space(m, in);
      Point out;
      for (std::size_t k : m.indices) {
        const std::size_t o = in.ambient_offset(k);
        out.insert(out.end(), point.begin() + o, point.begin() + o + in.factors[k] + 1);
      }
      return out;
    }
    case MapKind::Diagonal: {
      output_space(m, in);
      Point out;
      out.reserve(point.size() * m.copies);
      for (std::size_t c = 0; c < m.copies; ++c) out.insert(out.end(), point.begin(), point.end());
      return out;
    }
    case MapKind::Constant:
      output_space(m, in);
      return m.point;
    case MapKind::CoordProduct: {
      output_space(m, in);
      const double p = corner_probability(in, point, m.indices);
      return {1.0 - p, p};
    }
    case MapKind::Min:
    case MapKind::Max: {
      output_space(m, in);
      double v = point[1];
      for (std::size_t k = 1; k < in.factor_count(); ++k) {
        v = m.kind == MapKind::Min ? std::min(v, point[2 * k + 1]) : std::max(v, point[2 * k + 1]);
      }
      return {1.0 - v, v};
    }
    case MapKind::Block: {
      output_space(m, in);
      const std::size_t lo = in.ambient_offset(m.first);
      const std::size_t hi = in.ambient_offset(m.first + m.count);
      const Point mid = apply_map(*m.inner, in.slice(m.first, m.count), point.subspan(lo, hi - lo));
      Point out(point.begin(), point.begin() + lo);
      out.insert(out.end(), mid.begin(), mid.end());
      out.insert(out.end(), point.begin() + hi, point.end());
      return out;
    }
  }
  return Point(point.begin(), point.end());
}

AffineMap to_reduced(const AffineMap& ambient, const StateSpace& space) {
  if (ambient.cols() != space.ambient_dim()) {
    fail(ErrorCode::DimensionMismatch, "affine map takes " + std::to_string(ambient.cols()) + " coordinates, " +
                                           space.str() + " has " + std::to_string(space.ambient_dim()));
  }
  // y_0 = 1 - (y_1 + ... + y_d) in every factor.
  AffineMap out(ambient.rows(), space.reduced_dim());
  for (std::size_t r = 0; r < ambient.rows(); ++r) {
    out.offset(r) = ambient.offset(r);
    for (std::size_t k = 0; k < space.factor_count(); ++k) {
      const std::size_t ao = space.ambient_offset(k);
      const std::size_t ro = space.reduced_offset(k);
      out.offset(r) += ambient.at(r, ao);
      for (std::size_t i = 1; i <= space.factors[k]; ++i) out.at(r, ro + i - 1) = ambient.at(r, ao + i) - ambient.at(r, ao);
    }
  }
  return out;
}

// ---- graph ----

std::size_t FuzzyLogicalGraph::add_vertex(std::string id, VertexKind kind, StateSpace space) {
  if (vertex_index_.count(id)) fail(ErrorCode::InvalidArgument, "duplicate vertex id '" + id + "'");
  const std::size_t v = vertices_.size();
  vertex_index_.emplace(id, v);
  vertices_.push_back({std::move(id), kind, std::move(space)});
  out_.emplace_back();
  in_degree_.push_back(0);
  guards_.emplace_back();
  routing_.emplace_back();
  return v;
}

std::size_t FuzzyLogicalGraph::add_arrow(std::string id, std::size_t src, std::size_t dst, ArrowMap map) {
  if (src >= vertices_.size() || dst >= vertices_.size()) fail(ErrorCode::InvalidArgument, "arrow endpoint out of range");
  if (arrow_index_.count(id)) fail(ErrorCode::InvalidArgument, "duplicate arrow id '" + id + "'");
  const std::size_t a = arrows_.size();
  arrow_index_.emplace(id, a);
  arrows_.push_back({std::move(id), src, dst, std::move(map)});
  out_[src].push_back(a);
  ++in_degree_[dst];
  return a;
}

std::size_t FuzzyLogicalGraph::add_arrow(std::size_t src, std::size_t dst, ArrowMap map) {
  std::string id = "a" + std::to_string(arrows_.size());
  while (arrow_index_.count(id)) id += "'";
  return add_arrow(std::move(id), src, dst, std::move(map));
}

void FuzzyLogicalGraph::set_guard(std::size_t v, AffineMap guard) {
  const std::size_t n = vertices_.at(v).space.reduced_dim();
  if (guard.cols() != n) {
    fail(ErrorCode::DimensionMismatch, "guard at '" + vertices_[v].id + "' takes " + std::to_string(guard.cols()) +
                                           " coordinates, state space has " + std::to_string(n));
  }
  guards_[v] = std::move(guard);
}

void FuzzyLogicalGraph::set_route(std::size_t v, const SignVector& s, std::size_t arrow) {
  if (arrow >= arrows_.size() || arrows_[arrow].src != v) {
    fail(ErrorCode::InvalidArgument, "route at '" + vertices_.at(v).id + "' names a foreign arrow");
  }
  routing_.at(v)[s.str()] = arrow;
}

void FuzzyLogicalGraph::set_input_box(std::optional<InputBox> box) {
  if (box) {
    if (box->lo.size() != box->hi.size()) fail(ErrorCode::DimensionMismatch, "input box corners differ in size");
    for (std::size_t i = 0; i < box->lo.size(); ++i) {
      if (!(box->lo[i] < box->hi[i])) fail(ErrorCode::InvalidArgument, "input box is empty along axis " + std::to_string(i));
    }
  }
  box_ = std::move(box);
}

std::optional<std::size_t> FuzzyLogicalGraph::find_vertex(const std::string& id) const {
  auto it = vertex_index_.find(id);
  if (it == vertex_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FuzzyLogicalGraph::find_arrow(const std::string& id) const {
  auto it = arrow_index_.find(id);
  if (it == arrow_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FuzzyLogicalGraph::source() const {
  std::vector<std::size_t> roots;
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    if (in_degree_[v] == 0) roots.push_back(v);
  }
  if (roots.size() == 1) return roots.front();
  if (roots.empty()) fail(ErrorCode::CyclicGraph, "graph has no vertex without incoming arrows");
  std::string ids;
  for (std::size_t v : roots) ids += (ids.empty() ? "" : ", ") + vertices_[v].id;
  fail(ErrorCode::MultipleSources, "vertices without incoming arrows: " + ids);
}

std::vector<std::size_t> FuzzyLogicalGraph::targets() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    if (vertices_[v].kind == VertexKind::Target) out.push_back(v);
  }
  return out;
}

Point FuzzyLogicalGraph::encode_input(std::span<const double> x) const {
  const StateSpace& in = input_space();
  if (!box_) return in.lift(x);
  if (x.size() != box_->lo.size() || !(in == StateSpace::cube(x.size()))) {
    fail(ErrorCode::DimensionMismatch, "input box of dimension " + std::to_string(box_->lo.size()) + " for " + in.str());
  }
  Point u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = (x[i] - box_->lo[i]) / (box_->hi[i] - box_->lo[i]);
  return in.lift(u);
}

std::size_t FuzzyLogicalGraph::choose_arrow(std::size_t v, std::span<const double> state) const {
  const auto& outs = out_.at(v);
  if (!guards_[v]) {
    if (outs.empty()) fail(ErrorCode::DanglingVertex, "walk stopped at '" + vertices_[v].id + "'");
    return outs.front();
  }
  const SignVector s = sign_vector(*guards_[v], vertices_[v].space.reduce(state));
  auto it = routing_[v].find(s.str());
  if (it == routing_[v].end()) {
    fail(ErrorCode::UnknownSignVector, "sign vector " + s.str() + " has no route at '" + vertices_[v].id + "'");
  }
  return it->second;
}

// ---- validation ----

namespace {

std::vector<std::size_t> topological_order(const FuzzyLogicalGraph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> indeg(n);
  for (std::size_t v = 0; v < n; ++v) indeg[v] = g.in_degree(v);
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.insert(v);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (std::size_t a : g.out_arrows(v)) {
      if (--indeg[g.arrow(a).dst] == 0) ready.insert(g.arrow(a).dst);
    }
  }
  if (order.size() != n) {
    std::string ids;
    for (std::size_t v = 0; v < n; ++v) {
      if (indeg[v] > 0) ids += (ids.empty() ? "" : ", ") + g.vertex(v).id;
    }
    fail(ErrorCode::CyclicGraph, "vertices on or behind an oriented cycle: " + ids);
  }
  return order;
}

// Reachable states at a vertex, over-approximated by a polyhedron in reduced
// coordinates with a point inside.
struct Piece {
  std::vector<Constraint> cs;
  RationalPoint witness;
};

Piece whole_space(const StateSpace& s) {
  Piece p;
  const std::size_t n = s.reduced_dim();
  for (std::size_t k = 0; k < s.factor_count(); ++k) {
    const std::size_t o = s.reduced_offset(k);
    const std::size_t d = s.factors[k];
    Constraint cap{std::vector<Rational>(n), Rational(1), false};
    for (std::size_t i = 0; i < d; ++i) {
      Constraint c{std::vector<Rational>(n), Rational(0), false};
      c.a[o + i] = 1;
      p.cs.push_back(std::move(c));
      cap.a[o + i] = -1;
    }
    if (d > 0) p.cs.push_back(std::move(cap));
  }
  p.witness.resize(n);
  for (std::size_t k = 0; k < s.factor_count(); ++k) {
    for (std::size_t i = 0; i < s.factors[k]; ++i) p.witness[s.reduced_offset(k) + i] = Rational(1, s.factors[k] + 1);
  }
  return p;
}

// Constraint c restricted to coordinates [lo, lo + len), if it only involves those.
bool supported_in(const Constraint& c, std::size_t lo, std::size_t len) {
  for (std::size_t i = 0; i < c.a.size(); ++i) {
    if ((i < lo || i >= lo + len) && sgn(c.a[i]) != 0) return false;
  }
  return true;
}

Piece carry(const Piece& p, const ArrowMap& m, const StateSpace& in) {
  const StateSpace out = output_space(m, in);
  if (m.kind == MapKind::Identity) return p;
  if (m.kind == MapKind::Block && m.inner->kind == MapKind::Identity) return p;
  if (m.kind == MapKind::Block) {
    const std::size_t ro = in.reduced_offset(m.first);
    const std::size_t rd = in.slice(m.first, m.count).reduced_dim();
    const StateSpace mid = output_space(*m.inner, in.slice(m.first, m.count));
    const std::size_t nd = mid.reduced_dim();
    auto shift = [&](const std::vector<Rational>& a) {
      std::vector<Rational> b(a.begin(), a.begin() + ro);
      b.resize(ro + nd);
      b.insert(b.end(), a.begin() + ro + rd, a.end());
      return b;
    };
    Piece q;
    for (const Constraint& c : p.cs) {
      bool touches = false;
      for (std::size_t i = ro; i < ro + rd; ++i) touches = touches || sgn(c.a[i]) != 0;
      if (!touches) q.cs.push_back({shift(c.a), c.b, c.strict});
    }
    const Piece fresh = whole_space(mid);
    for (const Constraint& c : fresh.cs) {
      std::vector<Rational> a(ro);
      a.insert(a.end(), c.a.begin(), c.a.end());
      a.resize(out.reduced_dim());
      q.cs.push_back({std::move(a), c.b, c.strict});
    }
    q.witness.assign(p.witness.begin(), p.witness.begin() + ro);
    q.witness.insert(q.witness.end(), fresh.witness.begin(), fresh.witness.end());
    q.witness.insert(q.witness.end(), p.witness.begin() + ro + rd, p.witness.end());
    return q;
  }
  if (m.kind == MapKind::Diagonal) {
    const std::size_t n = in.reduced_dim();
    Piece q;
    for (std::size_t c = 0; c < m.copies; ++c) {
      for (const Constraint& k : p.cs) {
        std::vector<Rational> a(n * m.copies);
        std::copy(k.a.begin(), k.a.end(), a.begin() + c * n);
        q.cs.push_back({std::move(a), k.b, k.strict});
      }
      q.witness.insert(q.witness.end(), p.witness.begin(), p.witness.end());
    }
    return q;
  }
  if (m.kind == MapKind::Project) {
    Piece q = whole_space(out);
    std::set<std::size_t> seen;
    for (std::size_t j = 0; j < m.indices.size(); ++j) {
      const std::size_t k = m.indices[j];
      const std::size_t ro = in.reduced_offset(k);
      const std::size_t d = in.factors[k];
      for (std::size_t i = 0; i < d; ++i) q.witness[out.reduced_offset(j) + i] = p.witness[ro + i];
      if (!seen.insert(k).second) continue;
      for (const Constraint& c : p.cs) {
        if (!supported_in(c, ro, d)) continue;
        std::vector<Rational> a(out.reduced_dim());
        for (std::size_t i = 0; i < d; ++i) a[out.reduced_offset(j) + i] = c.a[ro + i];
        q.cs.push_back({std::move(a), c.b, c.strict});
      }
    }
    return q;
  }
  return whole_space(out);
}

void check_reachable_routing(const FuzzyLogicalGraph& g, const std::vector<std::size_t>& order,
                             const std::vector<std::size_t>& partial) {
  const std::size_t n = g.vertex_count();
  std::vector<bool> needs(n, false);
  for (std::size_t v : partial) needs[v] = true;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (std::size_t a : g.out_arrows(*it)) needs[*it] = needs[*it] || needs[g.arrow(a).dst];
  }
  std::vector<std::vector<Piece>> pieces(n);
  pieces[order.front()].push_back(whole_space(g.vertex(order.front()).space));
  std::size_t total = 1;
  auto push = [&](std::size_t a, const Piece& p) {
    const std::size_t w = g.arrow(a).dst;
    if (!needs[w]) return;
    if (++total > kDefaultPathCap) {
      fail(ErrorCode::PathExplosion, "more than " + std::to_string(kDefaultPathCap) + " reachable pieces");
    }
    pieces[w].push_back(carry(p, g.arrow(a).map, g.vertex(g.arrow(a).src).space));
  };
  for (std::size_t v : order) {
    std::vector<Piece> here = std::move(pieces[v]);
    pieces[v].clear();
    if (!needs[v]) continue;
    const auto& guard = g.guard(v);
    if (!guard) {
      for (const Piece& p : here) push(g.out_arrows(v).front(), p);
      continue;
    }
    for (const Piece& p : here) {
      for (Chamber& c : enumerate_chambers(*guard, p.cs, p.witness)) {
        auto route = g.routing(v).find(c.signs.str());
        if (route == g.routing(v).end()) {
          fail(ErrorCode::IncompleteRouting, "reachable sign vector " + c.signs.str() + " has no route at '" +
                                                 g.vertex(v).id + "'");
        }
        Piece child{p.cs, std::move(c.witness)};
        for (std::size_t r = 0; r < guard->rows(); ++r) child.cs.push_back(side_constraint(*guard, r, c.signs[r]));
        push(route->second, child);
      }
    }
  }
}

}  // namespace

ValidationReport validate_fuzzy(const FuzzyLogicalGraph& g, bool check_realizability) {
  ValidationReport report;
  report.topological_order = topological_order(g);
  report.source = g.source();
  std::vector<std::size_t> partial;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const FuzzyVertex& vx = g.vertex(v);
    const auto& outs = g.out_arrows(v);
    if (vx.kind == VertexKind::Target) {
      if (!outs.empty()) fail(ErrorCode::DanglingVertex, "target '" + vx.id + "' has outgoing arrows");
      ++report.target_count;
      continue;
    }
    if (outs.empty()) fail(ErrorCode::DanglingVertex, "non-target vertex '" + vx.id + "' has no outgoing arrow");
    if (vx.kind == VertexKind::Source && v != report.source) {
      fail(ErrorCode::MultipleSources, "vertex '" + vx.id + "' is declared a source but has incoming arrows");
    }
    for (std::size_t a : outs) {
      const FuzzyArrow& ar = g.arrow(a);
      const StateSpace got = output_space(ar.map, vx.space);
      if (!(got == g.vertex(ar.dst).space)) {
        fail(ErrorCode::StateSpaceMismatch, "arrow '" + ar.id + "' lands in " + got.str() + " but '" +
                                                g.vertex(ar.dst).id + "' carries " + g.vertex(ar.dst).space.str());
      }
    }
    const auto& guard = g.guard(v);
    if (outs.size() == 1) {
      if (guard) fail(ErrorCode::InvalidArgument, "vertex '" + vx.id + "' has one outgoing arrow and a guard");
      continue;
    }
    if (!guard) fail(ErrorCode::IncompleteRouting, "vertex '" + vx.id + "' branches without a guard");
    ++report.guard_count;
    const std::size_t k = guard->rows();
    for (const auto& [key, arrow] : g.routing(v)) {
      if (key.size() != k) {
        fail(ErrorCode::IncompleteRouting, "routing key " + key + " at '" + vx.id + "' does not match " +
                                               std::to_string(k) + " guard rows");
      }
    }
    if (!(k < 63 && g.routing(v).size() == (std::size_t{1} << k))) partial.push_back(v);
  }
  if (check_realizability && !partial.empty()) check_reachable_routing(g, report.topological_order, partial);
  return report;
}

// ---- evaluation ----

namespace {

void check_state(const FuzzyLogicalGraph& g, std::size_t v, std::span<const double> state) {
  if (!g.vertex(v).space.contains(state)) {
    fail(ErrorCode::StateSpaceViolation, "state " + format_point(Point(state.begin(), state.end())) + " at '" +
                                             g.vertex(v).id + "' is not in " + g.vertex(v).space.str());
  }
}

}  // namespace

FuzzyValue evaluate_fuzzy(const FuzzyLogicalGraph& g, std::span<const double> x) {
  std::size_t v = g.source();
  Point state = g.encode_input(x);
  check_state(g, v, state);
  for (std::size_t steps = 0; steps <= g.vertex_count(); ++steps) {
    if (g.out_arrows(v).empty()) return {v, std::move(state)};
    const FuzzyArrow& a = g.arrow(g.choose_arrow(v, state));
    state = apply_map(a.map, g.vertex(v).space, state);
    v = a.dst;
    check_state(g, v, state);
  }
  fail(ErrorCode::CyclicGraph, "walk did not terminate");
}

std::vector<std::vector<std::size_t>> enumerate_fuzzy_paths(const FuzzyLogicalGraph& g, std::size_t cap) {
  const auto order = topological_order(g);
  std::vector<std::size_t> count(g.vertex_count(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (g.out_arrows(*it).empty()) {
      count[*it] = 1;
      continue;
    }
    for (std::size_t a : g.out_arrows(*it)) count[*it] = std::min(cap + 1, count[*it] + count[g.arrow(a).dst]);
  }
  if (count[g.source()] > cap) {
    fail(ErrorCode::PathExplosion, "graph has more than " + std::to_string(cap) + " source-to-target paths");
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> frames{{g.source(), 0}};
  while (!frames.empty()) {
    auto& [v, pos] = frames.back();
    const auto& outs = g.out_arrows(v);
    if (outs.empty() || pos == outs.size()) {
      if (outs.empty()) out.push_back(stack);
      frames.pop_back();
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    const std::size_t a = outs[pos++];
    stack.push_back(a);
    frames.push_back({g.arrow(a).dst, 0});
  }
  return out;
}

FuzzyPathSum evaluate_fuzzy_pathsum(const FuzzyLogicalGraph& g, const std::vector<std::vector<std::size_t>>& paths,
                                    std::span<const double> x) {
  FuzzyPathSum result;
  const Point input = g.encode_input(x);
  check_state(g, g.source(), input);
  for (const auto& path : paths) {
    FuzzyPathTerm term{path, 1};
    Point state = input;
    std::size_t v = g.source();
    for (std::size_t a : path) {
      const FuzzyArrow& ar = g.arrow(a);
      if (g.out_arrows(ar.src).size() > 1 && g.choose_arrow(ar.src, state) != a) {
        term.coefficient = 0;
        break;
      }
      state = apply_map(ar.map, g.vertex(ar.src).space, state);
      v = ar.dst;
      check_state(g, v, state);
    }
    if (term.coefficient) {
      ++result.nonzero_terms;
      result.value = {v, std::move(state)};
    }
    result.terms.push_back(std::move(term));
  }
  return result;
}

FuzzyPathSum evaluate_fuzzy_pathsum(const FuzzyLogicalGraph& g, std::span<const double> x, std::size_t cap) {
  return evaluate_fuzzy_pathsum(g, enumerate_fuzzy_paths(g, cap), x);
}

double corner_probability(const StateSpace& space, std::span<const double> point, const std::vector<std::size_t>& corner) {
  if (corner.size() != space.factor_count()) fail(ErrorCode::UnknownOutcome, "corner has the wrong length");
  double p = 1.0;
  for (std::size_t k = 0; k < corner.size(); ++k) {
    if (corner[k] > space.factors[k]) fail(ErrorCode::UnknownOutcome, "corner index out of range for " + space.str());
    p *= point[space.ambient_offset(k) + corner[k]];
  }
  return p;
}

std::map<OutcomeLabel, double> outcome_distribution(const FuzzyLogicalGraph& g, std::span<const double> x) {
  const FuzzyValue value = evaluate_fuzzy(g, x);
  std::map<OutcomeLabel, double> out;
  for (std::size_t t : g.targets()) {
    const StateSpace& s = g.vertex(t).space;
    std::vector<std::size_t> corner(s.factor_count(), 0);
    while (true) {
      out[{g.vertex(t).id, corner}] = t == value.target ? corner_probability(s, value.state, corner) : 0.0;
      std::size_t k = corner.size();
      while (k > 0 && corner[k - 1] == s.factors[k - 1]) corner[--k] = 0;
      if (k == 0) break;
      ++corner[k - 1];
    }
  }
  return out;
}

double characteristic(const FuzzyLogicalGraph& g, std::span<const double> x, const OutcomeLabel& t) {
  const auto v = g.find_vertex(t.vertex);
  if (!v || !g.out_arrows(*v).empty()) fail(ErrorCode::UnknownOutcome, "'" + t.vertex + "' is not a target vertex");
  const StateSpace& s = g.vertex(*v).space;
  if (t.corner.size() != s.factor_count()) fail(ErrorCode::UnknownOutcome, "corner has the wrong length");
  for (std::size_t k = 0; k < t.corner.size(); ++k) {
    if (t.corner[k] > s.factors[k]) fail(ErrorCode::UnknownOutcome, "corner index out of range for " + s.str());
  }
  const FuzzyValue value = evaluate_fuzzy(g, x);
  return value.target == *v ? corner_probability(s, value.state, t.corner) : 0.0;
}

double scalar_value(const FuzzyValue& v) {
  if (v.state.size() != 2) fail(ErrorCode::NotScalarOutput, "state is not a point of S^1");
  return v.state[1];
}

// ---- network imports ----

namespace {

// The first layer read on the unit cube: L(lo + (hi - lo) u).
NetworkSpec squeezed(const NetworkSpec& net, const std::optional<InputBox>& box) {
  if (!box) return net;
  if (box->lo.size() != net.input_dim || box->hi.size() != net.input_dim) {
    fail(ErrorCode::DimensionMismatch, "input box does not match the network input");
  }
  NetworkSpec out = net;
  const AffineMap& l = net.layers.front();
  AffineMap& s = out.layers.front();
  for (std::size_t r = 0; r < l.rows(); ++r) {
    s.offset(r) = l.row_value(r, box->lo);
    for (std::size_t c = 0; c < l.cols(); ++c) s.at(r, c) = l.at(r, c) * (box->hi[c] - box->lo[c]);
  }
  return out;
}

// Output of a block of logits: softmax into S^{m-1}, or S^1 for one logit.
ArrowMap output_map(AffineMap a) {
  return a.rows() == 1 ? ArrowMap::affine_sigmoid(std::move(a)) : ArrowMap::affine_softmax(std::move(a));
}

void append_heads(FuzzyLogicalGraph& g, const NetworkSpec& net, std::size_t last) {
  for (std::size_t h = 0; h < net.heads.size(); ++h) {
    const StateSpace& in = g.vertex(last).space;
    ArrowMap m = output_map(to_reduced(net.heads[h], in));
    StateSpace out = output_space(m, in);
    g.set_kind(last, VertexKind::Internal);
    const std::size_t v = g.add_vertex("head" + std::to_string(h + 1), VertexKind::Target, std::move(out));
    g.add_arrow(last, v, std::move(m));
    last = v;
  }
}

}  // namespace

FuzzyLogicalGraph from_sigmoid_net(const NetworkSpec& raw, const std::optional<InputBox>& box) {
  raw.check();
  if (raw.final_activation != FinalActivation::Softmax || (raw.hidden_count() > 0 && raw.hidden != Activation::Sigmoid)) {
    fail(ErrorCode::UnsupportedActivation, "sigmoid import needs sigmoid hidden layers and a softmax output");
  }
  const NetworkSpec net = squeezed(raw, box);
  FuzzyLogicalGraph g;
  std::size_t prev = g.add_vertex("v0", VertexKind::Source, StateSpace::cube(net.input_dim));
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const bool last = i + 1 == net.layers.size();
    ArrowMap m = last ? output_map(net.layers[i]) : ArrowMap::affine_sigmoid(net.layers[i]);
    StateSpace out = output_space(m, g.vertex(prev).space);
    const std::size_t v =
        g.add_vertex("v" + std::to_string(i + 1), last ? VertexKind::Target : VertexKind::Internal, std::move(out));
    g.add_arrow("a" + std::to_string(i + 1), prev, v, std::move(m));
    prev = v;
  }
  append_heads(g, net, prev);
  g.set_input_box(box);
  return g;
}

FuzzyLogicalGraph from_relu_softmax_net(const NetworkSpec& raw, const CompileCaps& caps,
                                        const std::optional<InputBox>& box) {
  raw.check();
  if (raw.final_activation != FinalActivation::Softmax || (raw.hidden_count() > 0 && raw.hidden != Activation::Relu)) {
    fail(ErrorCode::UnsupportedActivation, "relu import needs relu hidden layers and a softmax output");
  }
  NetworkSpec net = squeezed(raw, box);
  net.hidden = Activation::Relu;
  net.final_activation = FinalActivation::IndexMax;  // region tree only reads the affine layers
  net.heads.clear();
  const RegionTree tree = build_relu_regions(net, caps);
  const StateSpace cube = StateSpace::cube(net.input_dim);

  FuzzyLogicalGraph g;
  std::vector<std::size_t> vertex(tree.nodes.size());
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    vertex[k] = g.add_vertex(k == 0 ? "source" : "r" + std::to_string(k), k == 0 ? VertexKind::Source : VertexKind::Internal,
                             cube);
  }
  const std::size_t m = net.layers.back().rows();
  const std::size_t t = g.add_vertex("t", VertexKind::Target, m == 1 ? StateSpace::cube(1) : StateSpace::simplex(m - 1));
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    const RegionNode& node = tree.nodes[k];
    if (!node.pre) {
      g.add_arrow(vertex[k], t, output_map(node.map));
      continue;
    }
    if (node.children.size() == 1) {
      g.add_arrow(vertex[k], vertex[node.children[0].second], ArrowMap::identity());
      continue;
    }
    g.set_guard(vertex[k], *node.pre);
    for (const auto& [signs, child] : node.children) {
      const std::size_t a = g.add_arrow(vertex[k], vertex[child], ArrowMap::identity());
      g.set_route(vertex[k], signs, a);
    }
  }
  append_heads(g, raw, t);
  g.set_input_box(box);
  return g;
}

// ---- products and the fuzzy semiring ----

FuzzyLogicalGraph fuzzy_identity(const StateSpace& space) {
  FuzzyLogicalGraph g;
  const std::size_t in = g.add_vertex("in", VertexKind::Source, space);
  const std::size_t out = g.add_vertex("out", VertexKind::Target, space);
  g.add_arrow(in, out, ArrowMap::identity());
  return g;
}

namespace {

struct Leaf {
  std::size_t vertex;
  StateSpace prefix;  // outputs of the graphs threaded so far
};

// Copies h into out with h's source played by `at`; h acts on the factor run
// after `prefix`, `suffix` rides along unchanged.
std::vector<Leaf> attach(FuzzyLogicalGraph& out, const FuzzyLogicalGraph& h, std::size_t at, const StateSpace& prefix,
                         const StateSpace& suffix) {
  const std::size_t hs = h.source();
  std::vector<std::size_t> image(h.vertex_count());
  const std::string tag = out.vertex(at).id + "/";
  for (std::size_t v = 0; v < h.vertex_count(); ++v) {
    if (v == hs) {
      image[v] = at;
      continue;
    }
    image[v] = out.add_vertex(tag + h.vertex(v).id, VertexKind::Internal, prefix.concat(h.vertex(v).space).concat(suffix));
  }
  std::vector<std::size_t> arrow_image(h.arrow_count());
  for (std::size_t a = 0; a < h.arrow_count(); ++a) {
    const FuzzyArrow& ar = h.arrow(a);
    ArrowMap m = ar.map;
    if (m.kind != MapKind::Identity && (prefix.factor_count() || suffix.factor_count())) {
      m = ArrowMap::block(prefix.factor_count(), h.vertex(ar.src).space.factor_count(), std::move(m));
    }
    arrow_image[a] = out.add_arrow(tag + ar.id, image[ar.src], image[ar.dst], std::move(m));
  }
  for (std::size_t v = 0; v < h.vertex_count(); ++v) {
    if (!h.guard(v)) continue;
    out.set_guard(image[v], h.guard(v)->padded(prefix.reduced_dim(), suffix.reduced_dim()));
    for (const auto& [key, a] : h.routing(v)) out.set_route(image[v], SignVector(key), arrow_image[a]);
  }
  std::vector<Leaf> leaves;
  for (std::size_t v = 0; v < h.vertex_count(); ++v) {
    if (h.out_arrows(v).empty()) leaves.push_back({image[v], prefix.concat(h.vertex(v).space)});
  }
  return leaves;
}

void require_scalar(const FuzzyLogicalGraph& g) {
  for (std::size_t t : g.targets()) {
    if (!(g.vertex(t).space == StateSpace::cube(1))) {
      fail(ErrorCode::NotScalarOutput, "target '" + g.vertex(t).id + "' carries " + g.vertex(t).space.str());
    }
  }
}

FuzzyLogicalGraph combine(const FuzzyLogicalGraph& f1, const FuzzyLogicalGraph& f2, ArrowMap op, const std::string& id) {
  require_scalar(f1);
  require_scalar(f2);
  FuzzyLogicalGraph g = fuzzy_product({&f1, &f2});
  const auto leaves = g.targets();
  std::string name = id;
  while (g.find_vertex(name)) name += "'";
  const std::size_t t = g.add_vertex(name, VertexKind::Target, StateSpace::cube(1));
  for (std::size_t v : leaves) {
    g.set_kind(v, VertexKind::Internal);
    g.add_arrow(v, t, op);
  }
  return g;
}

}  // namespace

FuzzyLogicalGraph fuzzy_product(const std::vector<const FuzzyLogicalGraph*>& graphs) {
  if (graphs.empty()) fail(ErrorCode::InvalidArgument, "product of no graphs");
  const StateSpace in = graphs.front()->input_space();
  for (const FuzzyLogicalGraph* g : graphs) {
    if (!(g->input_space() == in)) {
      fail(ErrorCode::StateSpaceMismatch, "input spaces differ: " + in.str() + " and " + g->input_space().str());
    }
    if (!(g->input_box() == graphs.front()->input_box())) fail(ErrorCode::StateSpaceMismatch, "input boxes differ");
  }
  const std::size_t k = graphs.size();
  FuzzyLogicalGraph out;
  const std::size_t src = out.add_vertex("input", VertexKind::Source, in);
  StateSpace copies;
  for (std::size_t i = 0; i < k; ++i) copies = copies.concat(in);
  const std::size_t diag = out.add_vertex("diag", VertexKind::Internal, copies);
  out.add_arrow("diagonal", src, diag, ArrowMap::diagonal(k));

  std::vector<Leaf> leaves{{diag, StateSpace{}}};
  for (std::size_t i = 0; i < k; ++i) {
    StateSpace suffix;
    for (std::size_t j = i + 1; j < k; ++j) suffix = suffix.concat(in);
    std::vector<Leaf> next;
    for (const Leaf& leaf : leaves) {
      for (Leaf& l : attach(out, *graphs[i], leaf.vertex, leaf.prefix, suffix)) next.push_back(std::move(l));
    }
    leaves = std::move(next);
  }
  for (const Leaf& leaf : leaves) out.set_kind(leaf.vertex, VertexKind::Target);
  out.set_input_box(graphs.front()->input_box());
  return out;
}

FuzzyLogicalGraph fuzzy_union(const FuzzyLogicalGraph& f1, const FuzzyLogicalGraph& f2) {
  return combine(f1, f2, ArrowMap::max(), "union");
}

FuzzyLogicalGraph fuzzy_intersection(const FuzzyLogicalGraph& f1, const FuzzyLogicalGraph& f2) {
  return combine(f1, f2, ArrowMap::min(), "intersection");
}

}  // namespace logifold
