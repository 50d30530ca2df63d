#include "logifold/llg.hpp"

#include <algorithm>
#include <limits>

#include "logifold/error.hpp"
#include "logifold/exact.hpp"

namespace logifold {

std::string_view to_string(VertexKind kind) {
  switch (kind) {
    case VertexKind::Source: return "source";
    case VertexKind::Internal: return "internal";
    case VertexKind::Target: return "target";
  }
  return "internal";
}

VertexKind vertex_kind_from_string(std::string_view s) {
  if (s == "source") return VertexKind::Source;
  if (s == "internal") return VertexKind::Internal;
  if (s == "target") return VertexKind::Target;
  fail(ErrorCode::InvalidArgument, "unknown vertex kind '" + std::string(s) + "'");
}

std::size_t LogicalGraph::add_vertex(std::string id, VertexKind kind) {
  if (vertex_index_.count(id)) fail(ErrorCode::InvalidArgument, "duplicate vertex id '" + id + "'");
  const std::size_t v = vertices_.size();
  vertex_index_.emplace(id, v);
  vertices_.push_back({std::move(id), kind});
  out_.emplace_back();
  in_degree_.push_back(0);
  guards_.emplace_back();
  routing_.emplace_back();
  labels_.emplace_back();
  roots_.insert(v);
  return v;
}

std::size_t LogicalGraph::add_vertex(VertexKind kind) {
  std::string id = "v" + std::to_string(vertices_.size());
  while (vertex_index_.count(id)) id += "'";
  return add_vertex(std::move(id), kind);
}

std::size_t LogicalGraph::add_target(std::string label) {
  const std::size_t v = add_vertex(VertexKind::Target);
  labels_[v] = std::move(label);
  return v;
}

std::size_t LogicalGraph::add_arrow(std::string id, std::size_t src, std::size_t dst) {
  if (src >= vertices_.size() || dst >= vertices_.size()) fail(ErrorCode::InvalidArgument, "arrow endpoint out of range");
  if (arrow_index_.count(id)) fail(ErrorCode::InvalidArgument, "duplicate arrow id '" + id + "'");
  const std::size_t a = arrows_.size();
  arrow_index_.emplace(id, a);
  arrows_.push_back({std::move(id), src, dst});
  out_[src].push_back(a);
  ++in_degree_[dst];
  roots_.erase(dst);
  return a;
}

std::size_t LogicalGraph::add_arrow(std::size_t src, std::size_t dst) {
  std::string id = "a" + std::to_string(arrows_.size());
  while (arrow_index_.count(id)) id += "'";
  return add_arrow(std::move(id), src, dst);
}

void LogicalGraph::set_guard(std::size_t v, AffineMap guard) {
  if (guard.cols() != input_dim_) {
    fail(ErrorCode::DimensionMismatch, "guard at '" + vertices_.at(v).id + "' has " + std::to_string(guard.cols()) +
                                           " columns, input dimension is " + std::to_string(input_dim_));
  }
  guards_.at(v) = std::move(guard);
  routing_.at(v).clear();
}

void LogicalGraph::clear_guard(std::size_t v) {
  guards_.at(v).reset();
  routing_.at(v).clear();
}

void LogicalGraph::set_route(std::size_t v, const SignVector& s, std::size_t arrow) {
  if (arrows_.at(arrow).src != v) fail(ErrorCode::InvalidArgument, "routing to an arrow that does not leave the vertex");
  routing_.at(v)[s.str()] = arrow;
}

void LogicalGraph::set_label(std::size_t v, std::string label) { labels_.at(v) = std::move(label); }
void LogicalGraph::clear_label(std::size_t v) { labels_.at(v).reset(); }

std::optional<std::size_t> LogicalGraph::find_vertex(const std::string& id) const {
  auto it = vertex_index_.find(id);
  if (it == vertex_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> LogicalGraph::find_arrow(const std::string& id) const {
  auto it = arrow_index_.find(id);
  if (it == arrow_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LogicalGraph::source() const {
  if (roots_.size() == 1) return *roots_.begin();
  if (roots_.empty()) fail(ErrorCode::CyclicGraph, "graph has no vertex without incoming arrows");
  std::string ids;
  for (std::size_t v : roots_) ids += (ids.empty() ? "" : ", ") + vertices_[v].id;
  fail(ErrorCode::MultipleSources, "vertices without incoming arrows: " + ids);
}

std::vector<std::size_t> LogicalGraph::targets() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    if (vertices_[v].kind == VertexKind::Target) out.push_back(v);
  }
  return out;
}

std::vector<std::string> LogicalGraph::label_set() const {
  std::vector<std::string> out;
  for (std::size_t v : targets()) out.push_back(labels_[v].value_or(vertices_[v].id));
  return out;
}

std::size_t LogicalGraph::choose_arrow(std::size_t v, std::span<const double> x) const {
  const auto& outs = out_[v];
  if (!guards_[v]) {
    if (outs.empty()) fail(ErrorCode::DanglingVertex, "walk stopped at '" + vertices_[v].id + "'");
    return outs.front();
  }
  const SignVector s = sign_vector(*guards_[v], x);
  auto it = routing_[v].find(s.str());
  if (it == routing_[v].end()) {
    fail(ErrorCode::UnknownSignVector, "sign vector " + s.str() + " has no route at '" + vertices_[v].id + "'");
  }
  return it->second;
}

namespace {

std::vector<std::size_t> topological_order(const LogicalGraph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> indeg(n);
  for (std::size_t v = 0; v < n; ++v) indeg[v] = g.in_degree(v);
  // Lowest index first keeps the order canonical.
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.insert(v);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (std::size_t a : g.out_arrows(v)) {
      const std::size_t w = g.arrow(a).dst;
      if (--indeg[w] == 0) ready.insert(w);
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

void check_input(const LogicalGraph& g, std::span<const double> x) {
  if (x.size() != g.input_dim()) {
    fail(ErrorCode::DimensionMismatch,
         "point of dimension " + std::to_string(x.size()) + " for graph on R^" + std::to_string(g.input_dim()));
  }
}


// Inputs reaching a vertex form a union of pieces, one per realizable
// sequence of chambers along the way in. Each guard only has to route the
// chambers met inside those pieces.
void check_reachable_routing(const LogicalGraph& g, const std::vector<std::size_t>& order,
                             const std::vector<std::size_t>& partial) {
  struct Piece {
    std::vector<Constraint> cs;
    RationalPoint witness;
  };
  const std::size_t n = g.vertex_count();
  std::vector<bool> needs(n, false);
  for (std::size_t v : partial) needs[v] = true;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (std::size_t a : g.out_arrows(*it)) needs[*it] = needs[*it] || needs[g.arrow(a).dst];
  }
  std::vector<std::vector<Piece>> pieces(n);
  pieces[order.front()].push_back({{}, RationalPoint(g.input_dim())});
  std::size_t total = 1;
  for (std::size_t v : order) {
    std::vector<Piece> here = std::move(pieces[v]);
    pieces[v].clear();
    if (!needs[v]) continue;
    const auto& guard = g.guard(v);
    if (!guard) {
      const std::size_t w = g.arrow(g.out_arrows(v).front()).dst;
      if (!needs[w]) continue;
      for (Piece& p : here) pieces[w].push_back(std::move(p));
      continue;
    }
    for (Piece& p : here) {
      for (Chamber& c : enumerate_chambers(*guard, p.cs, p.witness)) {
        auto route = g.routing(v).find(c.signs.str());
        if (route == g.routing(v).end()) {
          fail(ErrorCode::IncompleteRouting, "realizable sign vector " + c.signs.str() + " has no route at '" +
                                                 g.vertex(v).id + "'");
        }
        const std::size_t w = g.arrow(route->second).dst;
        if (!needs[w]) continue;
        if (++total > kDefaultPathCap) {
          fail(ErrorCode::PathExplosion, "more than " + std::to_string(kDefaultPathCap) + " reachable pieces");
        }
        Piece child{p.cs, std::move(c.witness)};
        for (std::size_t r = 0; r < guard->rows(); ++r) child.cs.push_back(side_constraint(*guard, r, c.signs[r]));
        pieces[w].push_back(std::move(child));
      }
    }
  }
}

}  // namespace

ValidationReport validate_graph(const LogicalGraph& g, const ValidateOptions& options) {
  ValidationReport report;
  report.topological_order = topological_order(g);
  report.source = g.source();

  std::set<std::string> labels;
  std::vector<std::size_t> partial;  // guarded vertices without a route for every sign vector
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const Vertex& vx = g.vertex(v);
    const auto& outs = g.out_arrows(v);
    if (vx.kind == VertexKind::Target) {
      if (!outs.empty()) fail(ErrorCode::DanglingVertex, "target '" + vx.id + "' has outgoing arrows");
      if (!g.label(v)) fail(ErrorCode::DanglingVertex, "target '" + vx.id + "' has no label");
      if (!labels.insert(*g.label(v)).second) {
        fail(ErrorCode::InvalidArgument, "label '" + *g.label(v) + "' is attached to two targets");
      }
      ++report.target_count;
      continue;
    }
    if (outs.empty()) fail(ErrorCode::DanglingVertex, "non-target vertex '" + vx.id + "' has no outgoing arrow");
    if (vx.kind == VertexKind::Source && v != report.source) {
      fail(ErrorCode::MultipleSources, "vertex '" + vx.id + "' is declared a source but has incoming arrows");
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
      if (g.arrow(arrow).src != v) fail(ErrorCode::IncompleteRouting, "routing at '" + vx.id + "' leaves elsewhere");
    }
    if (!(k < 63 && g.routing(v).size() == (std::size_t{1} << k))) partial.push_back(v);
  }
  if (options.check_realizability && !partial.empty()) check_reachable_routing(g, report.topological_order, partial);
  return report;
}

std::size_t evaluate_vertex(const LogicalGraph& g, std::span<const double> x) {
  check_input(g, x);
  std::size_t v = g.source();
  for (std::size_t steps = 0; steps <= g.vertex_count(); ++steps) {
    if (g.out_arrows(v).empty()) return v;
    v = g.arrow(g.choose_arrow(v, x)).dst;
  }
  fail(ErrorCode::CyclicGraph, "walk did not terminate");
}

std::string evaluate(const LogicalGraph& g, std::span<const double> x) {
  const std::size_t t = evaluate_vertex(g, x);
  if (!g.label(t)) fail(ErrorCode::DanglingVertex, "walk ended at unlabeled vertex '" + g.vertex(t).id + "'");
  return *g.label(t);
}

std::size_t count_paths(const LogicalGraph& g, std::size_t cap) {
  const auto order = topological_order(g);
  const std::size_t limit = cap + 1;
  std::vector<std::size_t> paths(g.vertex_count(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t v = *it;
    if (g.out_arrows(v).empty()) {
      paths[v] = 1;
      continue;
    }
    std::size_t total = 0;
    for (std::size_t a : g.out_arrows(v)) total = std::min(limit, total + paths[g.arrow(a).dst]);
    paths[v] = total;
  }
  return paths[g.source()];
}

std::vector<std::vector<std::size_t>> enumerate_paths(const LogicalGraph& g, std::size_t cap) {
  const std::size_t total = count_paths(g, cap);
  if (total > cap) {
    fail(ErrorCode::PathExplosion, "graph has more than " + std::to_string(cap) + " source-to-target paths");
  }
  std::vector<std::vector<std::size_t>> out;
  out.reserve(total);
  std::vector<std::size_t> stack;
  // Iterative DFS over (vertex, next out-arrow position).
  std::vector<std::pair<std::size_t, std::size_t>> frames{{g.source(), 0}};
  while (!frames.empty()) {
    auto& [v, pos] = frames.back();
    const auto& outs = g.out_arrows(v);
    if (outs.empty()) {
      out.push_back(stack);
      frames.pop_back();
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    if (pos == outs.size()) {
      frames.pop_back();
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    const std::size_t a = outs[pos++];
    stack.push_back(a);
    frames.emplace_back(g.arrow(a).dst, 0);
  }
  return out;
}

PathSumResult evaluate_pathsum(const LogicalGraph& g, const std::vector<std::vector<std::size_t>>& paths,
                               std::span<const double> x) {
  check_input(g, x);
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> chosen(g.vertex_count(), kUnset);
  PathSumResult result;
  result.terms.reserve(paths.size());
  for (const auto& path : paths) {
    int c = 1;
    // Past the first zero factor the vertices are off the live path, and their
    // chambers for x may be unrouted.
    for (std::size_t a : path) {
      const std::size_t v = g.arrow(a).src;
      if (chosen[v] == kUnset) chosen[v] = g.choose_arrow(v, x);
      if (chosen[v] != a) {
        c = 0;
        break;
      }
    }
    const std::size_t head = path.empty() ? g.source() : g.arrow(path.back()).dst;
    PathSumTerm term{path, c, g.label(head).value_or(g.vertex(head).id)};
    if (c == 1) {
      if (result.nonzero_terms == 0) result.label = term.head;
      ++result.nonzero_terms;
    }
    result.terms.push_back(std::move(term));
  }
  return result;
}

PathSumResult evaluate_pathsum(const LogicalGraph& g, std::span<const double> x, std::size_t cap) {
  return evaluate_pathsum(g, enumerate_paths(g, cap), x);
}

}  // namespace logifold
