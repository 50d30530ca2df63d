#include "logifold/algebra.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "logifold/error.hpp"
#include "logifold/exact.hpp"

namespace logifold {

std::string tuple_label(const std::vector<std::string>& parts) {
  std::string s = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ",";
    s += parts[i];
  }
  return s + ")";
}

LogicalGraph constant_graph(std::size_t input_dim, const std::string& label) {
  LogicalGraph g(input_dim);
  const std::size_t s = g.add_vertex("source", VertexKind::Source);
  const std::size_t t = g.add_vertex("t", VertexKind::Target);
  g.set_label(t, label);
  g.add_arrow(s, t);
  return g;
}

namespace {

// Copies h into out with h's source played by `at`; returns the copies of h's
// targets. Vertex ids get `prefix` in front.
std::vector<std::pair<std::size_t, std::string>> attach(LogicalGraph& out, const LogicalGraph& h, std::size_t at,
                                                        const std::string& prefix) {
  const std::size_t hs = h.source();
  const bool at_root = out.in_degree(at) == 0;
  std::vector<std::size_t> image(h.vertex_count());
  std::vector<std::pair<std::size_t, std::string>> leaves;
  for (std::size_t v = 0; v < h.vertex_count(); ++v) {
    if (v == hs) {
      image[v] = at;
      continue;
    }
    const VertexKind kind = h.vertex(v).kind == VertexKind::Target ? VertexKind::Target : VertexKind::Internal;
    image[v] = out.add_vertex(prefix + h.vertex(v).id, kind);
  }
  out.set_kind(at, h.out_arrows(hs).empty() ? VertexKind::Target : (at_root ? VertexKind::Source : VertexKind::Internal));
  out.clear_label(at);
  std::vector<std::size_t> arrow_image(h.arrow_count());
  for (std::size_t a = 0; a < h.arrow_count(); ++a) {
    arrow_image[a] = out.add_arrow(prefix + h.arrow(a).id, image[h.arrow(a).src], image[h.arrow(a).dst]);
  }
  for (std::size_t v = 0; v < h.vertex_count(); ++v) {
    if (!h.guard(v)) continue;
    out.set_guard(image[v], *h.guard(v));
    for (const auto& [key, a] : h.routing(v)) out.set_route(image[v], SignVector(key), arrow_image[a]);
  }
  for (std::size_t v = 0; v < h.vertex_count(); ++v) {
    if (h.out_arrows(v).empty()) leaves.emplace_back(image[v], h.label(v).value_or(h.vertex(v).id));
  }
  return leaves;
}

bool is_f2(const LogicalGraph& g) {
  for (const auto& l : g.label_set()) {
    if (l != "0" && l != "1") return false;
  }
  return true;
}

}  // namespace

LogicalGraph product(const std::vector<const LogicalGraph*>& graphs) {
  if (graphs.empty()) fail(ErrorCode::InvalidArgument, "product of no graphs");
  const std::size_t n = graphs.front()->input_dim();
  for (const LogicalGraph* g : graphs) {
    if (g->input_dim() != n) fail(ErrorCode::DimensionMismatch, "product factors live on different input dimensions");
  }
  LogicalGraph out(n);
  const std::size_t root = out.add_vertex("source", VertexKind::Source);
  struct Leaf {
    std::size_t vertex;
    std::vector<std::string> parts;
  };
  std::vector<Leaf> leaves{{root, {}}};
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    std::vector<Leaf> next;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const std::string prefix = k == 0 ? "" : out.vertex(leaves[i].vertex).id + "/";
      for (auto& [v, label] : attach(out, *graphs[k], leaves[i].vertex, prefix)) {
        Leaf leaf{v, leaves[i].parts};
        leaf.parts.push_back(std::move(label));
        next.push_back(std::move(leaf));
      }
    }
    leaves = std::move(next);
  }
  for (const Leaf& leaf : leaves) {
    out.set_kind(leaf.vertex, VertexKind::Target);
    out.set_label(leaf.vertex, tuple_label(leaf.parts));
  }
  return out;
}

LogicalGraph product(const LogicalGraph& g1, const LogicalGraph& g2) { return product({&g1, &g2}); }

LogicalGraph boolean_combine(const LogicalGraph& g1, const LogicalGraph& g2, F2Op op) {
  if (!is_f2(g1) || !is_f2(g2)) fail(ErrorCode::NotF2Labeled, "boolean_combine needs graphs labeled by 0 and 1");
  LogicalGraph g = product(g1, g2);
  std::map<std::string, std::size_t> result;
  for (std::size_t t : g.targets()) {
    const std::string& l = *g.label(t);  // "(a,b)"
    const int a = l[1] - '0';
    const int b = l[3] - '0';
    const std::string value = std::to_string(op == F2Op::Add ? (a + b) % 2 : a * b);
    auto it = result.find(value);
    if (it == result.end()) {
      std::string id = "f2_" + value;
      while (g.find_vertex(id)) id += "'";
      const std::size_t v = g.add_vertex(id, VertexKind::Target);
      g.set_label(v, value);
      it = result.emplace(value, v).first;
    }
    g.set_kind(t, VertexKind::Internal);
    g.clear_label(t);
    g.add_arrow(t, it->second);
  }
  return g;
}

LogicalGraph zero_locus_lift(const LogicalGraph& g) {
  const std::size_t n = g.input_dim();
  std::map<std::size_t, long long> code;
  std::set<long long> used;
  for (std::size_t t : g.targets()) {
    const std::string& l = g.label(t).value_or("");
    long long k = 0;
    auto [p, ec] = std::from_chars(l.data(), l.data() + l.size(), k);
    if (ec != std::errc() || p != l.data() + l.size()) {
      fail(ErrorCode::LabelEncoding, "label '" + l + "' is not an integer");
    }
    if (!used.insert(k).second) fail(ErrorCode::LabelEncoding, "label '" + l + "' appears twice");
    code.emplace(t, k);
  }

  LogicalGraph out(n + 1);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    out.add_vertex(g.vertex(v).id, g.vertex(v).kind == VertexKind::Target ? VertexKind::Internal : g.vertex(v).kind);
  }
  for (std::size_t a = 0; a < g.arrow_count(); ++a) out.add_arrow(g.arrow(a).id, g.arrow(a).src, g.arrow(a).dst);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (!g.guard(v)) continue;
    out.set_guard(v, g.guard(v)->padded(0, 1));
    for (const auto& [key, a] : g.routing(v)) out.set_route(v, SignVector(key), a);
  }
  std::string zero_id = "zero", one_id = "one";
  while (out.find_vertex(zero_id) || out.find_vertex(one_id)) {
    zero_id += "'";
    one_id += "'";
  }
  const std::size_t zero = out.add_vertex(zero_id, VertexKind::Target);
  const std::size_t one = out.add_vertex(one_id, VertexKind::Target);
  out.set_label(zero, "0");
  out.set_label(one, "1");
  for (const auto& [t, k] : code) {
    // (y - (k - 1/2), (k + 1/2) - y)
    AffineMap band(2, n + 1);
    band.at(0, n) = 1.0;
    band.offset(0) = -(static_cast<double>(k) - 0.5);
    band.at(1, n) = -1.0;
    band.offset(1) = static_cast<double>(k) + 0.5;
    const std::size_t inside = out.add_arrow(out.vertex(t).id + "->0", t, zero);
    const std::size_t outside = out.add_arrow(out.vertex(t).id + "->1", t, one);
    out.set_guard(t, band);
    out.set_route(t, SignVector("++"), inside);
    out.set_route(t, SignVector("+-"), outside);
    out.set_route(t, SignVector("-+"), outside);
  }
  return out;
}

LogicalGraph identity_graph(const std::vector<Point>& points, std::uint64_t seed, int attempts) {
  if (points.empty()) fail(ErrorCode::InvalidArgument, "identity on an empty point set");
  const std::size_t n = points.front().size();
  for (const Point& p : points) {
    if (p.size() != n) fail(ErrorCode::DimensionMismatch, "points of different dimension");
  }
  {
    std::set<Point> distinct(points.begin(), points.end());
    if (distinct.size() != points.size()) fail(ErrorCode::InvalidArgument, "point set has repeated points");
  }
  if (points.size() == 1) return constant_graph(n, format_point(points.front()));

  const std::size_t N = points.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    AffineMap dir(1, n);
    for (std::size_t c = 0; c < n; ++c) dir.at(0, c) = normal(rng);
    std::vector<double> proj(N);
    for (std::size_t i = 0; i < N; ++i) proj[i] = dir.row_value(0, points[i]);
    std::vector<std::size_t> rank(N);
    std::iota(rank.begin(), rank.end(), 0);
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });
    double scale = 1.0;
    for (double v : proj) scale = std::max(scale, std::fabs(v));
    bool separated = true;
    for (std::size_t j = 0; j + 1 < N && separated; ++j) {
      separated = proj[rank[j + 1]] - proj[rank[j]] > 1e-9 * scale;
    }
    if (!separated) continue;

    AffineMap guard(N - 1, n);
    for (std::size_t j = 0; j + 1 < N; ++j) {
      for (std::size_t c = 0; c < n; ++c) guard.at(j, c) = dir.at(0, c);
      guard.offset(j) = -0.5 * (proj[rank[j]] + proj[rank[j + 1]]);
    }
    // Point of rank r sits above the first r thresholds.
    std::vector<std::string> expected(N);
    bool ok = true;
    for (std::size_t r = 0; r < N && ok; ++r) {
      expected[r] = std::string(r, '+') + std::string(N - 1 - r, '-');
      ok = sign_vector(guard, points[rank[r]]).str() == expected[r];
    }
    if (!ok) continue;
    const auto chambers = enumerate_chambers(guard);
    if (chambers.size() != N) continue;

    LogicalGraph g(n);
    const std::size_t src = g.add_vertex("source", VertexKind::Source);
    g.set_guard(src, guard);
    std::map<std::string, std::size_t> arrow_of;
    for (std::size_t r = 0; r < N; ++r) {
      const std::size_t t = g.add_vertex("p" + std::to_string(rank[r]), VertexKind::Target);
      g.set_label(t, format_point(points[rank[r]]));
      arrow_of[expected[r]] = g.add_arrow(src, t);
    }
    bool routed = true;
    for (const Chamber& c : chambers) {
      auto it = arrow_of.find(c.signs.str());
      if (it == arrow_of.end()) {
        routed = false;
        break;
      }
      g.set_route(src, c.signs, it->second);
    }
    if (routed) return g;
  }
  fail(ErrorCode::SeparationFailure, "no separating direction found for " + std::to_string(N) + " points after " +
                                         std::to_string(attempts) + " attempts");
}

LogicalGraph parametrize(const LogicalGraph& g, const std::vector<Point>& points, std::uint64_t seed) {
  return product(identity_graph(points, seed), g);
}

}  // namespace logifold
