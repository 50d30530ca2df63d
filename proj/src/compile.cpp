#include "logifold/compile.hpp"

#include <map>

#include "logifold/error.hpp"

namespace logifold {

AffineMap pairwise_difference_guard(const AffineMap& logits) {
  const std::size_t m = logits.rows();
  AffineMap d(m * (m - 1) / 2, logits.cols());
  std::size_t r = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j, ++r) {
      for (std::size_t c = 0; c < logits.cols(); ++c) d.at(r, c) = logits.at(i, c) - logits.at(j, c);
      d.offset(r) = logits.offset(i) - logits.offset(j);
    }
  }
  return d;
}

std::optional<std::size_t> argmax_from_signs(const SignVector& s, std::size_t outputs) {
  // Row index of the pair (i, j), i < j.
  auto row = [outputs](std::size_t i, std::size_t j) { return i * outputs - i * (i + 1) / 2 + (j - i - 1); };
  for (std::size_t i = 0; i < outputs; ++i) {
    bool best = true;
    for (std::size_t j = 0; j < outputs && best; ++j) {
      if (j > i) best = s[row(i, j)] == Sign::Plus;   // l_i >= l_j
      if (j < i) best = s[row(j, i)] == Sign::Minus;  // l_j < l_i
    }
    if (best) return i;
  }
  return std::nullopt;
}

namespace {

void require(const NetworkSpec& net, Activation hidden) {
  net.check();
  if (net.final_activation != FinalActivation::IndexMax) {
    fail(ErrorCode::UnsupportedActivation, "classical compilation needs an indexmax output");
  }
  if (net.hidden_count() > 0 && net.hidden != hidden) {
    fail(ErrorCode::UnsupportedActivation, std::string("expected ") + std::string(to_string(hidden)) +
                                               " hidden layers, got " + std::string(to_string(net.hidden)));
  }
  if (!net.heads.empty()) fail(ErrorCode::UnsupportedActivation, "classical compilation does not take softmax heads");
}

// Targets are created on first use, labeled by output index.
class TargetPool {
 public:
  explicit TargetPool(LogicalGraph& g) : g_(g) {}
  std::size_t get(std::size_t index) {
    auto it = made_.find(index);
    if (it != made_.end()) return it->second;
    const std::size_t v = g_.add_vertex("t" + std::to_string(index), VertexKind::Target);
    g_.set_label(v, std::to_string(index));
    made_.emplace(index, v);
    return v;
  }

 private:
  LogicalGraph& g_;
  std::map<std::size_t, std::size_t> made_;
};

// Rounded difference rows can cut out slivers whose signs are not a
// consistent ordering; those take the exact argmax at their witness.
std::size_t chamber_argmax(const Chamber& c, const AffineMap& logits) {
  if (auto i = argmax_from_signs(c.signs, logits.rows())) return *i;
  std::size_t best = 0;
  Rational best_value;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const Rational v = value(make_constraint(logits.row(r), logits.offset(r), false), c.witness);
    if (r == 0 || v > best_value) {
      best = r;
      best_value = v;
    }
  }
  return best;
}

// Routes vertex v to the argmax target of every chamber of the logits.
void attach_argmax(LogicalGraph& g, TargetPool& targets, std::size_t v, const AffineMap& logits,
                   const std::vector<Constraint>& region, const RationalPoint& witness, const CompileCaps& caps) {
  const std::size_t m = logits.rows();
  if (m == 1) {
    g.add_arrow(v, targets.get(0));
    return;
  }
  const AffineMap d = pairwise_difference_guard(logits);
  const auto chambers = enumerate_chambers(d, region, witness, caps.chambers);
  if (chambers.size() == 1) {
    g.add_arrow(v, targets.get(chamber_argmax(chambers[0], logits)));
    return;
  }
  g.set_guard(v, d);
  for (const Chamber& c : chambers) {
    const std::size_t a = g.add_arrow(v, targets.get(chamber_argmax(c, logits)));
    g.set_route(v, c.signs, a);
  }
}

}  // namespace

LogicalGraph compile_step_net(const NetworkSpec& net, const CompileCaps& caps, CompileReport* report) {
  require(net, Activation::Step);
  LogicalGraph g(net.input_dim);
  const std::size_t src = g.add_vertex("source", VertexKind::Source);
  TargetPool targets(g);
  CompileReport local;
  CompileReport& rep = report ? *report : local;
  rep.regions = 1;

  if (net.layers.size() == 1) {
    attach_argmax(g, targets, src, net.layers[0], {}, RationalPoint(net.input_dim), caps);
    return g;
  }

  const AffineMap& l1 = net.layers[0];
  if (l1.rows() < 63 && (std::size_t{1} << l1.rows()) > caps.chambers) {
    fail(ErrorCode::GuardExplosion, "first layer with " + std::to_string(l1.rows()) + " rows exceeds " +
                                        std::to_string(caps.chambers) + " chambers");
  }
  const auto chambers = enumerate_chambers(l1, caps.chambers);
  rep.pruned += (std::size_t{1} << l1.rows()) - chambers.size();

  // One vertex per distinct Boolean outcome vector at every hidden layer.
  std::vector<std::map<Point, std::size_t>> layer_vertices(net.layers.size() - 1);
  auto vertex_for = [&](std::size_t layer, const Point& h) {
    auto& table = layer_vertices[layer];
    auto it = table.find(h);
    if (it != table.end()) return std::pair{it->second, false};
    std::string id = "h" + std::to_string(layer + 1) + "_";
    for (double b : h) id += b == 1.0 ? '1' : '0';
    const std::size_t v = g.add_vertex(std::move(id), VertexKind::Internal);
    table.emplace(h, v);
    ++rep.regions;
    return std::pair{v, true};
  };

  // Layer-1 vertex of a chamber; builds the rest of its chain on first visit.
  auto first_arrow = [&](const SignVector& s) {
    Point h(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) h[i] = s[i] == Sign::Plus ? 1.0 : 0.0;
    auto [v0, fresh] = vertex_for(0, h);
    if (!fresh) return v0;
    std::size_t v = v0;
    for (std::size_t layer = 1; layer < net.layers.size(); ++layer) {
      const AffineMap& l = net.layers[layer];
      for (std::size_t r = 0; r < l.rows(); ++r) {
        if (l.row_value(r, h) == 0.0) {
          rep.warnings.push_back("degenerate hyperplane: layer " + std::to_string(layer + 1) + " row " +
                                 std::to_string(r + 1) + " vanishes on outcome " + format_point(h));
        }
      }
      if (layer + 1 == net.layers.size()) {
        g.add_arrow(v, targets.get(argmax(l.apply(h))));
        break;
      }
      h = hidden_layer(l, Activation::Step, h);
      auto [w, w_fresh] = vertex_for(layer, h);
      g.add_arrow(v, w);
      if (!w_fresh) break;
      v = w;
    }
    return v0;
  };

  if (chambers.size() == 1) {
    g.add_arrow(src, first_arrow(chambers[0].signs));
    return g;
  }
  g.set_guard(src, l1);
  for (const Chamber& c : chambers) {
    const std::size_t a = g.add_arrow(src, first_arrow(c.signs));
    g.set_route(src, c.signs, a);
  }
  return g;
}

RegionTree build_relu_regions(const NetworkSpec& net, const CompileCaps& caps) {
  net.check();
  RegionTree tree;
  const std::size_t hidden = net.hidden_count();
  RegionNode root;
  root.witness = RationalPoint(net.input_dim);
  root.map = AffineMap::identity(net.input_dim);
  tree.nodes.push_back(std::move(root));
  // Breadth-first expansion; node indices stay stable.
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    const std::size_t depth = tree.nodes[k].depth;
    const AffineMap& layer = net.layers[depth];
    AffineMap composed = layer.compose(tree.nodes[k].map);
    if (depth == hidden) {
      tree.nodes[k].map = std::move(composed);
      continue;
    }
    const auto chambers = enumerate_chambers(composed, tree.nodes[k].region, tree.nodes[k].witness, caps.chambers);
    tree.pruned += (composed.rows() < 63 ? (std::size_t{1} << composed.rows()) : 0) - chambers.size();
    if (tree.nodes.size() + chambers.size() > caps.regions) {
      fail(ErrorCode::RegionExplosion, "region tree exceeds " + std::to_string(caps.regions) + " regions");
    }
    for (const Chamber& c : chambers) {
      RegionNode child;
      child.depth = depth + 1;
      child.region = tree.nodes[k].region;
      for (std::size_t r = 0; r < composed.rows(); ++r) child.region.push_back(side_constraint(composed, r, c.signs[r]));
      child.witness = c.witness;
      // ReLU on this chamber keeps PLUS rows and zeroes MINUS rows.
      child.map = composed;
      for (std::size_t r = 0; r < composed.rows(); ++r) {
        if (c.signs[r] == Sign::Plus) continue;
        for (std::size_t col = 0; col < composed.cols(); ++col) child.map.at(r, col) = 0.0;
        child.map.offset(r) = 0.0;
      }
      tree.nodes[k].children.emplace_back(c.signs, tree.nodes.size());
      tree.nodes.push_back(std::move(child));
    }
    tree.nodes[k].pre = std::move(composed);
  }
  return tree;
}

LogicalGraph compile_relu_net(const NetworkSpec& net, const CompileCaps& caps, CompileReport* report) {
  require(net, Activation::Relu);
  const RegionTree tree = build_relu_regions(net, caps);
  LogicalGraph g(net.input_dim);
  TargetPool targets(g);
  std::vector<std::size_t> vertex(tree.nodes.size());
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    vertex[k] = g.add_vertex(k == 0 ? "source" : "r" + std::to_string(k), k == 0 ? VertexKind::Source : VertexKind::Internal);
  }
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    const RegionNode& node = tree.nodes[k];
    if (!node.pre) {
      attach_argmax(g, targets, vertex[k], node.map, node.region, node.witness, caps);
      continue;
    }
    if (node.children.size() == 1) {
      g.add_arrow(vertex[k], vertex[node.children[0].second]);
      continue;
    }
    g.set_guard(vertex[k], *node.pre);
    for (const auto& [signs, child] : node.children) {
      const std::size_t a = g.add_arrow(vertex[k], vertex[child]);
      g.set_route(vertex[k], signs, a);
    }
  }
  if (report) {
    report->regions = tree.nodes.size();
    report->pruned = tree.pruned;
  }
  return g;
}

LogicalGraph compile_net(const NetworkSpec& net, const CompileCaps& caps, CompileReport* report) {
  if (net.hidden_count() > 0 && net.hidden == Activation::Step) return compile_step_net(net, caps, report);
  return compile_relu_net(net, caps, report);
}

}  // namespace logifold
