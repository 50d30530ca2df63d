#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "logifold/algebra.hpp"
#include "logifold/compile.hpp"
#include "support.hpp"

using namespace logifold;
using namespace testing_support;

namespace {

/// "1" where row . x + b >= 0, else "0".
LogicalGraph half_plane(std::vector<double> row, double b) {
  LogicalGraph g(row.size());
  const auto s = g.add_vertex("s", VertexKind::Source);
  g.set_guard(s, AffineMap::from_rows({row}, {b}));
  g.set_route(s, SignVector("+"), g.add_arrow(s, g.add_target("1")));
  g.set_route(s, SignVector("-"), g.add_arrow(s, g.add_target("0")));
  return g;
}

LogicalGraph random_f2_graph(std::mt19937_64& rng) {
  const NetworkSpec net = random_network({2, 3, 2}, Activation::Step, FinalActivation::IndexMax, rng);
  return compile_step_net(net);
}

}  // namespace

TEST_CASE("tuple labels") {
  CHECK(tuple_label({"1", "0"}) == "(1,0)");
  CHECK(tuple_label({}) == "()");
}

TEST_CASE("product of two step graphs is the pair of values") {
  const LogicalGraph fx = half_plane({1, 0}, 0), fy = half_plane({0, 1}, 0);
  const LogicalGraph p = product(fx, fy);
  validate_graph(p);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Point x = uniform_point(rng, 2, -1, 1);
    CHECK(evaluate(p, x) == tuple_label({evaluate(fx, x), evaluate(fy, x)}));
  }
  const LogicalGraph c = constant_graph(2, "c");
  CHECK(evaluate(product({&fx, &c, &fy}), Point{1, -1}) == "(1,c,0)");
}

TEST_CASE("F2 sum and product are pointwise") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const LogicalGraph g1 = random_f2_graph(rng), g2 = random_f2_graph(rng);
    const LogicalGraph add = boolean_combine(g1, g2, F2Op::Add);
    const LogicalGraph mul = boolean_combine(g1, g2, F2Op::Mul);
    validate_graph(add);
    validate_graph(mul);
    for (int i = 0; i < 1000; ++i) {
      const Point x = uniform_point(rng, 2, -2, 2);
      const int a = std::stoi(evaluate(g1, x)), b = std::stoi(evaluate(g2, x));
      CHECK(evaluate(add, x) == std::to_string((a + b) % 2));
      CHECK(evaluate(mul, x) == std::to_string(a * b));
    }
  }
}

TEST_CASE("ring laws on sample points") {
  std::mt19937_64 rng(3);
  const LogicalGraph a = random_f2_graph(rng), b = random_f2_graph(rng), c = random_f2_graph(rng);
  const LogicalGraph one = constant_graph(2, "1"), zero = constant_graph(2, "0");
  auto add = [](const LogicalGraph& x, const LogicalGraph& y) { return boolean_combine(x, y, F2Op::Add); };
  auto mul = [](const LogicalGraph& x, const LogicalGraph& y) { return boolean_combine(x, y, F2Op::Mul); };
  const LogicalGraph lhs_dist = mul(a, add(b, c)), rhs_dist = add(mul(a, b), mul(a, c));
  const LogicalGraph assoc_l = mul(mul(a, b), c), assoc_r = mul(a, mul(b, c));
  const LogicalGraph a_plus_a = add(a, a), a_one = mul(a, one), a_zero = add(a, zero), a_sq = mul(a, a);
  for (int i = 0; i < 1000; ++i) {
    const Point x = uniform_point(rng, 2, -2, 2);
    CHECK(evaluate(lhs_dist, x) == evaluate(rhs_dist, x));
    CHECK(evaluate(assoc_l, x) == evaluate(assoc_r, x));
    CHECK(evaluate(a_plus_a, x) == "0");
    CHECK(evaluate(a_one, x) == evaluate(a, x));
    CHECK(evaluate(a_zero, x) == evaluate(a, x));
    CHECK(evaluate(a_sq, x) == evaluate(a, x));
  }
}

TEST_CASE("zero locus of the graph of g") {
  std::mt19937_64 rng(4);
  const NetworkSpec net = random_network({2, 3, 3}, Activation::Step, FinalActivation::IndexMax, rng);
  const LogicalGraph g = compile_step_net(net);
  const LogicalGraph lift = zero_locus_lift(g);
  validate_graph(lift);
  CHECK(lift.input_dim() == 3);
  for (int i = 0; i < 300; ++i) {
    Point x = uniform_point(rng, 2, -2, 2);
    const int label = std::stoi(evaluate(g, x));
    for (int y = -1; y <= 3; ++y) {
      Point xy = x;
      xy.push_back(y);
      CHECK((evaluate(lift, xy) == "0") == (y == label));
    }
    Point edge = x;
    edge.push_back(label + 0.5);
    CHECK(evaluate(lift, edge) == "0");
    edge.back() = label + 0.75;
    CHECK(evaluate(lift, edge) == "1");
  }
  // The (+,+) chamber of every per-target band leads to the vertex labeled 0.
  for (std::size_t v = 0; v < lift.vertex_count(); ++v) {
    const auto& r = lift.routing(v);
    if (!lift.guard(v) || lift.guard(v)->cols() != 3 || lift.guard(v)->rows() != 2 || !r.count("++")) continue;
    if (lift.guard(v)->at(0, 2) != 1.0) continue;
    CHECK(lift.label(lift.arrow(r.at("++")).dst) == std::optional<std::string>("0"));
  }
}

TEST_CASE("zero locus needs integer labels") {
  const LogicalGraph g = constant_graph(1, "a");
  CHECK_CODE(zero_locus_lift(g), ErrorCode::LabelEncoding);
  CHECK_CODE(boolean_combine(g, g, F2Op::Add), ErrorCode::NotF2Labeled);
}

TEST_CASE("identity on a finite set") {
  std::mt19937_64 rng(5);
  const auto pts = uniform_points(rng, 20, 2, -1, 1);
  const LogicalGraph id = identity_graph(pts, 9);
  validate_graph(id);
  for (const auto& p : pts) CHECK(evaluate(id, p) == format_point(p));
  CHECK_CODE(identity_graph({}), ErrorCode::InvalidArgument);
  CHECK_CODE(identity_graph({pts[0], pts[0]}), ErrorCode::InvalidArgument);
  CHECK_CODE(identity_graph({Point{0.0}, Point{0.0, 1.0}}), ErrorCode::DimensionMismatch);
}

TEST_CASE("parametrization image is the graph of g") {
  std::mt19937_64 rng(6);
  const LogicalGraph g = half_plane({1, -1}, 0.1);
  for (int trial = 0; trial < 3; ++trial) {
    const auto pts = uniform_points(rng, 12, 2, -1, 1);
    const LogicalGraph p = parametrize(g, pts, trial);
    std::set<std::string> image, expected;
    for (const auto& x : pts) {
      image.insert(evaluate(p, x));
      expected.insert(tuple_label({format_point(x), evaluate(g, x)}));
    }
    CHECK(image == expected);
  }
}

TEST_CASE("product factors must share the input space") {
  const LogicalGraph a = constant_graph(1, "a"), b = constant_graph(2, "b");
  CHECK_CODE(product(a, b), ErrorCode::DimensionMismatch);
  CHECK_CODE(product(std::vector<const LogicalGraph*>{}), ErrorCode::InvalidArgument);
}
