#include <random>

#include "doctest.h"
#include "logifold/error.hpp"
#include "logifold/llg.hpp"
#include "support.hpp"

using namespace logifold;
using namespace testing_support;

TEST_CASE("affine rows match a scalar loop") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 50; ++trial) {
    AffineMap l(3, 4);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 4; ++c) l.at(r, c) = n01(rng);
      l.offset(r) = n01(rng);
    }
    const Point x = uniform_point(rng, 4, -3, 3);
    const Point y = l.apply(x);
    for (std::size_t r = 0; r < 3; ++r) {
      double acc = l.offset(r);
      for (std::size_t c = 0; c < 4; ++c) acc += l.at(r, c) * x[c];
      CHECK(y[r] == acc);
    }
  }
}

TEST_CASE("sign vectors use the closed plus side") {
  const AffineMap l = AffineMap::from_rows({{1, 0}, {0, 1}}, {0, 0});
  CHECK(sign_vector(l, Point{0, -1}).str() == "+-");
  CHECK(sign_vector(l, Point{-0.0, 0}).str() == "++");
  CHECK(all_sign_vectors(2).size() == 4);
  CHECK(all_sign_vectors(2).front().str() == "++");
  CHECK_FALSE(SignVector::is_valid_key("+x"));
}

TEST_CASE("quadrant graph agrees with the quadrant test") {
  const LogicalGraph g = quadrant_graph();
  const auto rep = validate_graph(g);
  CHECK(rep.target_count == 4);
  CHECK(rep.guard_count == 3);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Point x = uniform_point(rng, 2, -1, 1);
    CHECK(evaluate(g, x) == quadrant_oracle(x));
  }
  CHECK(evaluate(g, Point{0, 0}) == "q0");
  CHECK(evaluate(g, Point{0, -1e-300}) == "q1");
}

TEST_CASE("path sum has one live term and agrees with the walk") {
  const LogicalGraph g = quadrant_graph();
  CHECK(count_paths(g) == 4);
  const auto paths = enumerate_paths(g);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Point x = uniform_point(rng, 2, -1, 1);
    const auto r = evaluate_pathsum(g, paths, x);
    CHECK(r.label == evaluate(g, x));
    CHECK(r.nonzero_terms == 1);
    CHECK(r.terms.size() == 4);
  }
  CHECK_CODE(enumerate_paths(g, 3), ErrorCode::PathExplosion);
}

TEST_CASE("single arrow graph needs no guard") {
  LogicalGraph g(1);
  const auto s = g.add_vertex("s", VertexKind::Source);
  g.add_arrow(s, g.add_target("only"));
  validate_graph(g);
  CHECK(evaluate(g, Point{3.0}) == "only");
}

TEST_CASE("malformed graphs are rejected") {
  SUBCASE("two sources") {
    LogicalGraph g(1);
    const auto a = g.add_vertex("a", VertexKind::Source);
    const auto b = g.add_vertex("b", VertexKind::Internal);
    const auto t = g.add_target("t");
    g.add_arrow(a, t);
    g.add_arrow(b, t);
    CHECK_CODE(validate_graph(g), ErrorCode::MultipleSources);
  }
  SUBCASE("cycle behind the source") {
    LogicalGraph g(1);
    const auto s = g.add_vertex("s", VertexKind::Source);
    const auto a = g.add_vertex("a", VertexKind::Internal);
    const auto b = g.add_vertex("b", VertexKind::Internal);
    const auto t = g.add_target("t");
    g.add_arrow(s, a);
    g.add_arrow(a, b);
    g.set_guard(b, AffineMap::from_rows({{1}}, {0}));
    g.set_route(b, SignVector("+"), g.add_arrow(b, a));
    g.set_route(b, SignVector("-"), g.add_arrow(b, t));
    CHECK_CODE(validate_graph(g), ErrorCode::CyclicGraph);
  }
  SUBCASE("missing route for a realizable chamber") {
    LogicalGraph g(2);
    const auto s = g.add_vertex("s", VertexKind::Source);
    const auto t0 = g.add_target("0");
    const auto t1 = g.add_target("1");
    g.set_guard(s, AffineMap::from_rows({{1, 0}, {0, 1}}, {0, 0}));
    g.set_route(s, SignVector("++"), g.add_arrow(s, t0));
    g.set_route(s, SignVector("--"), g.add_arrow(s, t1));
    CHECK_CODE(validate_graph(g), ErrorCode::IncompleteRouting);
  }
  SUBCASE("unrealizable chambers may stay unrouted") {
    LogicalGraph g(1);
    const auto s = g.add_vertex("s", VertexKind::Source);
    const auto t0 = g.add_target("0");
    const auto t1 = g.add_target("1");
    g.set_guard(s, AffineMap::from_rows({{1}, {1}}, {0, -1}));
    const auto a0 = g.add_arrow(s, t0);
    const auto a1 = g.add_arrow(s, t1);
    g.set_route(s, SignVector("++"), a1);
    g.set_route(s, SignVector("+-"), a0);
    g.set_route(s, SignVector("--"), a0);
    validate_graph(g);
    CHECK(evaluate(g, Point{2.0}) == "1");
    CHECK(evaluate(g, Point{0.5}) == "0");
  }
  SUBCASE("branching without a guard") {
    LogicalGraph g(1);
    const auto s = g.add_vertex("s", VertexKind::Source);
    g.add_arrow(s, g.add_target("a"));
    g.add_arrow(s, g.add_target("b"));
    CHECK_CODE(validate_graph(g), ErrorCode::IncompleteRouting);
  }
  SUBCASE("guard of the wrong width") {
    LogicalGraph g(2);
    const auto s = g.add_vertex("s", VertexKind::Source);
    CHECK_CODE(g.set_guard(s, AffineMap::from_rows({{1}}, {0})), ErrorCode::DimensionMismatch);
  }
  SUBCASE("duplicate ids and foreign routes") {
    LogicalGraph g(1);
    const auto s = g.add_vertex("s", VertexKind::Source);
    CHECK_CODE(g.add_vertex("s", VertexKind::Internal), ErrorCode::InvalidArgument);
    const auto t = g.add_target("t");
    const auto u = g.add_vertex("u", VertexKind::Internal);
    const auto a = g.add_arrow(u, t);
    g.set_guard(s, AffineMap::from_rows({{1}}, {0}));
    CHECK_CODE(g.set_route(s, SignVector("+"), a), ErrorCode::InvalidArgument);
  }
  SUBCASE("target without label") {
    LogicalGraph g(1);
    const auto s = g.add_vertex("s", VertexKind::Source);
    g.add_arrow(s, g.add_vertex("t", VertexKind::Target));
    CHECK_CODE(validate_graph(g), ErrorCode::DanglingVertex);
  }
}

TEST_CASE("evaluation checks the input dimension") {
  const LogicalGraph g = quadrant_graph();
  CHECK_CODE(evaluate(g, Point{1.0}), ErrorCode::DimensionMismatch);
}
