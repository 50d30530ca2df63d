#include <random>

#include "doctest.h"
#include "logifold/compile.hpp"
#include "logifold/semilinear.hpp"
#include "support.hpp"

using namespace logifold;
using namespace testing_support;

namespace {

LinearRow random_row(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> c(-2, 2);
  LinearRow r;
  for (std::size_t i = 0; i < n; ++i) r.a.push_back(c(rng));
  r.b = c(rng);
  return r;
}

BasicSemilinearSet random_system(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> rows(3, 6), kind(0, 5);
  BasicSemilinearSet b;
  b.dim = n;
  for (int k = rows(rng); k > 0; --k) {
    const int t = kind(rng);
    (t == 0 ? b.eq : t < 3 ? b.ge : b.gt).push_back(random_row(rng, n));
  }
  return b;
}

bool row_oracle(const BasicSemilinearSet& b, const Point& x) {
  auto val = [&](const LinearRow& r) {
    double v = r.b;
    for (std::size_t i = 0; i < x.size(); ++i) v += r.a[i] * x[i];
    return v;
  };
  for (const auto& r : b.eq) {
    if (std::abs(val(r)) > 1e-12) return false;
  }
  for (const auto& r : b.gt) {
    if (!(val(r) > 0)) return false;
  }
  for (const auto& r : b.ge) {
    if (!(val(r) >= 0)) return false;
  }
  return true;
}

SemilinearFunction quadrant_function() {
  SemilinearFunction f;
  f.dim = 2;
  const LinearRow x{{1, 0}, 0}, y{{0, 1}, 0};
  auto piece = [&](bool xp, bool yp) {
    BasicSemilinearSet b;
    b.dim = 2;
    (xp ? b.ge : b.gt).push_back(xp ? x : x.negated());
    (yp ? b.ge : b.gt).push_back(yp ? y : y.negated());
    return SemilinearSet{2, {b}};
  };
  f.fibers["q0"] = piece(true, true);
  f.fibers["q1"] = piece(true, false);
  f.fibers["q2"] = piece(false, true);
  f.fibers["q3"] = piece(false, false);
  return f;
}

}  // namespace

TEST_CASE("membership agrees with a row by row check") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    BasicSemilinearSet b = random_system(rng, 2);
    b.eq.clear();
    for (int i = 0; i < 1000; ++i) {
      const Point x = uniform_point(rng, 2, -3, 3);
      CHECK(contains(b, x) == row_oracle(b, x));
      CHECK(contains(b, x, ContainsMode::Rational) == contains_exact(b, to_rational(x)));
    }
  }
}

TEST_CASE("emptiness verdicts carry proofs") {
  std::mt19937_64 rng(2);
  int empty = 0, nonempty = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const BasicSemilinearSet b = random_system(rng, 3);
    const EmptinessCheck v = check_emptiness(b, true);
    CHECK(v.empty == is_empty(b));
    bool grid_hit = false;
    for (double x = -4; x <= 4 && !grid_hit; x += 0.5) {
      for (double y = -4; y <= 4 && !grid_hit; y += 0.5) {
        for (double z = -4; z <= 4 && !grid_hit; z += 0.5) grid_hit = contains_exact(b, to_rational(Point{x, y, z}));
      }
    }
    if (v.empty) {
      ++empty;
      CHECK_FALSE(grid_hit);
      REQUIRE(v.certificate.has_value());
      CHECK(verify_certificate(b.constraints(), *v.certificate));
    } else {
      ++nonempty;
      CHECK(contains_exact(b, v.witness));
    }
  }
  CHECK(empty > 0);
  CHECK(nonempty > 0);
}

TEST_CASE("strict and weak rows at the boundary") {
  BasicSemilinearSet open{1, {}, {LinearRow{{1}, 0}, LinearRow{{-1}, 0}}, {}};
  CHECK(is_empty(open));
  BasicSemilinearSet closed{1, {}, {}, {LinearRow{{1}, 0}, LinearRow{{-1}, 0}}};
  CHECK_FALSE(is_empty(closed));
  CHECK(contains(closed, Point{0.0}));
  BasicSemilinearSet line{2, {LinearRow{{1, -1}, 0}}, {}, {}};
  CHECK(contains(line, Point{0.5, 0.5}));
  CHECK_FALSE(contains(line, Point{0.5, 0.6}));
}

TEST_CASE("canonical pieces cover the same points") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    BasicSemilinearSet b = random_system(rng, 2);
    b.eq.clear();
    const auto pieces = to_canonical(b);
    for (const auto& p : pieces) CHECK(p.ge.empty());
    for (int i = 0; i < 300; ++i) {
      // integer points hit the weak boundaries often
      std::uniform_int_distribution<int> c(-3, 3);
      const Point x{static_cast<double>(c(rng)), static_cast<double>(c(rng))};
      bool any = false;
      for (const auto& p : pieces) any = any || contains_exact(p, to_rational(x));
      CHECK(any == contains_exact(b, to_rational(x)));
    }
  }
}

TEST_CASE("dimension budget") {
  BasicSemilinearSet b;
  b.dim = 9;
  b.gt.push_back(LinearRow{std::vector<double>(9, 1.0), 0});
  CHECK_CODE(check_emptiness(b), ErrorCode::DimensionBudgetExceeded);
}

TEST_CASE("fibers of a compiled step net") {
  std::mt19937_64 rng(4);
  const NetworkSpec net = random_classifier(rng, 2, 3, 2, Activation::Step);
  const LogicalGraph g = compile_step_net(net);
  const SemilinearFunction f = from_llgraph(g);
  for (int i = 0; i < 10000; ++i) {
    const Point x = uniform_point(rng, 2, -2, 2);
    const std::string t = evaluate(g, x);
    for (const auto& [label, set] : f.fibers) CHECK(contains(set, x) == (label == t));
  }
}

TEST_CASE("quadrant function to a graph") {
  const SemilinearFunction f = quadrant_function();
  const LogicalGraph g = to_llgraph(f);
  validate_graph(g);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Point x = uniform_point(rng, 2, -1, 1);
    CHECK(evaluate(g, x) == quadrant_oracle(x));
  }
  CHECK(evaluate(g, Point{0, 0}) == "q0");
}

TEST_CASE("uncovered points go to bottom") {
  SemilinearFunction f;
  f.dim = 1;
  f.fibers["pos"] = SemilinearSet{1, {BasicSemilinearSet{1, {}, {LinearRow{{1}, 0}}, {}}}};
  const LogicalGraph g = to_llgraph(f);
  CHECK(evaluate(g, Point{1.0}) == "pos");
  CHECK(evaluate(g, Point{0.0}) == kBottomLabel);
  CHECK(label_of(f, Point{-1.0}) == std::nullopt);
}

TEST_CASE("overlapping fibers are rejected") {
  SemilinearFunction f;
  f.dim = 1;
  const BasicSemilinearSet all{1, {}, {}, {}};
  f.fibers["a"] = SemilinearSet{1, {all}};
  f.fibers["b"] = SemilinearSet{1, {all}};
  CHECK_CODE(to_llgraph(f), ErrorCode::AmbiguousFiber);
}

TEST_CASE("graph to semilinear and back") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 3; ++trial) {
    const NetworkSpec net = random_classifier(rng, 2, 3, 1 + trial % 2, Activation::Relu);
    const LogicalGraph g = compile_relu_net(net);
    const LogicalGraph back = to_llgraph(from_llgraph(g));
    validate_graph(back);
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
      const Point x = uniform_point(rng, 2, -2, 2);
      bad += evaluate(back, x) != evaluate(g, x);
    }
    CHECK(bad == 0);
  }
}
