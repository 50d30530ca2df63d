#include <random>

#include "doctest.h"
#include "logifold/compile.hpp"
#include "logifold/error.hpp"
#include "support.hpp"

using namespace logifold;
using namespace testing_support;

namespace {

NetworkSpec abs_net(Activation hidden) {
  NetworkSpec net;
  net.input_dim = 1;
  net.layers = {AffineMap::from_rows({{1}, {-1}}, {0, 0}), AffineMap::identity(2)};
  net.hidden = hidden;
  net.final_activation = FinalActivation::IndexMax;
  return net;
}

}  // namespace

TEST_CASE("the |x| net by hand") {
  const NetworkSpec net = abs_net(Activation::Relu);
  CHECK(forward_classical(net, Point{0.3}) == 0);
  CHECK(forward_classical(net, Point{-0.3}) == 1);
  const LogicalGraph g = compile_relu_net(net);
  validate_graph(g);
  CHECK(evaluate(g, Point{0.3}) == "0");
  CHECK(evaluate(g, Point{-0.3}) == "1");
  CHECK(evaluate(g, Point{0.0}) == "0");
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Point x = uniform_point(rng, 1, -2, 2);
    CHECK(evaluate(g, x) == std::to_string(forward_classical(net, x)));
  }
}

TEST_CASE("compiled step nets match the forward pass") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 8; ++trial) {
    const NetworkSpec net = random_classifier(rng, 2, 4, 1 + trial % 3, Activation::Step);
    const LogicalGraph g = compile_step_net(net);
    validate_graph(g);
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
      const Point x = uniform_point(rng, 2, -2, 2);
      if (logit_margin(net, x) <= 1e-9) continue;
      bad += evaluate(g, x) != std::to_string(forward_classical(net, x));
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("compiled ReLU nets match off ties") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 6; ++trial) {
    const NetworkSpec net = random_classifier(rng, 2, 4, 2, Activation::Relu);
    CompileReport rep;
    const LogicalGraph g = compile_relu_net(net, {}, &rep);
    CHECK(rep.regions > 0);
    validate_graph(g);
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
      const Point x = uniform_point(rng, 2, -2, 2);
      if (logit_margin(net, x) <= 1e-9) continue;
      bad += evaluate(g, x) != std::to_string(forward_classical(net, x));
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("compile_net dispatches on the hidden activation") {
  const NetworkSpec step = abs_net(Activation::Step);
  const LogicalGraph g = compile_net(step);
  CHECK(evaluate(g, Point{0.5}) == std::to_string(forward_classical(step, Point{0.5})));
  CHECK(evaluate(g, Point{-0.5}) == std::to_string(forward_classical(step, Point{-0.5})));
}

TEST_CASE("a net without hidden layers is one guard") {
  NetworkSpec net;
  net.input_dim = 2;
  net.layers = {AffineMap::from_rows({{1, 0}, {0, 1}, {-1, -1}}, {0, 0, 0})};
  const LogicalGraph g = compile_relu_net(net);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Point x = uniform_point(rng, 2, -1, 1);
    if (logit_margin(net, x) <= 1e-9) continue;
    CHECK(evaluate(g, x) == std::to_string(forward_classical(net, x)));
  }
}

TEST_CASE("pairwise difference guard and sign decoding") {
  const AffineMap logits = AffineMap::from_rows({{1, 0}, {0, 1}, {0, 0}}, {0, 0, 0.5});
  const AffineMap d = pairwise_difference_guard(logits);
  CHECK(d.rows() == 3);
  const Point x{2.0, 1.0};
  const auto k = argmax_from_signs(sign_vector(d, x), 3);
  REQUIRE(k.has_value());
  CHECK(*k == argmax(logits.apply(x)));
}

TEST_CASE("compile rejects what it cannot take") {
  NetworkSpec soft = abs_net(Activation::Relu);
  soft.final_activation = FinalActivation::Softmax;
  CHECK_CODE(compile_relu_net(soft), ErrorCode::UnsupportedActivation);
  CHECK_CODE(compile_step_net(abs_net(Activation::Relu)), ErrorCode::UnsupportedActivation);
  CHECK_CODE(compile_net(abs_net(Activation::Sigmoid)), ErrorCode::UnsupportedActivation);
  NetworkSpec headed = abs_net(Activation::Relu);
  headed.heads.push_back(AffineMap::identity(2));
  CHECK_CODE(compile_relu_net(headed), ErrorCode::UnsupportedActivation);
}

TEST_CASE("caps stop runaway compiles") {
  std::mt19937_64 rng(4);
  const NetworkSpec net = random_network({2, 4, 4, 3}, Activation::Relu, FinalActivation::IndexMax, rng);
  CHECK_CODE(compile_relu_net(net, CompileCaps{kDefaultChamberCap, 2}), ErrorCode::RegionExplosion);
  CHECK_CODE(compile_relu_net(net, CompileCaps{2, 100000}), ErrorCode::GuardExplosion);
  CHECK(is_cap_error(ErrorCode::RegionExplosion));
  CHECK_FALSE(is_cap_error(ErrorCode::CyclicGraph));
}

TEST_CASE("broken nets are caught before compiling") {
  NetworkSpec net = abs_net(Activation::Relu);
  net.layers[1] = AffineMap::identity(3);
  CHECK_CODE(net.check(), ErrorCode::DimensionMismatch);
  CHECK_CODE(compile_relu_net(net), ErrorCode::DimensionMismatch);
}
