#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "logifold/error.hpp"
#include "logifold/llg.hpp"
#include "logifold/network.hpp"
#include "logifold/trainer.hpp"

#define CHECK_CODE(expr, ec)                         \
  do {                                               \
    try {                                            \
      (void)(expr);                                  \
      FAIL("expected " << to_string(ec));            \
    } catch (const Error& e) {                       \
      CHECK_MESSAGE(e.code() == ec, std::string(e.what()));    \
    }                                                \
  } while (0)

namespace testing_support {

using logifold::Point;

inline Point uniform_point(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Point x(n);
  for (double& v : x) v = u(rng);
  return x;
}

inline std::vector<Point> uniform_points(std::mt19937_64& rng, std::size_t count, std::size_t n, double lo, double hi) {
  std::vector<Point> xs;
  xs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) xs.push_back(uniform_point(rng, n, lo, hi));
  return xs;
}

/// Net with input n, `depth` hidden layers of width in [1, max_width] and
/// 2..max_width outputs.
inline logifold::NetworkSpec random_classifier(std::mt19937_64& rng, std::size_t n, std::size_t max_width,
                                               std::size_t depth, logifold::Activation hidden) {
  std::uniform_int_distribution<std::size_t> w(1, max_width), out(2, std::max<std::size_t>(2, max_width));
  std::vector<std::size_t> widths{n};
  for (std::size_t k = 0; k < depth; ++k) widths.push_back(w(rng));
  widths.push_back(out(rng));
  return logifold::random_network(widths, hidden, logifold::FinalActivation::IndexMax, rng);
}

/// Gap between the two largest final logits.
inline double logit_margin(const logifold::NetworkSpec& net, const Point& x) {
  Point z = logifold::forward_logits(net, x);
  if (z.size() < 2) return 1.0;
  std::partial_sort(z.begin(), z.begin() + 2, z.end(), std::greater<>());
  return z[0] - z[1];
}

/// Smallest |pre-activation| over every hidden unit; step and ReLU kinks sit at 0.
inline double kink_margin(const logifold::NetworkSpec& net, const Point& x) {
  double m = 1e300;
  Point h = x;
  for (std::size_t k = 0; k + 1 < net.layers.size(); ++k) {
    const Point z = net.layers[k].apply(h);
    for (double v : z) m = std::min(m, std::abs(v));
    h = logifold::hidden_layer(net.layers[k], net.hidden, h);
  }
  return m;
}

/// Ids "q0".."q3" by the signs of (x, y) with the >= 0 convention:
/// q0 = (+,+), q1 = (+,-), q2 = (-,+), q3 = (-,-).
inline logifold::LogicalGraph quadrant_graph() {
  using namespace logifold;
  LogicalGraph g(2);
  const auto s = g.add_vertex("s", VertexKind::Source);
  const auto px = g.add_vertex("px", VertexKind::Internal);
  const auto nx = g.add_vertex("nx", VertexKind::Internal);
  g.set_guard(s, AffineMap::from_rows({{1, 0}}, {0}));
  g.set_route(s, SignVector("+"), g.add_arrow(s, px));
  g.set_route(s, SignVector("-"), g.add_arrow(s, nx));
  const AffineMap y = AffineMap::from_rows({{0, 1}}, {0});
  int q = 0;
  for (auto v : {px, nx}) {
    g.set_guard(v, y);
    for (const char* sign : {"+", "-"}) {
      const auto t = g.add_target("q" + std::to_string(q++));
      g.set_route(v, SignVector(sign), g.add_arrow(v, t));
    }
  }
  return g;
}

inline std::string quadrant_oracle(const Point& x) {
  const int q = (x[0] >= 0 ? 0 : 2) + (x[1] >= 0 ? 0 : 1);
  return "q" + std::to_string(q);
}

struct GradientCheck {
  double worst_relative = 0.0;
  std::size_t coordinates = 0;
};

/// Central differences with step delta on `count` random coordinates.
inline GradientCheck gradient_check(const logifold::NetworkSpec& net, const std::vector<Point>& xs,
                                    const std::vector<int>& ys, std::mt19937_64& rng, std::size_t count,
                                    double delta = 1e-5) {
  using namespace logifold;
  NetworkSpec grad_net = net;
  const auto grads = loss_gradient(net, xs, ys);
  for (std::size_t k = 0; k < net.layers.size(); ++k) grad_net.layers[k] = grads[k];
  for (std::size_t k = 0; k < net.heads.size(); ++k) grad_net.heads[k] = grads[net.layers.size() + k];
  const std::vector<double> analytic = flatten_parameters(grad_net);
  const std::vector<double> theta = flatten_parameters(net);
  std::uniform_int_distribution<std::size_t> pick(0, theta.size() - 1);
  GradientCheck out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = pick(rng);
    NetworkSpec plus = net, minus = net;
    std::vector<double> tp = theta, tm = theta;
    tp[j] += delta;
    tm[j] -= delta;
    assign_parameters(plus, tp);
    assign_parameters(minus, tm);
    const double numeric = (squared_loss(plus, xs, ys) - squared_loss(minus, xs, ys)) / (2 * delta);
    const double scale = std::max(std::abs(numeric), std::abs(analytic[j]));
    const double rel = scale < 1e-10 ? 0.0 : std::abs(numeric - analytic[j]) / scale;
    out.worst_relative = std::max(out.worst_relative, rel);
    ++out.coordinates;
  }
  return out;
}

}  // namespace testing_support
