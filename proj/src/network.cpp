#include "logifold/network.hpp"

#include <cmath>

#include "logifold/error.hpp"

namespace logifold {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Step: return "step";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "relu";
}

std::string_view to_string(FinalActivation a) { return a == FinalActivation::IndexMax ? "indexmax" : "softmax"; }

Activation activation_from_string(std::string_view s) {
  if (s == "step") return Activation::Step;
  if (s == "relu") return Activation::Relu;
  if (s == "sigmoid") return Activation::Sigmoid;
  fail(ErrorCode::UnsupportedActivation, "unknown hidden activation '" + std::string(s) + "'");
}

FinalActivation final_activation_from_string(std::string_view s) {
  if (s == "indexmax") return FinalActivation::IndexMax;
  if (s == "softmax") return FinalActivation::Softmax;
  fail(ErrorCode::UnsupportedActivation, "unknown final activation '" + std::string(s) + "'");
}

void NetworkSpec::check() const {
  if (layers.empty()) fail(ErrorCode::DimensionMismatch, "network has no layers");
  std::size_t width = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].cols() != width) {
      fail(ErrorCode::DimensionMismatch, "layer " + std::to_string(i + 1) + " expects " +
                                             std::to_string(layers[i].cols()) + " inputs, previous width is " +
                                             std::to_string(width));
    }
    if (layers[i].rows() == 0) fail(ErrorCode::DimensionMismatch, "layer " + std::to_string(i + 1) + " has no rows");
    width = layers[i].rows();
  }
  for (std::size_t i = 0; i < heads.size(); ++i) {
    if (width == 1) width = 2;  // one logit reads as a point of S^1
    if (heads[i].cols() != width) fail(ErrorCode::DimensionMismatch, "head " + std::to_string(i + 1) + " does not chain");
    width = heads[i].rows();
  }
}

std::size_t NetworkSpec::output_dim() const {
  if (!heads.empty()) return heads.back().rows();
  return layers.empty() ? 0 : layers.back().rows();
}

double step(double z) { return z >= 0.0 ? 1.0 : 0.0; }
double relu(double z) { return z >= 0.0 ? z : 0.0; }
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Point softmax(std::span<const double> z) {
  Point out(z.begin(), z.end());
  if (out.empty()) return out;
  double m = out[0];
  for (double v : out) m = std::max(m, v);
  double total = 0.0;
  for (double& v : out) {
    v = std::exp(v - m);
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Point hidden_layer(const AffineMap& l, Activation act, std::span<const double> h) {
  Point z = l.apply(h);
  for (double& v : z) {
    switch (act) {
      case Activation::Step: v = step(v); break;
      case Activation::Relu: v = relu(v); break;
      case Activation::Sigmoid: v = sigmoid(v); break;
    }
  }
  return z;
}

Point forward_logits(const NetworkSpec& net, std::span<const double> x) {
  if (x.size() != net.input_dim) {
    fail(ErrorCode::DimensionMismatch, "point of dimension " + std::to_string(x.size()) + " for network on R^" +
                                           std::to_string(net.input_dim));
  }
  Point h(x.begin(), x.end());
  for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) h = hidden_layer(net.layers[i], net.hidden, h);
  return net.layers.back().apply(h);
}

std::size_t forward_classical(const NetworkSpec& net, std::span<const double> x) {
  if (net.hidden == Activation::Sigmoid && net.layers.size() > 1) {
    fail(ErrorCode::UnsupportedActivation, "classical evaluation needs step or relu hidden layers");
  }
  if (net.final_activation != FinalActivation::IndexMax) {
    fail(ErrorCode::UnsupportedActivation, "classical evaluation needs an indexmax output");
  }
  const Point z = forward_logits(net, x);
  return argmax(z);
}

Point forward_probabilities(const NetworkSpec& net, std::span<const double> x) {
  if (net.hidden == Activation::Step && net.layers.size() > 1) {
    fail(ErrorCode::UnsupportedActivation, "probability output needs relu or sigmoid hidden layers");
  }
  Point p = output_simplex(forward_logits(net, x));
  for (const AffineMap& head : net.heads) p = output_simplex(head.apply(p));
  return p;
}

Point output_simplex(std::span<const double> z) {
  if (z.size() == 1) {
    const double s = sigmoid(z[0]);
    return {1.0 - s, s};
  }
  return softmax(z);
}

NetworkSpec random_network(const std::vector<std::size_t>& widths, Activation hidden, FinalActivation final_activation,
                           std::mt19937_64& rng, double scale) {
  if (widths.size() < 2) fail(ErrorCode::InvalidArgument, "need at least input and output widths");
  std::uniform_real_distribution<double> u(-scale, scale);
  NetworkSpec net;
  net.input_dim = widths[0];
  net.hidden = hidden;
  net.final_activation = final_activation;
  for (std::size_t i = 1; i < widths.size(); ++i) {
    AffineMap l(widths[i], widths[i - 1]);
    for (std::size_t r = 0; r < l.rows(); ++r) {
      for (std::size_t c = 0; c < l.cols(); ++c) l.at(r, c) = u(rng);
      l.offset(r) = u(rng);
    }
    net.layers.push_back(std::move(l));
  }
  return net;
}

}  // namespace logifold
