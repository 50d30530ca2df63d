#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "logifold/affine.hpp"

namespace logifold {

enum class Activation { Step, Relu, Sigmoid };
enum class FinalActivation { IndexMax, Softmax };

std::string_view to_string(Activation a);
std::string_view to_string(FinalActivation a);
Activation activation_from_string(std::string_view s);
FinalActivation final_activation_from_string(std::string_view s);

/// Feed-forward net  sigma ∘ L_N ∘ s ∘ L_{N-1} ∘ ... ∘ s ∘ L_1.
///
/// `heads` are extra affine layers appended after the final softmax, each
/// followed by its own softmax; specialization trains them with the rest frozen.
struct NetworkSpec {
  std::size_t input_dim = 0;
  std::vector<AffineMap> layers;
  Activation hidden = Activation::Relu;
  FinalActivation final_activation = FinalActivation::IndexMax;
  std::vector<AffineMap> heads;

  /// Throws DimensionMismatch on broken chaining or an empty layer list.
  void check() const;
  std::size_t output_dim() const;
  std::size_t hidden_count() const { return layers.empty() ? 0 : layers.size() - 1; }
  bool operator==(const NetworkSpec&) const = default;
};

double step(double z);
double relu(double z);
double sigmoid(double z);
Point softmax(std::span<const double> z);

/// Softmax, except that a single logit z gives (1 - s(z), s(z)).
Point output_simplex(std::span<const double> z);

/// Lowest index among the maxima.
std::size_t argmax(std::span<const double> v);

/// Hidden activation applied to L(h), row by row.
Point hidden_layer(const AffineMap& l, Activation act, std::span<const double> h);

/// Pre-activation of the last layer (the logits), for any hidden activation.
Point forward_logits(const NetworkSpec& net, std::span<const double> x);

/// Classical semantics: STEP or RELU hidden layers, INDEXMAX output.
std::size_t forward_classical(const NetworkSpec& net, std::span<const double> x);

/// Probability output: output_simplex of the logits, then of each head.
Point forward_probabilities(const NetworkSpec& net, std::span<const double> x);

/// Layers with the given widths (widths[0] = input dimension), entries
/// uniform in [-scale, scale].
NetworkSpec random_network(const std::vector<std::size_t>& widths, Activation hidden, FinalActivation final_activation,
                           std::mt19937_64& rng, double scale = 1.0);

}  // namespace logifold
