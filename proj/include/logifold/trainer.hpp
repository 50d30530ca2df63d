#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "logifold/network.hpp"

namespace logifold {

enum class Split { Train, Val, Test };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

/// Labeled points; labels are class indices 0..K-1.
struct Dataset {
  std::vector<Point> features;
  std::vector<int> labels;
  std::vector<Split> splits;

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }
  /// One more than the largest label.
  std::size_t class_count() const;
  Dataset subset(Split s) const;
  /// Throws InvalidArgument on ragged or mismatched columns.
  void check() const;
};

/// A set of disjoint nonempty blocks of class indices, each block sorted.
struct TargetPartition {
  std::vector<std::vector<int>> blocks;

  static TargetPartition fine(std::size_t classes);
  /// Sorted union of the blocks.
  std::vector<int> flattening() const;
  bool is_fine() const;
  /// Index of the block holding class c, or -1.
  int block_of(int c) const;
  /// Throws BlockMismatch on empty or overlapping blocks.
  void check() const;
  /// "{0,1}{2}"
  std::string str() const;
  bool operator==(const TargetPartition&) const = default;
  auto operator<=>(const TargetPartition&) const = default;
};

struct Hyperparams {
  double learning_rate = 0.1;
  std::size_t batch_size = 16;
  std::size_t epochs = 100;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  void check() const;
};

struct TrainResult {
  NetworkSpec net;
  std::vector<double> loss;  // C_Z before training, then after every epoch
};

/// Sum over the data of ||f(x) - e_y||^2, with f = forward_probabilities.
double squared_loss(const NetworkSpec& net, const std::vector<Point>& xs, const std::vector<int>& ys);

/// Gradient of squared_loss, same shapes as the layers followed by the heads.
std::vector<AffineMap> loss_gradient(const NetworkSpec& net, const std::vector<Point>& xs, const std::vector<int>& ys);

/// Layers then heads, each matrix row-major followed by its offset.
std::vector<double> flatten_parameters(const NetworkSpec& net);
void assign_parameters(NetworkSpec& net, const std::vector<double>& theta);

/// Minibatch SGD  theta <- theta - eta * grad - eta * W  on the mean batch
/// loss, W Gaussian with std noise_std. Hidden layers sigmoid or relu, output
/// softmax. With heads_only, the layers (and all heads but the last) stay fixed.
TrainResult train_sgd(const NetworkSpec& net, const std::vector<Point>& xs, const std::vector<int>& ys,
                      const Hyperparams& h, bool heads_only = false);
TrainResult train_sgd(const NetworkSpec& net, const Dataset& data, const Hyperparams& h);

/// Head from the blocks of `base` to the blocks of `target`: weight `gain`
/// where the base block lies inside the target block. Each target block must
/// be a union of base blocks (BlockMismatch otherwise).
AffineMap membership_head(const TargetPartition& base, const TargetPartition& target, double gain = 4.0);

/// Appends membership_head and trains it alone on the instances whose class
/// lies in the new flattening, relabeled by block.
TrainResult specialize(const NetworkSpec& net, const TargetPartition& base, const TargetPartition& target,
                       const Dataset& data, const Hyperparams& h);

/// Class labels mapped to block indices; instances outside the flattening are dropped.
Dataset relabel(const Dataset& data, const TargetPartition& partition);

enum class SynthKind { Blobs, GridDiagonal, Rings };
SynthKind synth_kind_from_string(std::string_view s);
std::string_view to_string(SynthKind k);

struct SynthOptions {
  double sigma = 1.0;       // blobs: per-coordinate std
  double separation = 4.0;  // blobs: closest mean distance in units of sigma
};

/// `size` points over `classes` labels (round robin), split 60/20/20 per class.
Dataset synth_dataset(SynthKind kind, std::size_t dim, std::size_t classes, std::size_t size, std::uint64_t seed,
                      const SynthOptions& options = {});

/// Fraction of instances whose argmax output is the label.
double accuracy(const NetworkSpec& net, const std::vector<Point>& xs, const std::vector<int>& ys);

}  // namespace logifold
