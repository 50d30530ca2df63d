#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "logifold/exact.hpp"
#include "logifold/llg.hpp"
#include "logifold/network.hpp"

namespace logifold {

struct CompileCaps {
  std::size_t chambers = kDefaultChamberCap;  // per guard
  std::size_t regions = 100'000;              // total over the region tree
};

struct CompileReport {
  std::size_t regions = 0;  // region-tree nodes created
  std::size_t pruned = 0;   // sign vectors found infeasible inside their region
  std::vector<std::string> warnings;
};

/// Step hidden layers, index-max output.
LogicalGraph compile_step_net(const NetworkSpec& net, const CompileCaps& caps = {}, CompileReport* report = nullptr);

/// ReLU hidden layers, index-max output.
LogicalGraph compile_relu_net(const NetworkSpec& net, const CompileCaps& caps = {}, CompileReport* report = nullptr);

/// LogicalGraph for either classical activation.
LogicalGraph compile_net(const NetworkSpec& net, const CompileCaps& caps = {}, CompileReport* report = nullptr);

/// Node of the linear-region tree of a ReLU net. Node at depth i holds the
/// input of hidden layer i+1 as an affine function of x on its region; leaves
/// (depth = number of hidden layers) hold the logits instead.
struct RegionNode {
  std::size_t depth = 0;
  std::vector<Constraint> region;  // chamber constraints inherited from ancestors
  RationalPoint witness;
  AffineMap map;                   // affine form of the layer input, or the logits at a leaf
  std::optional<AffineMap> pre;    // next pre-activation; absent at leaves
  std::vector<std::pair<SignVector, std::size_t>> children;
};

struct RegionTree {
  std::vector<RegionNode> nodes;  // nodes[0] is the root
  std::size_t pruned = 0;
};

RegionTree build_relu_regions(const NetworkSpec& net, const CompileCaps& caps = {});

/// Guard (l_i - l_j)_{i<j} on the logits l; its sign vector determines the
/// lowest-index argmax.
AffineMap pairwise_difference_guard(const AffineMap& logits);
/// Lowest-index argmax read off a sign vector of pairwise_difference_guard;
/// empty when the signs are not a consistent ordering.
std::optional<std::size_t> argmax_from_signs(const SignVector& s, std::size_t outputs);

}  // namespace logifold
