#include <cmath>
#include <random>

#include "doctest.h"
#include "logifold/trainer.hpp"
#include "support.hpp"

using namespace logifold;
using namespace testing_support;

namespace {

Hyperparams params(double lr, std::size_t epochs, std::uint64_t seed) {
  Hyperparams h;
  h.learning_rate = lr;
  h.epochs = epochs;
  h.seed = seed;
  return h;
}

}  // namespace

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(3);
  const Dataset d = synth_dataset(SynthKind::Blobs, 2, 3, 30, 3);
  SUBCASE("sigmoid 2-8-3") {
    const NetworkSpec net = random_network({2, 8, 3}, Activation::Sigmoid, FinalActivation::Softmax, rng);
    CHECK(gradient_check(net, d.features, d.labels, rng, 10).worst_relative <= 1e-6);
  }
  SUBCASE("relu with a head") {
    NetworkSpec net = random_network({2, 5, 3}, Activation::Relu, FinalActivation::Softmax, rng);
    net.heads.push_back(membership_head(TargetPartition::fine(3), TargetPartition{{{0, 1}, {2}}}));
    std::vector<int> ys;
    for (int y : d.labels) ys.push_back(y == 2 ? 1 : 0);
    CHECK(gradient_check(net, d.features, ys, rng, 20).worst_relative <= 1e-6);
  }
  SUBCASE("single logistic output") {
    const NetworkSpec net = random_network({2, 4, 1}, Activation::Sigmoid, FinalActivation::Softmax, rng);
    std::vector<int> ys;
    for (int y : d.labels) ys.push_back(y == 0 ? 0 : 1);
    CHECK(gradient_check(net, d.features, ys, rng, 10).worst_relative <= 1e-6);
  }
}

TEST_CASE("loss on two blobs drops by half") {
  SynthOptions o;
  o.separation = 4.0;
  const Dataset d = synth_dataset(SynthKind::Blobs, 2, 2, 200, 7, o);
  std::mt19937_64 rng(7);
  const NetworkSpec net = random_network({2, 16, 2}, Activation::Sigmoid, FinalActivation::Softmax, rng);
  const TrainResult r = train_sgd(net, d, params(0.1, 200, 7));
  CHECK(r.loss.size() == 201);
  CHECK(r.loss.back() <= 0.5 * r.loss.front());
  const Dataset train = d.subset(Split::Train);
  CHECK(r.loss.front() == doctest::Approx(squared_loss(net, train.features, train.labels)));
}

TEST_CASE("training is deterministic under a seed") {
  const Dataset d = synth_dataset(SynthKind::Blobs, 2, 3, 90, 1);
  std::mt19937_64 r1(5), r2(5);
  const NetworkSpec a = random_network({2, 4, 3}, Activation::Relu, FinalActivation::Softmax, r1);
  const NetworkSpec b = random_network({2, 4, 3}, Activation::Relu, FinalActivation::Softmax, r2);
  CHECK(a == b);
  Hyperparams h = params(0.2, 10, 9);
  h.noise_std = 0.01;
  CHECK(train_sgd(a, d, h).net == train_sgd(b, d, h).net);
  Hyperparams other = h;
  other.seed = 10;
  CHECK_FALSE(train_sgd(a, d, h).net == train_sgd(a, d, other).net);
}

TEST_CASE("separated blobs give a linear classifier above 95 percent") {
  SynthOptions o;
  o.separation = 4.0;
  const Dataset d = synth_dataset(SynthKind::Blobs, 2, 2, 300, 7, o);
  std::mt19937_64 rng(7);
  const NetworkSpec net = random_network({2, 2}, Activation::Relu, FinalActivation::Softmax, rng);
  const TrainResult r = train_sgd(net, d, params(0.5, 100, 7));
  const Dataset val = d.subset(Split::Val);
  CHECK(accuracy(r.net, val.features, val.labels) > 0.95);
}

TEST_CASE("specializing to a coarser target trains only the head") {
  const Dataset d = synth_dataset(SynthKind::Blobs, 2, 3, 300, 7);
  std::mt19937_64 rng(7);
  const NetworkSpec base = random_network({2, 8, 3}, Activation::Sigmoid, FinalActivation::Softmax, rng);
  const NetworkSpec gen = train_sgd(base, d, params(0.5, 60, 7)).net;
  const TargetPartition target{{{0, 1}, {2}}};
  const TrainResult spec = specialize(gen, TargetPartition::fine(3), target, d, params(0.5, 60, 7));
  REQUIRE(spec.net.heads.size() == 1);
  CHECK(spec.net.layers == gen.layers);
  CHECK(spec.net.output_dim() == 2);
  const Dataset train = relabel(d.subset(Split::Train), target);
  CHECK(accuracy(spec.net, train.features, train.labels) >= 0.9);
}

TEST_CASE("membership head starts on the union of base blocks") {
  const AffineMap h = membership_head(TargetPartition::fine(3), TargetPartition{{{0}, {1, 2}}}, 4.0);
  CHECK(h.rows() == 2);
  CHECK(h.cols() == 3);
  const Point p = output_simplex(h.apply(Point{0.0, 0.5, 0.5}));
  CHECK(p[1] > p[0]);
  CHECK_CODE(membership_head(TargetPartition::fine(3), TargetPartition{{{0}, {3}}}), ErrorCode::BlockMismatch);
  CHECK_CODE(membership_head(TargetPartition{{{0, 1}, {2}}}, TargetPartition{{{0}, {1}}}), ErrorCode::BlockMismatch);
  CHECK_CODE(membership_head(TargetPartition::fine(3), TargetPartition{{{0, 1, 2}}}), ErrorCode::BlockMismatch);
}

TEST_CASE("partitions") {
  const TargetPartition p{{{0, 1}, {3}}};
  CHECK(p.flattening() == std::vector<int>{0, 1, 3});
  CHECK(p.block_of(1) == 0);
  CHECK(p.block_of(3) == 1);
  CHECK(p.block_of(2) == -1);
  CHECK_FALSE(p.is_fine());
  CHECK(TargetPartition::fine(3).is_fine());
  CHECK(p.str() == "{0,1}{3}");
  CHECK_CODE((TargetPartition{{{1, 0}}}.check()), ErrorCode::BlockMismatch);
  CHECK_CODE((TargetPartition{{{0}, {0}}}.check()), ErrorCode::BlockMismatch);
  CHECK_CODE((TargetPartition{{{}}}.check()), ErrorCode::BlockMismatch);
  CHECK_CODE((TargetPartition{{}}.check()), ErrorCode::BlockMismatch);
}

TEST_CASE("relabel keeps rows inside the flattening") {
  const Dataset d = synth_dataset(SynthKind::Blobs, 2, 3, 30, 2);
  const Dataset r = relabel(d, TargetPartition{{{2}, {0}}});
  CHECK(r.size() == 20);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK((r.labels[i] == 0 || r.labels[i] == 1));
}

TEST_CASE("synthetic data") {
  for (auto kind : {SynthKind::Blobs, SynthKind::GridDiagonal, SynthKind::Rings}) {
    const Dataset a = synth_dataset(kind, 2, 3, 150, 4), b = synth_dataset(kind, 2, 3, 150, 4);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK(a.size() == 150);
    CHECK(a.class_count() == 3);
    CHECK(a.subset(Split::Train).size() == 90);
    CHECK(a.subset(Split::Val).size() == 30);
    CHECK(a.subset(Split::Test).size() == 30);
  }
  const Dataset g = synth_dataset(SynthKind::GridDiagonal, 3, 4, 80, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double mean = (g.features[i][0] + g.features[i][1] + g.features[i][2]) / 3;
    CHECK(static_cast<int>(std::floor(4 * mean)) == g.labels[i]);
  }
  CHECK(synth_kind_from_string("rings") == SynthKind::Rings);
  CHECK_CODE(synth_kind_from_string("moons"), ErrorCode::InvalidArgument);
  CHECK_CODE(synth_dataset(SynthKind::Rings, 1, 2, 10, 0), ErrorCode::InvalidArgument);
  CHECK_CODE(synth_dataset(SynthKind::Blobs, 2, 5, 3, 0), ErrorCode::InvalidArgument);
}

TEST_CASE("bad training setups") {
  const Dataset d = synth_dataset(SynthKind::Blobs, 2, 3, 30, 2);
  std::mt19937_64 rng(1);
  const NetworkSpec net = random_network({2, 3, 3}, Activation::Sigmoid, FinalActivation::Softmax, rng);
  CHECK_CODE(train_sgd(net, d, params(-1.0, 5, 0)), ErrorCode::InvalidArgument);
  Hyperparams zero_batch = params(0.1, 5, 0);
  zero_batch.batch_size = 0;
  CHECK_CODE(train_sgd(net, d, zero_batch), ErrorCode::InvalidArgument);
  NetworkSpec im = net;
  im.final_activation = FinalActivation::IndexMax;
  CHECK_CODE(train_sgd(im, d, params(0.1, 5, 0)), ErrorCode::UnsupportedActivation);
  const NetworkSpec narrow = random_network({2, 3, 2}, Activation::Sigmoid, FinalActivation::Softmax, rng);
  CHECK_CODE(train_sgd(narrow, d, params(0.1, 5, 0)), ErrorCode::InvalidArgument);
  Hyperparams wild = params(10.0, 5, 0);
  wild.noise_std = 1e308;
  CHECK_CODE(train_sgd(net, d, wild), ErrorCode::DivergenceDetected);
  CHECK_CODE(specialize(net, TargetPartition::fine(2), TargetPartition{{{0}, {1}}}, d, params(0.1, 5, 0)),
             ErrorCode::BlockMismatch);
  CHECK_CODE(split_from_string("dev"), ErrorCode::InvalidArgument);
}
