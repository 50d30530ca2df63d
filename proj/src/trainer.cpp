#include "logifold/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "logifold/error.hpp"

namespace logifold {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  fail(ErrorCode::InvalidArgument, "unknown split '" + std::string(s) + "'");
}

std::size_t Dataset::class_count() const {
  int top = -1;
  for (int y : labels) top = std::max(top, y);
  return static_cast<std::size_t>(top + 1);
}

Dataset Dataset::subset(Split s) const {
  Dataset out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (splits[i] != s) continue;
    out.features.push_back(features[i]);
    out.labels.push_back(labels[i]);
    out.splits.push_back(s);
  }
  return out;
}

void Dataset::check() const {
  if (labels.size() != features.size() || splits.size() != features.size()) {
    fail(ErrorCode::InvalidArgument, "dataset columns have different lengths");
  }
  for (const Point& x : features) {
    if (x.size() != dim()) fail(ErrorCode::InvalidArgument, "dataset rows have different dimensions");
  }
  for (int y : labels) {
    if (y < 0) fail(ErrorCode::InvalidArgument, "negative class label");
  }
}

// ---- target partitions ----

TargetPartition TargetPartition::fine(std::size_t classes) {
  TargetPartition p;
  for (std::size_t c = 0; c < classes; ++c) p.blocks.push_back({static_cast<int>(c)});
  return p;
}

std::vector<int> TargetPartition::flattening() const {
  std::vector<int> out;
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  return out;
}

bool TargetPartition::is_fine() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const auto& b) { return b.size() == 1; });
}

int TargetPartition::block_of(int c) const {
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    if (std::binary_search(blocks[j].begin(), blocks[j].end(), c)) return static_cast<int>(j);
  }
  return -1;
}

void TargetPartition::check() const {
  if (blocks.empty()) fail(ErrorCode::BlockMismatch, "partition has no blocks");
  std::set<int> seen;
  for (const auto& b : blocks) {
    if (b.empty()) fail(ErrorCode::BlockMismatch, "partition has an empty block");
    if (!std::is_sorted(b.begin(), b.end())) fail(ErrorCode::BlockMismatch, "block " + str() + " is not sorted");
    for (int c : b) {
      if (c < 0) fail(ErrorCode::BlockMismatch, "negative class in " + str());
      if (!seen.insert(c).second) fail(ErrorCode::BlockMismatch, "class " + std::to_string(c) + " lies in two blocks of " + str());
    }
  }
}

std::string TargetPartition::str() const {
  std::string s;
  for (const auto& b : blocks) {
    s += "{";
    for (std::size_t i = 0; i < b.size(); ++i) s += (i ? "," : "") + std::to_string(b[i]);
    s += "}";
  }
  return s;
}

void Hyperparams::check() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail(ErrorCode::InvalidArgument, "learning rate must be >= 0");
  if (batch_size == 0) fail(ErrorCode::InvalidArgument, "batch size must be >= 1");
  if (epochs == 0) fail(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (!(noise_std >= 0.0)) fail(ErrorCode::InvalidArgument, "noise std must be >= 0");
}

// ---- loss and backpropagation ----

namespace {

// Every affine stage of the net in order: layers, then heads.
std::vector<const AffineMap*> stages(const NetworkSpec& net) {
  std::vector<const AffineMap*> out;
  for (const auto& l : net.layers) out.push_back(&l);
  for (const auto& h : net.heads) out.push_back(&h);
  return out;
}

struct Trace {
  std::vector<Point> in;  // input of each stage
  std::vector<Point> z;   // pre-activation of each stage
  Point p;
};

Trace forward(const NetworkSpec& net, std::span<const double> x) {
  const auto st = stages(net);
  const std::size_t last_layer = net.layers.size() - 1;
  Trace t;
  Point h(x.begin(), x.end());
  for (std::size_t s = 0; s < st.size(); ++s) {
    t.in.push_back(h);
    Point z = st[s]->apply(h);
    if (s < last_layer) {
      h.resize(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) h[i] = net.hidden == Activation::Sigmoid ? sigmoid(z[i]) : relu(z[i]);
    } else {
      h = output_simplex(z);
    }
    t.z.push_back(std::move(z));
  }
  t.p = h;
  return t;
}

void require_trainable(const NetworkSpec& net) {
  net.check();
  if (net.final_activation != FinalActivation::Softmax) {
    fail(ErrorCode::UnsupportedActivation, "training needs a softmax output");
  }
  if (net.hidden_count() > 0 && net.hidden == Activation::Step) {
    fail(ErrorCode::UnsupportedActivation, "step layers have no useful gradient");
  }
}

Point one_hot(std::size_t dim, int y) {
  if (y < 0 || static_cast<std::size_t>(y) >= dim) {
    fail(ErrorCode::InvalidArgument, "label " + std::to_string(y) + " outside the " + std::to_string(dim) + " outputs");
  }
  Point e(dim, 0.0);
  e[static_cast<std::size_t>(y)] = 1.0;
  return e;
}

// Back through p = output_simplex(z).
Point simplex_backward(const Point& z, const Point& p, const Point& g) {
  if (z.size() == 1) {
    const double s = p[1];
    return {s * (1.0 - s) * (g[1] - g[0])};
  }
  double gp = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) gp += g[j] * p[j];
  Point dz(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) dz[j] = p[j] * (g[j] - gp);
  return dz;
}

void accumulate(const NetworkSpec& net, std::span<const double> x, int y, std::vector<AffineMap>& grad) {
  const auto st = stages(net);
  const std::size_t last_layer = net.layers.size() - 1;
  const Trace t = forward(net, x);
  const Point e = one_hot(t.p.size(), y);
  Point g(t.p.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = 2.0 * (t.p[j] - e[j]);
  for (std::size_t s = st.size(); s-- > 0;) {
    Point dz;
    if (s >= last_layer) {
      const Point p = s + 1 < st.size() ? t.in[s + 1] : t.p;
      dz = simplex_backward(t.z[s], p, g);
    } else {
      const Point& h = t.in[s + 1];
      dz.resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = net.hidden == Activation::Sigmoid ? h[i] * (1.0 - h[i]) : (t.z[s][i] > 0.0 ? 1.0 : 0.0);
        dz[i] = g[i] * d;
      }
    }
    const AffineMap& a = *st[s];
    AffineMap& ga = grad[s];
    Point back(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      ga.offset(r) += dz[r];
      for (std::size_t c = 0; c < a.cols(); ++c) {
        ga.at(r, c) += dz[r] * t.in[s][c];
        back[c] += a.at(r, c) * dz[r];
      }
    }
    g = std::move(back);
  }
}

std::vector<AffineMap> zero_gradient(const NetworkSpec& net) {
  std::vector<AffineMap> out;
  for (const AffineMap* a : stages(net)) out.emplace_back(a->rows(), a->cols());
  return out;
}

}  // namespace

double squared_loss(const NetworkSpec& net, const std::vector<Point>& xs, const std::vector<int>& ys) {
  if (xs.size() != ys.size()) fail(ErrorCode::InvalidArgument, "features and labels differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Point p = forward_probabilities(net, xs[i]);
    const Point e = one_hot(p.size(), ys[i]);
    for (std::size_t j = 0; j < p.size(); ++j) total += (p[j] - e[j]) * (p[j] - e[j]);
  }
  return total;
}

std::vector<AffineMap> loss_gradient(const NetworkSpec& net, const std::vector<Point>& xs, const std::vector<int>& ys) {
  require_trainable(net);
  if (xs.size() != ys.size()) fail(ErrorCode::InvalidArgument, "features and labels differ in length");
  std::vector<AffineMap> grad = zero_gradient(net);
  for (std::size_t i = 0; i < xs.size(); ++i) accumulate(net, xs[i], ys[i], grad);
  return grad;
}

std::vector<double> flatten_parameters(const NetworkSpec& net) {
  std::vector<double> out;
  for (const AffineMap* a : stages(net)) {
    out.insert(out.end(), a->matrix().begin(), a->matrix().end());
    out.insert(out.end(), a->offsets().begin(), a->offsets().end());
  }
  return out;
}

void assign_parameters(NetworkSpec& net, const std::vector<double>& theta) {
  std::size_t k = 0;
  auto fill = [&](AffineMap& a) {
    for (std::size_t r = 0; r < a.rows(); ++r) {
      for (std::size_t c = 0; c < a.cols(); ++c) a.at(r, c) = theta.at(k++);
    }
    for (std::size_t r = 0; r < a.rows(); ++r) a.offset(r) = theta.at(k++);
  };
  for (auto& l : net.layers) fill(l);
  for (auto& h : net.heads) fill(h);
  if (k != theta.size()) fail(ErrorCode::DimensionMismatch, "parameter vector has the wrong length");
}

TrainResult train_sgd(const NetworkSpec& net, const std::vector<Point>& xs, const std::vector<int>& ys,
                      const Hyperparams& h, bool heads_only) {
  require_trainable(net);
  h.check();
  if (xs.size() != ys.size()) fail(ErrorCode::InvalidArgument, "features and labels differ in length");
  if (xs.empty()) fail(ErrorCode::InvalidArgument, "no training data");
  if (heads_only && net.heads.empty()) fail(ErrorCode::InvalidArgument, "no head to train");

  TrainResult result{net, {}};
  NetworkSpec& w = result.net;
  const std::size_t stage_count = w.layers.size() + w.heads.size();
  const std::size_t first_trained = heads_only ? stage_count - 1 : 0;
  auto stage = [&](std::size_t s) -> AffineMap& {
    return s < w.layers.size() ? w.layers[s] : w.heads[s - w.layers.size()];
  };

  std::mt19937_64 rng(h.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);

  auto record = [&]() {
    const double c = squared_loss(w, xs, ys);
    if (!std::isfinite(c)) fail(ErrorCode::DivergenceDetected, "loss became " + std::to_string(c));
    result.loss.push_back(c);
  };
  record();
  for (std::size_t epoch = 0; epoch < h.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += h.batch_size) {
      const std::size_t end = std::min(order.size(), start + h.batch_size);
      std::vector<AffineMap> grad = zero_gradient(w);
      for (std::size_t i = start; i < end; ++i) accumulate(w, xs[order[i]], ys[order[i]], grad);
      const double scale = h.learning_rate / static_cast<double>(end - start);
      for (std::size_t s = first_trained; s < stage_count; ++s) {
        AffineMap& a = stage(s);
        for (std::size_t r = 0; r < a.rows(); ++r) {
          for (std::size_t c = 0; c < a.cols(); ++c) {
            a.at(r, c) -= scale * grad[s].at(r, c);
            if (h.noise_std > 0.0) a.at(r, c) -= h.learning_rate * h.noise_std * noise(rng);
          }
          a.offset(r) -= scale * grad[s].offset(r);
          if (h.noise_std > 0.0) a.offset(r) -= h.learning_rate * h.noise_std * noise(rng);
        }
      }
    }
    record();
  }
  return result;
}

TrainResult train_sgd(const NetworkSpec& net, const Dataset& data, const Hyperparams& h) {
  data.check();
  const Dataset train = data.subset(Split::Train);
  return train_sgd(net, train.features, train.labels, h);
}

// ---- specialization ----

AffineMap membership_head(const TargetPartition& base, const TargetPartition& target, double gain) {
  base.check();
  target.check();
  if (target.blocks.size() < 2) fail(ErrorCode::BlockMismatch, "a specialist needs at least two blocks");
  AffineMap head(target.blocks.size(), base.blocks.size() == 1 ? 2 : base.blocks.size());
  for (std::size_t t = 0; t < target.blocks.size(); ++t) {
    for (int c : target.blocks[t]) {
      if (base.block_of(c) < 0) {
        fail(ErrorCode::BlockMismatch, "class " + std::to_string(c) + " of " + target.str() + " is not a class of " + base.str());
      }
    }
  }
  for (std::size_t b = 0; b < base.blocks.size(); ++b) {
    std::set<int> owners;
    for (int c : base.blocks[b]) owners.insert(target.block_of(c));
    if (owners.size() > 1) {
      fail(ErrorCode::BlockMismatch, "block " + std::to_string(b) + " of " + base.str() + " is split by " + target.str());
    }
    const int t = *owners.begin();
    if (t >= 0) head.at(static_cast<std::size_t>(t), b) = gain;
  }
  return head;
}

Dataset relabel(const Dataset& data, const TargetPartition& partition) {
  Dataset out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int b = partition.block_of(data.labels[i]);
    if (b < 0) continue;
    out.features.push_back(data.features[i]);
    out.labels.push_back(b);
    out.splits.push_back(data.splits[i]);
  }
  return out;
}

TrainResult specialize(const NetworkSpec& net, const TargetPartition& base, const TargetPartition& target,
                       const Dataset& data, const Hyperparams& h) {
  require_trainable(net);
  const std::size_t width = forward_probabilities(net, Point(net.input_dim, 0.0)).size();
  if (base.blocks.size() != width && !(base.blocks.size() == 1 && width == 2)) {
    fail(ErrorCode::BlockMismatch, "base partition " + base.str() + " has " + std::to_string(base.blocks.size()) +
                                       " blocks, the net outputs " + std::to_string(width));
  }
  NetworkSpec grown = net;
  grown.heads.push_back(membership_head(base, target));
  const Dataset train = relabel(data.subset(Split::Train), target);
  if (train.size() == 0) fail(ErrorCode::InvalidArgument, "no training instance lies in " + target.str());
  return train_sgd(grown, train.features, train.labels, h, true);
}

// ---- synthetic data ----

SynthKind synth_kind_from_string(std::string_view s) {
  if (s == "blobs") return SynthKind::Blobs;
  if (s == "grid_diagonal") return SynthKind::GridDiagonal;
  if (s == "rings") return SynthKind::Rings;
  fail(ErrorCode::InvalidArgument, "unknown dataset kind '" + std::string(s) + "'");
}

std::string_view to_string(SynthKind k) {
  switch (k) {
    case SynthKind::Blobs: return "blobs";
    case SynthKind::GridDiagonal: return "grid_diagonal";
    case SynthKind::Rings: return "rings";
  }
  return "blobs";
}

Dataset synth_dataset(SynthKind kind, std::size_t dim, std::size_t classes, std::size_t size, std::uint64_t seed,
                      const SynthOptions& options) {
  if (dim == 0 || classes == 0) fail(ErrorCode::InvalidArgument, "dataset needs a dimension and a class");
  if (size < classes) fail(ErrorCode::InvalidArgument, "fewer points than classes");
  if (kind == SynthKind::Rings && dim < 2) fail(ErrorCode::InvalidArgument, "rings need two dimensions");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double pi = std::acos(-1.0);
  const double k = static_cast<double>(classes);

  std::vector<Point> means(classes, Point(dim, 0.0));
  if (kind == SynthKind::Blobs && classes > 1) {
    const double gap = options.separation * options.sigma;
    for (std::size_t c = 0; c < classes; ++c) {
      if (dim == 1) {
        means[c][0] = gap * static_cast<double>(c);
      } else {
        const double radius = gap / (2.0 * std::sin(pi / k));
        means[c][0] = radius * std::cos(2.0 * pi * static_cast<double>(c) / k);
        means[c][1] = radius * std::sin(2.0 * pi * static_cast<double>(c) / k);
      }
    }
  }
  auto diagonal_label = [&](const Point& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(dim);
    return std::min<int>(static_cast<int>(classes) - 1, static_cast<int>(std::floor(mean * k)));
  };

  Dataset d;
  for (std::size_t i = 0; i < size; ++i) {
    const int c = static_cast<int>(i % classes);
    Point x(dim);
    switch (kind) {
      case SynthKind::Blobs:
        for (std::size_t j = 0; j < dim; ++j) x[j] = means[c][j] + options.sigma * normal(rng);
        break;
      case SynthKind::GridDiagonal: {
        std::size_t tries = 0;
        do {
          if (++tries > 1'000'000) fail(ErrorCode::InvalidArgument, "class " + std::to_string(c) + " is too rare to sample");
          for (double& v : x) v = uniform(rng);
        } while (diagonal_label(x) != c);
        break;
      }
      case SynthKind::Rings: {
        double norm = 0.0;
        for (double& v : x) {
          v = normal(rng);
          norm += v * v;
        }
        norm = std::sqrt(norm);
        const double r = static_cast<double>(c) + 0.1 + 0.8 * uniform(rng);
        for (double& v : x) v = norm > 0.0 ? v / norm * r : r;
        break;
      }
    }
    d.features.push_back(std::move(x));
    d.labels.push_back(c);
    d.splits.push_back(Split::Train);
  }
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = c; i < size; i += classes) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t train = idx.size() * 6 / 10;
    const std::size_t val = idx.size() * 2 / 10;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      d.splits[idx[j]] = j < train ? Split::Train : (j < train + val ? Split::Val : Split::Test);
    }
  }
  return d;
}

double accuracy(const NetworkSpec& net, const std::vector<Point>& xs, const std::vector<int>& ys) {
  if (xs.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (static_cast<int>(argmax(forward_probabilities(net, xs[i]))) == ys[i]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(xs.size());
}

}  // namespace logifold
