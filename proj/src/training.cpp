// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "subsel/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "subsel/errors.hpp"
#include "subsel/tape.hpp"

namespace subsel {

namespace {

void validate(const SetClassifier& model, std::span<const PointSet> samples, const char* split) {
  for (const auto& ps : samples) {
    if (ps.dim() != model.input_dim()) {
      throw DataError(std::string(split) + " sample '" + ps.name() + "' has dimension " +
                      std::to_string(ps.dim()) + ", model expects " + std::to_string(model.input_dim()));
    }
    if (ps.label() >= model.num_classes()) {
      throw DataError(std::string(split) + " sample '" + ps.name() + "' has label " +
                      std::to_string(ps.label()) + " outside [0, " +
                      std::to_string(model.num_classes()) + ")");
    }
  }
}

struct LayerGrads {
  std::vector<Matrix> weight;
  std::vector<Matrix> bias;
};

LayerGrads zeros_like(const std::vector<DenseLayer>& layers) {
  LayerGrads g;
  for (const auto& l : layers) {
    g.weight.emplace_back(l.weight.rows(), l.weight.cols());
    g.bias.emplace_back(l.bias.rows(), l.bias.cols());
  }
  return g;
}

void add_into(Matrix& dst, const Matrix& src) {
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

// Forward + backward for one sample; adds parameter gradients into `point`
// and `head`. Returns (loss, correct).
std::pair<double, bool> accumulate_sample(const SetClassifier& model, Matrix coords,
                                          std::size_t label, LayerGrads& point, LayerGrads& head) {
  Tape tape;
  struct Ids {
    NodeId w, b;
  };
  std::vector<Ids> point_ids, head_ids;
  auto chain = [&tape](const std::vector<DenseLayer>& layers, std::vector<Ids>& ids, NodeId node) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      Ids id{tape.leaf(layers[i].weight), tape.leaf(layers[i].bias)};
      ids.push_back(id);
      node = tape.affine(node, id.w, id.b);
      if (i + 1 < layers.size()) node = tape.relu(node);
    }
    return node;
  };
  const NodeId input = tape.leaf(std::move(coords), false);
  const NodeId features = chain(model.point_mlp(), point_ids, input);
  const NodeId pooled = tape.feature_max(features);
  const NodeId logits = chain(model.head(), head_ids, pooled);
  const NodeId loss = tape.softmax_xent(logits, label);
  auto grads = tape.backward(loss);
  for (std::size_t i = 0; i < point_ids.size(); ++i) {
    add_into(point.weight[i], grads.take(point_ids[i].w));
    add_into(point.bias[i], grads.take(point_ids[i].b));
  }
  for (std::size_t i = 0; i < head_ids.size(); ++i) {
    add_into(head.weight[i], grads.take(head_ids[i].w));
    add_into(head.bias[i], grads.take(head_ids[i].b));
  }
  const bool correct = argmax(tape.value(logits).row(0)) == label;
  return {tape.value(loss)(0, 0), correct};
}

void sgd_step(std::vector<DenseLayer>& layers, LayerGrads& grads, LayerGrads& velocity, double scale,
              double lr, double momentum) {
  auto step = [&](Matrix& param, const Matrix& g, Matrix& v) {
    auto p = param.values();
    auto gv = g.values();
    auto vv = v.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      vv[i] = momentum * vv[i] + scale * gv[i];
      p[i] -= lr * vv[i];
    }
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    step(layers[i].weight, grads.weight[i], velocity.weight[i]);
    step(layers[i].bias, grads.bias[i], velocity.bias[i]);
  }
}

}  // namespace

Evaluation evaluate_dataset(const SetClassifier& model, std::span<const PointSet> samples) {
  if (samples.empty()) return {};
  // Private counter: evaluations made while training never show up in
  // experiment accounting.
  SetClassifier local = model;
  local.set_counter(std::make_shared<EvalCounter>());
  double loss = 0;
  std::size_t correct = 0;
  for (const auto& ps : samples) {
    const auto rec = local.forward(ps.coords(), ps.label(), Charge::kAudit);
    loss += *rec.loss;
    if (argmax(rec.logits.row(0)) == ps.label()) ++correct;
  }
  const double n = static_cast<double>(samples.size());
  return {loss / n, static_cast<double>(correct) / n};
}

std::vector<EpochMetrics> train(SetClassifier& model, std::span<const PointSet> train_set,
                                std::span<const PointSet> test_set, const TrainConfig& config,
                                const std::function<void(const EpochMetrics&)>& on_epoch) {
  if (train_set.empty()) throw DataError("training set is empty");
  if (config.batch == 0 || config.epochs == 0) throw ParameterError("epochs and batch must be positive");
  if (!(config.lr > 0)) throw ParameterError("learning rate must be positive");
  validate(model, train_set, "train");
  validate(model, test_set, "test");

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> jitter(-config.jitter, config.jitter);
  LayerGrads point_v = zeros_like(model.point_mlp());
  LayerGrads head_v = zeros_like(model.head());
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<EpochMetrics> history;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = 0.5 * config.lr *
                      (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) /
                                      static_cast<double>(config.epochs)));
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t stop = std::min(order.size(), start + config.batch);
      LayerGrads point_g = zeros_like(model.point_mlp());
      LayerGrads head_g = zeros_like(model.head());
      for (std::size_t i = start; i < stop; ++i) {
        const PointSet& ps = train_set[order[i]];
        Matrix coords = ps.coords();
        if (config.jitter > 0) {
          for (double& v : coords.values()) v += jitter(rng);
        }
        auto [loss, ok] = accumulate_sample(model, std::move(coords), ps.label(), point_g, head_g);
        loss_sum += loss;
        correct += ok ? 1 : 0;
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      sgd_step(model.mutable_point_mlp(), point_g, point_v, scale, lr, config.momentum);
      sgd_step(model.mutable_head(), head_g, head_v, scale, lr, config.momentum);
    }
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.lr = lr;
    m.train_loss = loss_sum / static_cast<double>(train_set.size());
    m.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    const auto test = evaluate_dataset(model, test_set);
    m.test_loss = test.loss;
    m.test_accuracy = test.accuracy;
    for (double v : {m.train_loss, m.test_loss}) {
      if (!std::isfinite(v)) throw NumericError("training diverged at epoch " + std::to_string(m.epoch));
    }
    history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return history;
}

}  // namespace subsel
