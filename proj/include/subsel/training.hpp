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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "subsel/point_set.hpp"
#include "subsel/set_model.hpp"

namespace subsel {

struct TrainConfig {
  std::size_t epochs = 60;
  std::size_t batch = 32;
  double lr = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  // Uniform per-coordinate jitter amplitude applied to training inputs; 0 disables.
  double jitter = 0.0;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double lr = 0;
  double train_loss = 0;
  double train_accuracy = 0;
  double test_loss = 0;
  double test_accuracy = 0;  // NaN-free: 0 when there is no test split
};

struct Evaluation {
  double loss = 0;
  double accuracy = 0;
};

// Mean loss and accuracy; not charged to the model's counter.
Evaluation evaluate_dataset(const SetClassifier& model, std::span<const PointSet> samples);

// SGD with momentum and cosine learning-rate decay over epochs. Minibatch
// gradients are summed in sample order, so the result is a pure function of
// (model, data, config). Throws DataError for an empty training split,
// inconsistent dimensions or out-of-range labels.
std::vector<EpochMetrics> train(SetClassifier& model, std::span<const PointSet> train_set,
                                std::span<const PointSet> test_set, const TrainConfig& config,
                                const std::function<void(const EpochMetrics&)>& on_epoch = {});

}  // namespace subsel
