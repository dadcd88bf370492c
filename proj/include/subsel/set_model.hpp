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

// Permutation-invariant set classifier of the form
//
//   logits = head(max_{e in S'} point_mlp(T(e)))
//
// with the max taken feature-wise over the rows. There is no cross-element
// mixing before the pool, so an element whose point features sit strictly
// below the pooled maximum of the others has no influence on the output.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subsel/eval_counter.hpp"
#include "subsel/point_set.hpp"
#include "subsel/tensor.hpp"

namespace subsel {

enum class Precision { kF64, kF32 };

std::string to_string(Precision p);
Precision parse_precision(std::string_view s);

struct DenseLayer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out
};

struct Architecture {
  std::size_t input_dim = 3;
  // Widths of the point MLP layers; the last entry is the feature width h.
  std::vector<std::size_t> point_widths{64, 64, 128};
  // Hidden widths of the head; a final affine to num_classes is appended.
  std::vector<std::size_t> head_widths{64};
  std::size_t num_classes = 5;
};

struct ForwardRecord {
  Matrix features;  // n x h, point MLP output per element
  Matrix pooled;    // 1 x h
  PoolWitness witness;
  Matrix logits;    // 1 x C
  std::optional<double> loss;
};

struct GradientRecord {
  ForwardRecord forward;
  Matrix gradient;  // same shape as the variable differentiated against
};

class SetClassifier {
 public:
  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static SetClassifier initialize(const Architecture& arch, std::uint64_t seed);

  // Throws DimensionError if consecutive layers do not chain.
  SetClassifier(std::vector<DenseLayer> point_mlp, std::vector<DenseLayer> head);

  std::size_t input_dim() const { return point_mlp_.front().weight.rows(); }
  std::size_t feature_dim() const { return point_mlp_.back().weight.cols(); }
  std::size_t num_classes() const { return head_.back().weight.cols(); }

  const std::vector<DenseLayer>& point_mlp() const { return point_mlp_; }
  const std::vector<DenseLayer>& head() const { return head_; }
  // Mutable access for optimizers. Resets the execution precision to f64.
  std::vector<DenseLayer>& mutable_point_mlp();
  std::vector<DenseLayer>& mutable_head();

  Precision precision() const { return precision_; }
  void set_precision(Precision p);

  EvalCounter& counter() const { return *counter_; }
  const std::shared_ptr<EvalCounter>& shared_counter() const { return counter_; }
  void set_counter(std::shared_ptr<EvalCounter> counter);

  // One forward pass. Charged to the counter as given.
  ForwardRecord forward(const Matrix& coords, std::optional<std::size_t> label = std::nullopt,
                        Charge charge = Charge::kForward) const;
  ForwardRecord forward(const PointSet& ps, Charge charge = Charge::kForward) const;
  // forward(coords, label).loss without the record; one forward pass.
  double loss(const Matrix& coords, std::size_t label, Charge charge = Charge::kForward) const;

  // d loss / d coords for all rows; one forward and one backward pass.
  GradientRecord input_gradient(const Matrix& coords, std::size_t label) const;
  // d loss / d point features (the point MLP output rows); one forward and
  // one backward pass.
  GradientRecord feature_gradient(const Matrix& coords, std::size_t label) const;

  // Argmax of the logits, lowest index on ties.
  std::size_t predict(const Matrix& coords, Charge charge = Charge::kForward) const;

  // Point MLP applied row-wise, not charged: it is not an evaluation of the
  // set function.
  Matrix point_features(const Matrix& coords) const;

  std::size_t parameter_count() const;

 private:
  struct FloatParams;

  void check_input(const Matrix& coords) const;

  std::vector<DenseLayer> point_mlp_;
  std::vector<DenseLayer> head_;
  Precision precision_ = Precision::kF64;
  std::shared_ptr<const FloatParams> float_params_;
  std::shared_ptr<EvalCounter> counter_ = std::make_shared<EvalCounter>();
};

// Checkpoint file, all integers little-endian:
//
//   char[4]  magic "SFM1"
//   u32      layer count L (affine layers, point MLP first, then head)
//   u32      point MLP layer count
//   L times: weight (u32 rows, u32 cols, f64[rows*cols] row-major)
//            bias   (u32 rows, u32 cols, f64[rows*cols])
//   u32      d, u32 h, u32 C
void save_checkpoint(const SetClassifier& model, const std::filesystem::path& path);
SetClassifier load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_bytes(const SetClassifier& model);
SetClassifier checkpoint_from_bytes(std::string_view bytes);

}  // namespace subsel
