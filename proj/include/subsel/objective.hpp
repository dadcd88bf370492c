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

// Set functions phi(S') over the elements of a PointSet.
//
// Every objective evaluates subsets of a fixed PointSet and charges each
// evaluation to its EvalCounter. Objectives that are differentiable in the
// element embeddings additionally expose gradients, which is what the
// first-order selection scores need.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subsel/eval_counter.hpp"
#include "subsel/point_set.hpp"
#include "subsel/set_model.hpp"

namespace subsel {

// Value plus gradient with respect to the embedding rows of the evaluated
// subset (row i belongs to subset.rows()[i]).
struct EmbeddingGradient {
  double value = 0;
  Matrix gradient;
  // Point features of the subset rows; set only for feature gradients.
  Matrix features;
};

class SetObjective {
 public:
  virtual ~SetObjective() = default;

  virtual std::string kind() const = 0;

  // phi(S'). Throws EmptySetError for an empty subset.
  double evaluate(const PointSet& ps, const Subset& keep, Charge charge = Charge::kForward) const;
  double evaluate(const PointSet& ps, std::span<const ElementId> keep) const;

  // phi(keep \ {e}) - phi(keep). `base` may carry a cached phi(keep); the
  // result is bitwise identical either way. Costs one evaluation, plus one
  // when base is absent. Throws IdError when e is not in keep and
  // EmptySetError when |keep| = 1.
  double marginal_gain(const PointSet& ps, const Subset& keep, ElementId e,
                       std::optional<double> base = std::nullopt) const;

  // Gradient w.r.t. the embeddings T(e) of the kept elements: one forward
  // and one backward pass.
  virtual bool has_input_gradient() const { return false; }
  virtual EmbeddingGradient input_gradient(const PointSet& ps, const Subset& keep) const;

  // Gradient w.r.t. the point features of the kept elements.
  virtual bool has_feature_gradient() const { return false; }
  virtual EmbeddingGradient feature_gradient(const PointSet& ps, const Subset& keep) const;

  virtual EvalCounter& counter() const { return *counter_; }

 protected:
  virtual double value(const PointSet& ps, const Subset& keep, Charge charge) const = 0;
  void charge(Charge c) const {
    c == Charge::kAudit ? counter_->add_audit() : counter_->add_forward();
  }

 private:
  std::shared_ptr<EvalCounter> counter_ = std::make_shared<EvalCounter>();
};

// phi(S') = cross-entropy(y, f(S')) with y the sample's true label.
class NeuralObjective final : public SetObjective {
 public:
  explicit NeuralObjective(std::shared_ptr<const SetClassifier> model);
  std::string kind() const override { return "neural"; }

  bool has_input_gradient() const override { return true; }
  EmbeddingGradient input_gradient(const PointSet& ps, const Subset& keep) const override;
  bool has_feature_gradient() const override { return true; }
  EmbeddingGradient feature_gradient(const PointSet& ps, const Subset& keep) const override;

  EvalCounter& counter() const override { return model_->counter(); }
  const SetClassifier& model() const { return *model_; }

 protected:
  double value(const PointSet& ps, const Subset& keep, Charge charge) const override;

 private:
  std::shared_ptr<const SetClassifier> model_;
};

// phi(S') = sum_e w_e.
class ModularObjective final : public SetObjective {
 public:
  explicit ModularObjective(std::map<ElementId, double> weights);
  std::string kind() const override { return "modular"; }
  const std::map<ElementId, double>& weights() const { return weights_; }

 protected:
  double value(const PointSet& ps, const Subset& keep, Charge charge) const override;

 private:
  std::map<ElementId, double> weights_;
};

// phi(S') = total weight of universe items covered by some kept element.
class CoverageObjective final : public SetObjective {
 public:
  CoverageObjective(std::vector<double> universe_weights,
                    std::map<ElementId, std::vector<std::size_t>> covers);
  std::string kind() const override { return "coverage"; }
  const std::vector<double>& universe_weights() const { return universe_weights_; }
  const std::map<ElementId, std::vector<std::size_t>>& covers() const { return covers_; }

 protected:
  double value(const PointSet& ps, const Subset& keep, Charge charge) const override;

 private:
  std::vector<double> universe_weights_;
  std::map<ElementId, std::vector<std::size_t>> covers_;
};

// phi(S') = sum over clients c of max_{e in S'} similarity[e][c].
// Similarities must be nonnegative.
class FacilityLocationObjective final : public SetObjective {
 public:
  explicit FacilityLocationObjective(std::map<ElementId, std::vector<double>> similarity);
  std::string kind() const override { return "facility-location"; }
  const std::map<ElementId, std::vector<double>>& similarity() const { return similarity_; }

 protected:
  double value(const PointSet& ps, const Subset& keep, Charge charge) const override;

 private:
  std::map<ElementId, std::vector<double>> similarity_;
  std::size_t clients_ = 0;
};

// phi(S') = w . sum_{e in S'} T(e) + offset. Linear in the embeddings, so a
// first-order expansion is exact.
class LinearEmbeddingObjective final : public SetObjective {
 public:
  LinearEmbeddingObjective(std::vector<double> weight, double offset = 0);
  std::string kind() const override { return "linear-embedding"; }
  bool has_input_gradient() const override { return true; }
  EmbeddingGradient input_gradient(const PointSet& ps, const Subset& keep) const override;

 protected:
  double value(const PointSet& ps, const Subset& keep, Charge charge) const override;

 private:
  std::vector<double> weight_;
  double offset_;
};

// Exhaustive optimum of max phi(S') subject to |S'| >= n - k, |S'| >= 1.
// Refuses n > kBruteForceLimit.
inline constexpr std::size_t kBruteForceLimit = 20;

struct BruteForceResult {
  std::vector<ElementId> keep;
  double value = 0;
};

// Ties go to the first subset in enumeration order: larger subsets first,
// then lexicographically smallest row sets.
BruteForceResult brute_force_opt(const SetObjective& obj, const PointSet& ps, std::size_t k);

// Samples chains A subset B and e outside B; checks gain(e|A) >= gain(e|B)
// (additions) and phi(B) >= phi(A). Throws UnsupportedError for the neural
// objective. Uses the audit channel so it does not disturb pass counts.
bool verify_submodular(const SetObjective& obj, const PointSet& ps, std::size_t trials,
                       std::uint64_t seed = 0, double tolerance = 1e-12);

// Analytic instance files (JSON):
//
//   {"kind": "modular",  "weights": {"<id>": w, ...}}
//   {"kind": "coverage", "universe_weights": [w0, w1, ...],
//                        "covers": {"<id>": [item, ...], ...}}
//   {"kind": "facility-location", "similarity": {"<id>": [s_c0, s_c1, ...], ...}}
//   {"kind": "linear-embedding", "weight": [...], "offset": c}
//
// Element ids are the JSON object keys. The returned PointSet carries those
// ids with one zero coordinate per element (linear-embedding instances carry
// "coords": [[...], ...] instead).
struct AnalyticInstance {
  std::shared_ptr<SetObjective> objective;
  PointSet points;
};

AnalyticInstance load_instance(const std::filesystem::path& path);
AnalyticInstance parse_instance(std::string_view json_text);
std::string instance_json(const SetObjective& obj);

}  // namespace subsel
