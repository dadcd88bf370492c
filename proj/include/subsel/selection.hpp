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

// Iterative subset selection: starting from S' = S, remove
// argmax_{e in S'} s(e, S') for k steps. The score s is pluggable:
//
//   exact            marginal gain phi(S' \ e) - phi(S'), one evaluation per
//                    candidate plus one for phi(S')
//   sfo-*            first-order estimate -grad_e^T (T(e) - T'(e)) of the
//                    marginal gain, where T'(e) is an uninformative embedding
//                    that the max pool ignores; one forward and one backward
//                    pass scores every element
//   saliency         sfo with the coordinate median, weighted by the squared
//                    distance to it
//   random           uniform scores
//   hybrid           top-m elements by an inner score, exact gain on those
//
// Ties in every argmax go to the lowest element id.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subsel/eval_counter.hpp"
#include "subsel/objective.hpp"
#include "subsel/point_set.hpp"

namespace subsel {

enum class StrategyKind { kExact, kSfoMedian, kSfoFeatureMin, kSfoCustom, kSaliency, kRandom, kHybrid };

std::string_view strategy_name(StrategyKind kind);
StrategyKind parse_strategy(std::string_view name);

struct ScoreStrategy {
  StrategyKind kind = StrategyKind::kExact;
  // Hybrid only.
  std::size_t m = 8;
  StrategyKind inner = StrategyKind::kSfoMedian;
  // Random scores (also a random hybrid inner score).
  std::uint64_t seed = 0;
  // Resolve the reference embedding once from the full set instead of from
  // the current S' at every iteration.
  bool freeze_reference = false;
  // Reference T'(e) for kSfoCustom, one entry per embedding dimension.
  std::vector<double> custom_reference;

  // Throws ParameterError for invalid combinations (hybrid with an exact or
  // hybrid inner score, m = 0, ...).
  void validate() const;
  // e.g. "exact", "sfo-median", "hybrid[sfo-median:m=8]", "saliency+frozen".
  // Never contains a comma.
  std::string label() const;
};

// Parses a strategy label back: "exact", "sfo-median", "hybrid[random:m=4]",
// also "hybrid:random:4"; a "+frozen" suffix sets freeze_reference. Not
// validated: sfo-custom still needs its reference.
ScoreStrategy parse_strategy_spec(std::string_view spec);

enum class ReferenceMode { kCoordinateMedian, kFeatureMin, kCustom };

// T'(e): the replacement embedding that simulates removing e.
struct UninformativeEmbedding {
  ReferenceMode mode = ReferenceMode::kCoordinateMedian;
  std::vector<double> custom;

  // `rows` are the current embeddings (coordinates for the median, point
  // features for the minimum).
  std::vector<double> resolve(const Matrix& rows) const;
};

// Per-column lower median: the element at index (n - 1) / 2 of the sorted
// column.
std::vector<double> lower_median(const Matrix& rows);
std::vector<double> column_min(const Matrix& rows);

// Scores for every kept element, aligned with keep.rows().
struct ScoreResult {
  std::vector<double> scores;
  // phi(keep) from the forward pass that produced the gradient.
  std::optional<double> value;
  // The reference embedding used.
  std::vector<double> reference;
};

double score_exact(const SetObjective& obj, const PointSet& ps, const Subset& keep, ElementId e,
                   std::optional<double> base = std::nullopt);

// `frozen` overrides the resolved reference. Coordinate modes need an input
// gradient, feature-min needs a feature gradient.
ScoreResult score_sfo(const SetObjective& obj, const PointSet& ps, const Subset& keep,
                      const UninformativeEmbedding& embedding,
                      const std::optional<std::vector<double>>& frozen = std::nullopt);

// s_i = -w_i * grad_i^T (x_i - median) with w_i = ||x_i - median||^2, or 1
// when `squared_norm` is false.
ScoreResult score_saliency(const SetObjective& obj, const PointSet& ps, const Subset& keep,
                           bool squared_norm = true,
                           const std::optional<std::vector<double>>& frozen = std::nullopt);

// i.i.d. uniform [0, 1) scores, a pure function of (seed, iteration, |keep|).
std::vector<double> score_random(const Subset& keep, std::uint64_t seed, std::size_t iteration);

struct SelectionStep {
  std::size_t iteration = 0;  // 1-based
  ElementId removed = 0;
  double score = 0;
  // phi(S') after the removal.
  double objective = 0;
  std::uint64_t forwards_cum = 0;
  std::uint64_t backwards_cum = 0;
  double ms_cum = 0;
  // Passes spent in this iteration alone.
  EvalCounter::Snapshot cost;
};

struct SelectionTrace {
  std::string strategy;
  std::vector<SelectionStep> steps;
  EvalCounter::Snapshot counters;  // deltas over the whole run
  double wall_ms = 0;               // scoring time; objective-column audits excluded
  std::vector<ElementId> final_keep;

  std::vector<ElementId> removed() const;
};

struct SelectOptions {
  // Fill SelectionStep::objective. Values not produced by the strategy
  // itself are computed on the audit channel.
  bool record_objective = true;
};

// Runs k removal steps. Throws ParameterError unless 1 <= k <= n - 1.
SelectionTrace select(const SetObjective& obj, const PointSet& ps, const ScoreStrategy& strategy,
                      std::size_t k, const SelectOptions& options = {});

// Hybrid m-candidate greedy with the given inner score.
SelectionTrace select_hybrid(const SetObjective& obj, const PointSet& ps, StrategyKind inner,
                             std::size_t m, std::size_t k, std::uint64_t seed = 0,
                             const SelectOptions& options = {});

// Replace-versus-remove check of the uninformative-embedding property for
// one element: `premise` holds when point_mlp(reference) lies strictly below
// the pooled maximum of the other kept elements in every feature.
struct SubstitutionCheck {
  bool premise = false;
  double max_abs_logit_diff = 0;
  Matrix replaced_logits;
  Matrix removed_logits;
};

SubstitutionCheck check_substitution(const SetClassifier& model, const PointSet& ps, const Subset& keep,
                                     ElementId e, std::span<const double> reference);

}  // namespace subsel
