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

#include "subsel/selection.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "subsel/errors.hpp"

namespace subsel {

namespace {

struct NamedKind {
  StrategyKind kind;
  std::string_view name;
};

constexpr NamedKind kKinds[] = {
    {StrategyKind::kExact, "exact"},         {StrategyKind::kSfoMedian, "sfo-median"},
    {StrategyKind::kSfoFeatureMin, "sfo-feature-min"}, {StrategyKind::kSfoCustom, "sfo-custom"},
    {StrategyKind::kSaliency, "saliency"},   {StrategyKind::kRandom, "random"},
    {StrategyKind::kHybrid, "hybrid"},
};

bool is_gradient_kind(StrategyKind k) {
  return k == StrategyKind::kSfoMedian || k == StrategyKind::kSfoFeatureMin ||
         k == StrategyKind::kSfoCustom || k == StrategyKind::kSaliency;
}

// Accumulates time only while running; objective-column audits are excluded.
class Stopwatch {
 public:
  void start() { begin_ = Clock::now(); }
  void stop() { total_ += std::chrono::duration<double, std::milli>(Clock::now() - begin_).count(); }
  double ms() const { return total_; }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point begin_;
  double total_ = 0;
};

// Index into keep.rows() of the highest score, lowest id among ties.
std::size_t best_index(const PointSet& ps, const Subset& keep, std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw NumericError("selection score is NaN");
    if (i == 0) continue;
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] && ps.id_at(keep.rows()[i]) < ps.id_at(keep.rows()[best]))) {
      best = i;
    }
  }
  return best;
}

std::vector<double> row_dot_scores(const Matrix& grad, const Matrix& rows, std::span<const double> reference,
                                   bool squared_norm) {
  std::vector<double> scores(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto x = rows.row(i);
    auto g = grad.row(i);
    double dot = 0, sq = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double diff = x[k] - reference[k];
      dot += g[k] * diff;
      sq += diff * diff;
    }
    scores[i] = squared_norm ? -sq * dot : -dot;
  }
  return scores;
}

}  // namespace

std::string_view strategy_name(StrategyKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  throw ParameterError("unknown strategy '" + std::string(name) + "'");
}

void ScoreStrategy::validate() const {
  if (kind == StrategyKind::kHybrid) {
    if (m == 0) throw ParameterError("hybrid strategy needs m >= 1");
    if (inner == StrategyKind::kExact || inner == StrategyKind::kHybrid) {
      throw ParameterError("hybrid inner score must be a surrogate, not " + std::string(strategy_name(inner)));
    }
  }
  const bool custom = kind == StrategyKind::kSfoCustom ||
                      (kind == StrategyKind::kHybrid && inner == StrategyKind::kSfoCustom);
  if (custom && custom_reference.empty()) throw ParameterError("sfo-custom needs a reference embedding");
}

std::string ScoreStrategy::label() const {
  std::string out(strategy_name(kind));
  if (kind == StrategyKind::kHybrid) out += "[" + std::string(strategy_name(inner)) + ":m=" + std::to_string(m) + "]";
  if (freeze_reference) out += "+frozen";
  return out;
}

ScoreStrategy parse_strategy_spec(std::string_view spec) {
  ScoreStrategy s;
  const std::string original(spec);
  constexpr std::string_view kFrozen = "+frozen";
  if (spec.size() > kFrozen.size() && spec.substr(spec.size() - kFrozen.size()) == kFrozen) {
    s.freeze_reference = true;
    spec.remove_suffix(kFrozen.size());
  }
  auto parse_m = [&](std::string_view text) {
    std::size_t m = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), m);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || m == 0) {
      throw ParameterError("bad candidate count in strategy '" + original + "'");
    }
    return m;
  };
  if (spec.starts_with("hybrid[") && spec.ends_with("]")) {
    const std::string_view body = spec.substr(7, spec.size() - 8);
    const auto colon = body.find(":m=");
    if (colon == std::string_view::npos) throw ParameterError("bad hybrid strategy '" + original + "'");
    s.kind = StrategyKind::kHybrid;
    s.inner = parse_strategy(body.substr(0, colon));
    s.m = parse_m(body.substr(colon + 3));
  } else if (spec.starts_with("hybrid:")) {
    const std::string_view body = spec.substr(7);
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) throw ParameterError("bad hybrid strategy '" + original + "'");
    s.kind = StrategyKind::kHybrid;
    s.inner = parse_strategy(body.substr(0, colon));
    s.m = parse_m(body.substr(colon + 1));
  } else {
    s.kind = parse_strategy(spec);
  }
  return s;
}

std::vector<double> lower_median(const Matrix& rows) {
  if (rows.rows() == 0) throw EmptySetError("median of an empty set");
  std::vector<double> out(rows.cols());
  std::vector<double> column(rows.rows());
  const std::size_t mid = (rows.rows() - 1) / 2;
  for (std::size_t k = 0; k < rows.cols(); ++k) {
    for (std::size_t i = 0; i < rows.rows(); ++i) column[i] = rows(i, k);
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid), column.end());
    out[k] = column[mid];
  }
  return out;
}

std::vector<double> column_min(const Matrix& rows) {
  if (rows.rows() == 0) throw EmptySetError("minimum of an empty set");
  std::vector<double> out(rows.row(0).begin(), rows.row(0).end());
  for (std::size_t i = 1; i < rows.rows(); ++i) {
    auto r = rows.row(i);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::min(out[k], r[k]);
  }
  return out;
}

std::vector<double> UninformativeEmbedding::resolve(const Matrix& rows) const {
  switch (mode) {
    case ReferenceMode::kCoordinateMedian:
      return lower_median(rows);
    case ReferenceMode::kFeatureMin:
      return column_min(rows);
    case ReferenceMode::kCustom:
      if (custom.size() != rows.cols()) {
        throw DimensionError("custom reference has " + std::to_string(custom.size()) +
                             " entries, embeddings have " + std::to_string(rows.cols()));
      }
      return custom;
  }
  throw ParameterError("unknown reference mode");
}

double score_exact(const SetObjective& obj, const PointSet& ps, const Subset& keep, ElementId e,
                   std::optional<double> base) {
  return obj.marginal_gain(ps, keep, e, base);
}

ScoreResult score_sfo(const SetObjective& obj, const PointSet& ps, const Subset& keep,
                      const UninformativeEmbedding& embedding, const std::optional<std::vector<double>>& frozen) {
  if (keep.size() < 2) throw EmptySetError("first-order scores need |keep| >= 2");
  ScoreResult out;
  if (embedding.mode == ReferenceMode::kFeatureMin) {
    auto g = obj.feature_gradient(ps, keep);
    out.reference = frozen ? *frozen : column_min(g.features);
    out.scores = row_dot_scores(g.gradient, g.features, out.reference, false);
    out.value = g.value;
  } else {
    auto g = obj.input_gradient(ps, keep);
    const Matrix coords = ps.gather_coords(keep.rows());
    out.reference = frozen ? *frozen : embedding.resolve(coords);
    if (out.reference.size() != coords.cols()) throw DimensionError("reference embedding has the wrong width");
    out.scores = row_dot_scores(g.gradient, coords, out.reference, false);
    out.value = g.value;
  }
  return out;
}

ScoreResult score_saliency(const SetObjective& obj, const PointSet& ps, const Subset& keep, bool squared_norm,
                           const std::optional<std::vector<double>>& frozen) {
  if (keep.size() < 2) throw EmptySetError("saliency scores need |keep| >= 2");
  auto g = obj.input_gradient(ps, keep);
  const Matrix coords = ps.gather_coords(keep.rows());
  ScoreResult out;
  out.reference = frozen ? *frozen : lower_median(coords);
  out.scores = row_dot_scores(g.gradient, coords, out.reference, squared_norm);
  out.value = g.value;
  return out;
}

std::vector<double> score_random(const Subset& keep, std::uint64_t seed, std::size_t iteration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(iteration >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> scores(keep.size());
  for (double& s : scores) s = unit(rng);
  return scores;
}

std::vector<ElementId> SelectionTrace::removed() const {
  std::vector<ElementId> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.removed);
  return out;
}

namespace {

// Scores from a surrogate (everything except exact and hybrid).
class SurrogateScorer {
 public:
  SurrogateScorer(const SetObjective& obj, const PointSet& ps, const ScoreStrategy& strategy, StrategyKind kind)
      : obj_(obj), ps_(ps), strategy_(strategy), kind_(kind) {}

  ScoreResult operator()(const Subset& keep, std::size_t iteration) {
    if (kind_ == StrategyKind::kRandom) {
      return {score_random(keep, strategy_.seed, iteration), std::nullopt, {}};
    }
    ScoreResult r;
    switch (kind_) {
      case StrategyKind::kSfoMedian:
        r = score_sfo(obj_, ps_, keep, {ReferenceMode::kCoordinateMedian, {}}, frozen_);
        break;
      case StrategyKind::kSfoFeatureMin:
        r = score_sfo(obj_, ps_, keep, {ReferenceMode::kFeatureMin, {}}, frozen_);
        break;
      case StrategyKind::kSfoCustom:
        r = score_sfo(obj_, ps_, keep, {ReferenceMode::kCustom, strategy_.custom_reference}, frozen_);
        break;
      case StrategyKind::kSaliency:
        r = score_saliency(obj_, ps_, keep, true, frozen_);
        break;
      default:
        throw ParameterError("not a surrogate score: " + std::string(strategy_name(kind_)));
    }
    if (strategy_.freeze_reference && !frozen_) frozen_ = r.reference;
    return r;
  }

 private:
  const SetObjective& obj_;
  const PointSet& ps_;
  const ScoreStrategy& strategy_;
  StrategyKind kind_;
  std::optional<std::vector<double>> frozen_;
};

}  // namespace

SelectionTrace select(const SetObjective& obj, const PointSet& ps, const ScoreStrategy& strategy, std::size_t k,
                      const SelectOptions& options) {
  strategy.validate();
  const std::size_t n = ps.size();
  if (k < 1 || k + 1 > n) {
    throw ParameterError("k = " + std::to_string(k) + " outside [1, n - 1] for n = " + std::to_string(n));
  }
  if (is_gradient_kind(strategy.kind) || (strategy.kind == StrategyKind::kHybrid && is_gradient_kind(strategy.inner))) {
    const StrategyKind sk = strategy.kind == StrategyKind::kHybrid ? strategy.inner : strategy.kind;
    const bool ok = sk == StrategyKind::kSfoFeatureMin ? obj.has_feature_gradient() : obj.has_input_gradient();
    if (!ok) throw UnsupportedError(obj.kind() + " objective cannot provide the gradient " + strategy.label() + " needs");
  }

  EvalCounter& counter = obj.counter();
  const auto start = counter.snapshot();
  Subset keep(ps);
  SelectionTrace trace;
  trace.strategy = strategy.label();
  trace.steps.reserve(k);
  Stopwatch clock;
  // Steps whose objective column is filled by the next scoring forward pass.
  std::optional<std::size_t> pending;

  const StrategyKind surrogate_kind = strategy.kind == StrategyKind::kHybrid ? strategy.inner : strategy.kind;
  SurrogateScorer surrogate(obj, ps, strategy, surrogate_kind);

  for (std::size_t it = 1; it <= k; ++it) {
    const auto before = counter.snapshot();
    clock.start();
    std::size_t pick = 0;
    double score = 0;
    std::optional<double> after;

    if (strategy.kind == StrategyKind::kExact) {
      const double base = obj.evaluate(ps, keep);
      std::vector<double> gains(keep.size()), values(keep.size());
      for (std::size_t i = 0; i < keep.size(); ++i) {
        values[i] = obj.evaluate(ps, keep.without_row(keep.rows()[i]));
        gains[i] = values[i] - base;
      }
      pick = best_index(ps, keep, gains);
      score = gains[pick];
      after = values[pick];
    } else if (strategy.kind == StrategyKind::kHybrid) {
      ScoreResult inner = surrogate(keep, it);
      if (pending && inner.value && options.record_objective) trace.steps[*pending].objective = *inner.value;
      pending.reset();
      const double base = inner.value ? *inner.value : obj.evaluate(ps, keep);
      std::vector<std::size_t> order(keep.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      const std::size_t m = std::min(strategy.m, keep.size());
      auto by_score = [&](std::size_t a, std::size_t b) {
        if (std::isnan(inner.scores[a]) || std::isnan(inner.scores[b])) throw NumericError("selection score is NaN");
        if (inner.scores[a] != inner.scores[b]) return inner.scores[a] > inner.scores[b];
        return ps.id_at(keep.rows()[a]) < ps.id_at(keep.rows()[b]);
      };
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(), by_score);
      order.resize(m);
      // Candidates in keep order so the exact argmax sees the same sequence
      // as the exact strategy.
      std::sort(order.begin(), order.end());
      std::vector<double> gains(keep.size(), -std::numeric_limits<double>::infinity());
      std::vector<double> values(keep.size(), 0.0);
      for (std::size_t i : order) {
        values[i] = obj.evaluate(ps, keep.without_row(keep.rows()[i]));
        gains[i] = values[i] - base;
      }
      pick = best_index(ps, keep, gains);
      score = gains[pick];
      after = values[pick];
    } else {
      ScoreResult r = surrogate(keep, it);
      if (pending && r.value && options.record_objective) trace.steps[*pending].objective = *r.value;
      pending.reset();
      pick = best_index(ps, keep, r.scores);
      score = r.scores[pick];
    }

    const std::size_t row = keep.rows()[pick];
    keep.remove_row(row);
    clock.stop();

    const auto now = counter.snapshot();
    SelectionStep step;
    step.iteration = it;
    step.removed = ps.id_at(row);
    step.score = score;
    step.objective = std::numeric_limits<double>::quiet_NaN();
    step.forwards_cum = now.forwards - start.forwards;
    step.backwards_cum = now.backwards - start.backwards;
    step.ms_cum = clock.ms();
    step.cost = now - before;
    step.cost.audits = 0;
    if (after) {
      step.objective = *after;
    } else if (options.record_objective) {
      if (surrogate_kind == StrategyKind::kRandom || it == k) {
        step.objective = obj.evaluate(ps, keep, Charge::kAudit);
      } else {
        pending = trace.steps.size();
      }
    }
    trace.steps.push_back(step);
  }

  trace.counters = counter.snapshot() - start;
  trace.wall_ms = clock.ms();
  trace.final_keep = keep.ids(ps);
  return trace;
}

SelectionTrace select_hybrid(const SetObjective& obj, const PointSet& ps, StrategyKind inner, std::size_t m,
                             std::size_t k, std::uint64_t seed, const SelectOptions& options) {
  ScoreStrategy s;
  s.kind = StrategyKind::kHybrid;
  s.inner = inner;
  s.m = m;
  s.seed = seed;
  return select(obj, ps, s, k, options);
}

SubstitutionCheck check_substitution(const SetClassifier& model, const PointSet& ps, const Subset& keep,
                                     ElementId e, std::span<const double> reference) {
  const std::size_t row = ps.row_of(e);
  if (!keep.contains_row(row)) throw IdError("element " + std::to_string(e) + " is not in the kept set");
  if (keep.size() < 2) throw EmptySetError("substitution check needs |keep| >= 2");
  if (reference.size() != ps.dim()) throw DimensionError("reference embedding has the wrong width");

  const Subset rest = keep.without_row(row);
  const Matrix rest_coords = ps.gather_coords(rest.rows());
  Matrix replaced = ps.gather_coords(keep.rows());
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(keep.rows().begin(), keep.rows().end(), row) - keep.rows().begin());
  std::copy(reference.begin(), reference.end(), replaced.row(pos).begin());

  SubstitutionCheck out;
  const Matrix rest_features = model.point_features(rest_coords);
  const auto pooled = feature_max(rest_features).pooled;
  const Matrix ref_features = model.point_features(Matrix::row_vector(reference));
  out.premise = true;
  for (std::size_t j = 0; j < pooled.cols(); ++j) {
    if (!(ref_features(0, j) < pooled(0, j))) {
      out.premise = false;
      break;
    }
  }
  out.replaced_logits = model.forward(replaced, std::nullopt, Charge::kAudit).logits;
  out.removed_logits = model.forward(rest_coords, std::nullopt, Charge::kAudit).logits;
  for (std::size_t j = 0; j < out.replaced_logits.cols(); ++j) {
    out.max_abs_logit_diff =
        std::max(out.max_abs_logit_diff, std::abs(out.replaced_logits(0, j) - out.removed_logits(0, j)));
  }
  return out;
}

}  // namespace subsel
