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

#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>
#include <set>

#include "oracles.hpp"
#include "subsel/dataset.hpp"
#include "subsel/errors.hpp"
#include "subsel/objective.hpp"
#include "subsel/selection.hpp"
#include "subsel/training.hpp"

using namespace subsel;

namespace {

PointSet blank(std::size_t n) { return PointSet(Matrix(n, 1), 0); }

ScoreStrategy strategy(StrategyKind kind) {
  ScoreStrategy s;
  s.kind = kind;
  return s;
}

ScoreStrategy hybrid(StrategyKind inner, std::size_t m, std::uint64_t seed = 0) {
  ScoreStrategy s;
  s.kind = StrategyKind::kHybrid;
  s.inner = inner;
  s.m = m;
  s.seed = seed;
  return s;
}

std::shared_ptr<CoverageObjective> random_coverage(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::bernoulli_distribution pick(0.35);
  const std::size_t universe = 8;
  std::vector<double> weights(universe);
  for (double& v : weights) v = w(rng);
  std::map<ElementId, std::vector<std::size_t>> covers;
  for (ElementId e = 0; e < n; ++e) {
    covers[e];  // an element may cover nothing
    for (std::size_t u = 0; u < universe; ++u) {
      if (pick(rng)) covers[e].push_back(u);
    }
  }
  return std::make_shared<CoverageObjective>(weights, covers);
}

std::shared_ptr<SetClassifier> small_trained_model() {
  static std::shared_ptr<SetClassifier> model = [] {
    DatasetConfig cfg;
    cfg.classes = {ShapeFamily::kSphere, ShapeFamily::kCube, ShapeFamily::kCone};
    cfg.train_per_class = 20;
    cfg.test_per_class = 4;
    cfg.points = 32;
    cfg.seed = 7;
    const auto ds = make_dataset(cfg);
    Architecture arch;
    arch.point_widths = {16, 32};
    arch.head_widths = {16};
    arch.num_classes = 3;
    auto m = std::make_shared<SetClassifier>(SetClassifier::initialize(arch, 3));
    TrainConfig tc;
    tc.epochs = 12;
    tc.batch = 8;
    tc.lr = 0.02;
    train(*m, ds.train, ds.test, tc);
    return m;
  }();
  return model;
}

std::vector<PointSet> small_test_clouds() {
  DatasetConfig cfg;
  cfg.classes = {ShapeFamily::kSphere, ShapeFamily::kCube, ShapeFamily::kCone};
  cfg.train_per_class = 0;
  cfg.test_per_class = 4;
  cfg.points = 32;
  cfg.seed = 8;
  return make_dataset(cfg).test;
}

}  // namespace

TEST_CASE("strategy names, labels and specs") {
  CHECK(parse_strategy("sfo-feature-min") == StrategyKind::kSfoFeatureMin);
  CHECK_THROWS_AS(parse_strategy("lazy"), ParameterError);
  CHECK(hybrid(StrategyKind::kSfoMedian, 8).label() == "hybrid[sfo-median:m=8]");
  const auto s = parse_strategy_spec("hybrid[random:m=4]");
  CHECK(s.kind == StrategyKind::kHybrid);
  CHECK(s.inner == StrategyKind::kRandom);
  CHECK(s.m == 4);
  CHECK(parse_strategy_spec("hybrid:saliency:3").label() == "hybrid[saliency:m=3]");
  CHECK(parse_strategy_spec("sfo-median+frozen").freeze_reference);
  CHECK(parse_strategy_spec("sfo-median+frozen").label() == "sfo-median+frozen");
  CHECK_THROWS_AS(parse_strategy_spec("hybrid[random:m=0]"), ParameterError);
  CHECK_THROWS_AS(hybrid(StrategyKind::kExact, 3).validate(), ParameterError);
  CHECK_THROWS_AS(hybrid(StrategyKind::kHybrid, 3).validate(), ParameterError);
  CHECK_THROWS_AS(hybrid(StrategyKind::kSfoMedian, 0).validate(), ParameterError);
  CHECK_THROWS_AS(strategy(StrategyKind::kSfoCustom).validate(), ParameterError);
}

TEST_CASE("lower median and column minimum") {
  const Matrix rows = Matrix::from_rows({{4, 1}, {2, 3}, {3, 2}, {1, 4}});
  CHECK(lower_median(rows) == std::vector<double>{2, 2});
  CHECK(lower_median(Matrix::from_rows({{5, 0}, {1, 9}, {3, 4}})) == std::vector<double>{3, 4});
  CHECK(column_min(rows) == std::vector<double>{1, 1});
}

TEST_CASE("modular exact greedy removes the smallest weights") {
  const ModularObjective obj({{0, 0.5}, {1, -3}, {2, 2}, {3, -1}, {4, 0}, {5, 1}});
  const auto ps = blank(6);
  const auto trace = select(obj, ps, strategy(StrategyKind::kExact), 3);
  CHECK(trace.removed() == std::vector<ElementId>{1, 3, 4});
  CHECK(trace.final_keep == std::vector<ElementId>{0, 2, 5});
  CHECK(trace.steps.back().objective == doctest::Approx(3.5));
}

TEST_CASE("k bounds and singleton boundary") {
  const ModularObjective obj({{0, 1}, {1, 2}, {2, 3}});
  const auto ps = blank(3);
  CHECK_THROWS_AS(select(obj, ps, strategy(StrategyKind::kExact), 0), ParameterError);
  CHECK_THROWS_AS(select(obj, ps, strategy(StrategyKind::kExact), 3), ParameterError);
  for (auto kind : {StrategyKind::kExact, StrategyKind::kRandom}) {
    const auto t = select(obj, ps, strategy(kind), 2);
    CHECK(t.final_keep.size() == 1);
    CHECK(t.steps.size() == 2);
  }
}

TEST_CASE("exact greedy matches the one-step lookahead oracle on analytic instances") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 4 + static_cast<std::size_t>(rng() % 7);
    const std::size_t k = 1 + static_cast<std::size_t>(rng() % std::min<std::size_t>(4, n - 1));
    const auto obj = random_coverage(n, rng);
    const auto ps = blank(n);
    const auto trace = select(*obj, ps, strategy(StrategyKind::kExact), k);
    CHECK(trace.removed() == oracle::greedy_oracle(*obj, ps, k));
  }
}

TEST_CASE("exact greedy cost and trace invariants") {
  std::mt19937_64 rng(5);
  const std::size_t n = 12;
  const auto obj = random_coverage(n, rng);
  const auto ps = blank(n);
  const auto trace = select(*obj, ps, strategy(StrategyKind::kExact), 5);
  std::set<ElementId> seen;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    CHECK(s.iteration == i + 1);
    CHECK(s.cost == EvalCounter::Snapshot{n - i + 1, 0, 0});
    CHECK(seen.insert(s.removed).second);
  }
  CHECK(trace.counters.forwards == (12 + 11 + 10 + 9 + 8) + 5);
}

TEST_CASE("score_exact delegates to marginal_gain") {
  const auto ps = blank(3);
  const CoverageObjective obj({1, 1, 1}, {{0, {0, 1}}, {1, {1, 2}}, {2, {2}}});
  CHECK(score_exact(obj, ps, Subset(ps), 2) == 0);
  for (ElementId e = 0; e < 3; ++e) CHECK(score_exact(obj, ps, Subset(ps), e) == obj.marginal_gain(ps, Subset(ps), e));
  const auto before = obj.counter().snapshot();
  const double base = obj.evaluate(ps, Subset(ps));
  for (ElementId e = 0; e < 3; ++e) (void)score_exact(obj, ps, Subset(ps), e, base);
  CHECK((obj.counter().snapshot() - before).forwards == 3 + 1);
}

TEST_CASE("first order score is exact for a linear objective") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix w = oracle::random_matrix(1, 3, rng);
    const LinearEmbeddingObjective obj({w(0, 0), w(0, 1), w(0, 2)}, 0.3);
    const PointSet ps(oracle::random_matrix(9, 3, rng), 0);
    ScoreStrategy custom = strategy(StrategyKind::kSfoCustom);
    custom.custom_reference = {0, 0, 0};
    const auto r = score_sfo(obj, ps, Subset(ps), {ReferenceMode::kCustom, {0, 0, 0}});
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double exact = obj.marginal_gain(ps, Subset(ps), ps.id_at(i));
      CHECK(std::abs(r.scores[i] - exact) <= 1e-12);
    }
    const auto trace = select(obj, ps, custom, 4);
    CHECK(trace.removed() == select(obj, ps, strategy(StrategyKind::kExact), 4).removed());
  }
}

TEST_CASE("identical embeddings give zero first-order scores") {
  auto model = std::make_shared<SetClassifier>(oracle::tiny_model(3));
  const NeuralObjective obj(model);
  const PointSet ps(Matrix(7, 3, 0.4), 0);
  const auto r = score_sfo(obj, ps, Subset(ps), {ReferenceMode::kCoordinateMedian, {}});
  for (double s : r.scores) CHECK(s == 0);
  const auto sal = score_saliency(obj, ps, Subset(ps));
  for (double s : sal.scores) CHECK(s == 0);
}

TEST_CASE("saliency relations") {
  auto model = std::make_shared<SetClassifier>(oracle::tiny_model(4));
  const NeuralObjective obj(model);
  std::mt19937_64 rng(4);
  const PointSet ps(oracle::random_matrix(9, 3, rng), 1);
  const auto sal = score_saliency(obj, ps, Subset(ps));
  const auto median = lower_median(ps.coords());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    bool at_median = true;
    for (std::size_t k = 0; k < 3; ++k) at_median = at_median && ps.coords()(i, k) == median[k];
    if (at_median) CHECK(sal.scores[i] == 0);
  }
  // Unit weights reduce saliency to the median first-order score.
  const auto plain = score_saliency(obj, ps, Subset(ps), false);
  const auto sfo = score_sfo(obj, ps, Subset(ps), {ReferenceMode::kCoordinateMedian, {}});
  CHECK(plain.scores == sfo.scores);

  // A point sitting exactly on the median (odd n, one coordinate row shared).
  Matrix c = ps.coords();
  const auto med = lower_median(c);
  for (std::size_t k = 0; k < 3; ++k) c(4, k) = med[k];
  const PointSet on(c, 1);
  const auto med2 = lower_median(on.coords());
  bool is_median = true;
  for (std::size_t k = 0; k < 3; ++k) is_median = is_median && on.coords()(4, k) == med2[k];
  if (is_median) CHECK(score_saliency(obj, on, Subset(on)).scores[4] == 0);
}

TEST_CASE("saliency argmax is scale invariant on a linear toy model") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const LinearEmbeddingObjective obj({0.7, -1.2, 0.4});
    const Matrix x = oracle::random_matrix(11, 3, rng);
    Matrix scaled = x;
    for (double& v : scaled.values()) v *= 3.5;
    const PointSet a(x, 0), b(scaled, 0);
    const auto sa = score_saliency(obj, a, Subset(a)).scores;
    const auto sb = score_saliency(obj, b, Subset(b)).scores;
    CHECK(std::max_element(sa.begin(), sa.end()) - sa.begin() == std::max_element(sb.begin(), sb.end()) - sb.begin());
  }
}

TEST_CASE("surrogate strategies cost one forward and one backward per iteration") {
  auto model = std::make_shared<SetClassifier>(oracle::tiny_model(6));
  const NeuralObjective obj(model);
  std::mt19937_64 rng(6);
  const PointSet ps(oracle::random_matrix(20, 3, rng), 0);
  for (auto kind : {StrategyKind::kSfoMedian, StrategyKind::kSfoFeatureMin, StrategyKind::kSaliency}) {
    const auto t = select(obj, ps, strategy(kind), 10);
    for (const auto& s : t.steps) CHECK(s.cost == EvalCounter::Snapshot{1, 1, 0});
    CHECK(t.counters.forwards == 10);
    CHECK(t.counters.backwards == 10);
    // The objective column is filled for every step.
    for (const auto& s : t.steps) CHECK(std::isfinite(s.objective));
  }
  const auto r = select(obj, ps, strategy(StrategyKind::kRandom), 10);
  for (const auto& s : r.steps) CHECK(s.cost == EvalCounter::Snapshot{0, 0, 0});
}

TEST_CASE("objective column equals direct evaluation") {
  auto model = std::make_shared<SetClassifier>(oracle::tiny_model(7));
  const NeuralObjective obj(model);
  std::mt19937_64 rng(7);
  const PointSet ps(oracle::random_matrix(15, 3, rng), 2);
  for (auto kind : {StrategyKind::kExact, StrategyKind::kSfoMedian, StrategyKind::kRandom}) {
    const auto t = select(obj, ps, strategy(kind), 6);
    std::vector<ElementId> keep = ps.ids();
    for (const auto& s : t.steps) {
      keep.erase(std::find(keep.begin(), keep.end(), s.removed));
      CHECK(s.objective == oracle::phi(obj, ps, keep));
    }
  }
}

TEST_CASE("hybrid boundaries and cost") {
  auto model = std::make_shared<SetClassifier>(oracle::tiny_model(8));
  const NeuralObjective obj(model);
  std::mt19937_64 rng(8);
  const PointSet ps(oracle::random_matrix(16, 3, rng), 1);
  const auto exact = select(obj, ps, strategy(StrategyKind::kExact), 6);
  const auto full = select(obj, ps, hybrid(StrategyKind::kSfoMedian, 16), 6);
  CHECK(full.removed() == exact.removed());
  for (std::size_t i = 0; i < 6; ++i) CHECK(full.steps[i].score == exact.steps[i].score);
  CHECK(select(obj, ps, hybrid(StrategyKind::kSfoMedian, 1000), 6).removed() == exact.removed());

  for (auto inner : {StrategyKind::kSfoMedian, StrategyKind::kSaliency, StrategyKind::kSfoFeatureMin}) {
    CHECK(select(obj, ps, hybrid(inner, 1), 6).removed() == select(obj, ps, strategy(inner), 6).removed());
  }

  const auto h = select(obj, ps, hybrid(StrategyKind::kSfoMedian, 4), 6);
  for (const auto& s : h.steps) CHECK(s.cost == EvalCounter::Snapshot{5, 1, 0});
  CHECK(h.counters.forwards == 6 * 5);
  CHECK(h.counters.backwards == 6);

  // A random inner score needs no gradient: m + 1 forwards, no backward.
  const auto r = select(obj, ps, hybrid(StrategyKind::kRandom, 3, 2), 6);
  for (const auto& s : r.steps) CHECK(s.cost == EvalCounter::Snapshot{4, 0, 0});
  ScoreStrategy rnd = strategy(StrategyKind::kRandom);
  rnd.seed = 2;
  CHECK(select(obj, ps, hybrid(StrategyKind::kRandom, 1, 2), 6).removed() == select(obj, ps, rnd, 6).removed());
}

TEST_CASE("hybrid clamps m to the current set size") {
  const ModularObjective obj({{0, 3}, {1, 1}, {2, 2}, {3, 0.5}});
  const auto ps = blank(4);
  const auto t = select(obj, ps, hybrid(StrategyKind::kRandom, 10, 1), 3);
  CHECK(t.removed() == std::vector<ElementId>{3, 1, 2});
  CHECK(t.steps[0].cost.forwards == 5);
  CHECK(t.steps[2].cost.forwards == 3);
}

TEST_CASE("gradient strategies need a differentiable objective") {
  const ModularObjective obj({{0, 1}, {1, 2}, {2, 3}});
  CHECK_THROWS_AS(select(obj, blank(3), strategy(StrategyKind::kSfoMedian), 1), UnsupportedError);
  CHECK_THROWS_AS(select(obj, blank(3), hybrid(StrategyKind::kSaliency, 2), 1), UnsupportedError);
}

TEST_CASE("random scores") {
  const auto ps = blank(5);
  const Subset keep(ps);
  CHECK(score_random(keep, 3, 1) == score_random(keep, 3, 1));
  CHECK(score_random(keep, 3, 1) != score_random(keep, 3, 2));
  CHECK(score_random(keep, 3, 1) != score_random(keep, 4, 1));

  const ModularObjective obj({{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}});
  ScoreStrategy s = strategy(StrategyKind::kRandom);
  s.seed = 11;
  CHECK(select(obj, ps, s, 3).removed() == select(obj, ps, s, 3).removed());
}

TEST_CASE("random first removal is uniform within 3 sigma") {
  const std::size_t n = 8, trials = 10000;
  const auto ps = blank(n);
  std::vector<std::size_t> first(n, 0);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto scores = score_random(Subset(ps), t, 1);
    ++first[static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin())];
  }
  for (std::size_t c : first) CHECK(oracle::within_binomial(c, trials, 1.0 / n));

  const auto two = blank(2);
  const ModularObjective obj({{0, 1}, {1, 1}});
  std::size_t zero = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    ScoreStrategy s = strategy(StrategyKind::kRandom);
    s.seed = seed;
    zero += select(obj, two, s, 1).removed()[0] == 0 ? 1 : 0;
  }
  CHECK(oracle::within_binomial(zero, 2000, 0.5));
}

TEST_CASE("ties go to the lowest element id") {
  const ModularObjective obj({{5, 1}, {2, 1}, {9, 1}});
  const PointSet ps({5, 2, 9}, Matrix(3, 1), 0);
  CHECK(select(obj, ps, strategy(StrategyKind::kExact), 1).removed() == std::vector<ElementId>{2});
}

TEST_CASE("frozen reference") {
  auto model = std::make_shared<SetClassifier>(oracle::tiny_model(10));
  const NeuralObjective obj(model);
  std::mt19937_64 rng(10);
  const PointSet ps(oracle::random_matrix(15, 3, rng), 0);
  ScoreStrategy s = strategy(StrategyKind::kSfoMedian);
  s.freeze_reference = true;
  const auto frozen = select(obj, ps, s, 5);
  // Replaying with the full-set median passed explicitly gives the same picks.
  Subset keep(ps);
  const auto median = lower_median(ps.coords());
  for (const auto& step : frozen.steps) {
    const auto r = score_sfo(obj, ps, keep, {ReferenceMode::kCoordinateMedian, {}}, median);
    const auto best = std::max_element(r.scores.begin(), r.scores.end()) - r.scores.begin();
    CHECK(ps.id_at(keep.rows()[static_cast<std::size_t>(best)]) == step.removed);
    keep.remove_row(ps.row_of(step.removed));
  }
}

TEST_CASE("substitution check on a premise-satisfying reference") {
  auto model = std::make_shared<SetClassifier>(oracle::tiny_model(11));
  std::mt19937_64 rng(11);
  const PointSet ps(oracle::random_matrix(10, 3, rng), 0);
  const Subset keep(ps);
  std::size_t premised = 0;
  for (ElementId e = 0; e < 10; ++e) {
    // Try references until one is strictly dominated.
    for (int attempt = 0; attempt < 50; ++attempt) {
      const Matrix ref = oracle::random_matrix(1, 3, rng, -2, 2);
      const std::vector<double> r(ref.values().begin(), ref.values().end());
      const auto chk = check_substitution(*model, ps, keep, e, r);
      if (chk.premise) {
        ++premised;
        CHECK(chk.max_abs_logit_diff <= 1e-10);
        break;
      }
    }
  }
  CHECK(premised > 0);
  CHECK_THROWS_AS(check_substitution(*model, ps, keep, 99, std::vector<double>{0, 0, 0}), IdError);
}

TEST_CASE("first order ranks correlate with exact gains on a trained model") {
  const auto model = small_trained_model();
  const NeuralObjective obj(model);
  double total = 0;
  const auto clouds = small_test_clouds();
  for (const auto& ps : clouds) {
    const auto r = score_sfo(obj, ps, Subset(ps), {ReferenceMode::kCoordinateMedian, {}});
    std::vector<double> exact;
    for (std::size_t i = 0; i < ps.size(); ++i) exact.push_back(obj.marginal_gain(ps, Subset(ps), ps.id_at(i)));
    total += oracle::spearman(r.scores, exact);
  }
  const double mean = total / static_cast<double>(clouds.size());
  MESSAGE("mean Spearman correlation: " << mean);
  CHECK(mean >= 0.5);
}
