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

// Acceptance suite: one PASS/FAIL line per criterion, details indented
// above it. Exit status is 0 only when every criterion passes.
//
//   subsel_acceptance [--work DIR] [--only 1,2,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "subsel/dataset.hpp"
#include "subsel/experiment.hpp"
#include "subsel/objective.hpp"
#include "subsel/selection.hpp"
#include "subsel/training.hpp"

using namespace subsel;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string summary;
};

void detail(const std::string& line) { std::cout << "  " << line << std::endl; }

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

bool tied_max(const Matrix& f) {
  for (std::size_t j = 0; j < f.cols(); ++j) {
    double best = f(0, j);
    for (std::size_t i = 1; i < f.rows(); ++i) best = std::max(best, f(i, j));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < f.rows(); ++i) hits += f(i, j) == best ? 1 : 0;
    if (hits > 1) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// 1. gradients vs central differences

Verdict gradients() {
  const double tol = 1e-5;
  std::size_t checked = 0, skipped = 0;
  double worst_input = 0, worst_feature = 0;
  for (std::uint64_t seed = 0; checked < 120 && seed < 1000; ++seed) {
    std::mt19937_64 rng(seed * 7919 + 1);
    const std::size_t classes = 2 + seed % 4;
    const auto m = oracle::tiny_model(seed, 3, classes);
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 9);
    const Matrix x = oracle::random_matrix(n, 3, rng);
    const std::size_t y = static_cast<std::size_t>(rng() % classes);
    const auto gi = m.input_gradient(x, y);
    // Max pooling is not differentiable at ties; those draws are skipped.
    if (tied_max(gi.forward.features)) {
      ++skipped;
      continue;
    }
    auto loss_of_coords = [&](const Matrix& c) { return oracle::naive_xent(oracle::naive_logits(m, c), y); };
    worst_input = std::max(worst_input,
                           oracle::relative_error(gi.gradient, oracle::finite_difference(loss_of_coords, x)));

    const auto gf = m.feature_gradient(x, y);
    auto loss_of_features = [&](const Matrix& feats) {
      Matrix h = feature_max(feats).pooled;
      for (std::size_t l = 0; l < m.head().size(); ++l) {
        h = oracle::naive_affine(h, m.head()[l].weight, m.head()[l].bias);
        if (l + 1 < m.head().size()) {
          for (double& v : h.values()) v = std::max(v, 0.0);
        }
      }
      return oracle::naive_xent({h.values().begin(), h.values().end()}, y);
    };
    worst_feature = std::max(worst_feature, oracle::relative_error(gf.gradient, oracle::finite_difference(
                                                                                    loss_of_features,
                                                                                    gf.forward.features)));
    ++checked;
  }
  detail("models checked " + std::to_string(checked) + ", skipped at pooling ties " + std::to_string(skipped));
  detail("worst relative error: input " + fmt(worst_input) + ", feature " + fmt(worst_feature));
  const bool pass = checked >= 100 && worst_input <= tol && worst_feature <= tol;
  return {pass, std::to_string(checked) + " models, max rel err " + fmt(std::max(worst_input, worst_feature)) +
                    " (tol 1e-5)"};
}

// ---------------------------------------------------------------------------
// 2. replacing a dominated element equals removing it

Verdict substitution() {
  std::size_t pairs = 0, draws = 0;
  double worst = 0;
  std::mt19937_64 rng(2024);
  while (pairs < 1000 && draws < 20000) {
    ++draws;
    const auto m = oracle::tiny_model(rng() % 100000, 3, 2 + rng() % 4);
    const std::size_t n = 3 + static_cast<std::size_t>(rng() % 14);
    const PointSet ps(oracle::random_matrix(n, 3, rng), 0);
    // Random kept subset of size >= 2 containing e.
    std::vector<ElementId> ids;
    for (ElementId id = 0; id < n; ++id) {
      if (rng() % 4 != 0) ids.push_back(id);
    }
    if (ids.size() < 2) continue;
    const ElementId e = ids[rng() % ids.size()];
    const Subset keep(ps, ids);
    for (int attempt = 0; attempt < 40; ++attempt) {
      const Matrix r = oracle::random_matrix(1, 3, rng, -1.5, 1.5);
      const std::vector<double> ref(r.values().begin(), r.values().end());
      const auto chk = check_substitution(m, ps, keep, e, ref);
      if (!chk.premise) continue;
      worst = std::max(worst, chk.max_abs_logit_diff);
      ++pairs;
      break;
    }
  }
  detail("pairs with a strictly dominated reference: " + std::to_string(pairs) + " of " + std::to_string(draws) +
         " draws");
  detail("max |logit(replaced) - logit(removed)| = " + fmt(worst));
  return {pairs >= 1000 && worst <= 1e-10, std::to_string(pairs) + " pairs, max abs logit diff " + fmt(worst) +
                                               " (tol 1e-10)"};
}

// ---------------------------------------------------------------------------
// 3. first-order score on linear objectives

Verdict linear_first_order() {
  std::mt19937_64 rng(303);
  double worst = 0;
  std::size_t elements = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng() % 5);
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 30);
    const Matrix w = oracle::random_matrix(1, d, rng, -2, 2);
    const LinearEmbeddingObjective obj({w.values().begin(), w.values().end()}, static_cast<double>(rng() % 7));
    const PointSet ps(oracle::random_matrix(n, d, rng, -3, 3), 0);
    std::vector<ElementId> ids;
    for (ElementId id = 0; id < n; ++id) {
      if (id == 0 || rng() % 3 != 0) ids.push_back(id);
    }
    if (ids.size() < 2) ids.push_back(1);
    const Subset keep(ps, ids);
    // Zero is the embedding that contributes nothing to a linear sum.
    const auto r = score_sfo(obj, ps, keep, {ReferenceMode::kCustom, std::vector<double>(d, 0.0)});
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const double exact = obj.marginal_gain(ps, keep, ps.id_at(keep.rows()[i]));
      worst = std::max(worst, std::abs(r.scores[i] - exact));
      ++elements;
    }
  }
  detail(std::to_string(elements) + " elements over 100 instances, max |s_FO - gain| = " + fmt(worst));
  return {worst <= 1e-12, "max abs diff " + fmt(worst) + " (tol 1e-12)"};
}

// ---------------------------------------------------------------------------
// 4. exact greedy vs an independent per-step oracle; classical greedy bound

std::unique_ptr<SetObjective> random_instance(std::size_t n, std::mt19937_64& rng, int kind) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (kind == 0) {
    const std::size_t universe = 3 + static_cast<std::size_t>(rng() % 10);
    std::vector<double> weights(universe);
    for (double& v : weights) v = 0.1 + u(rng);
    std::map<ElementId, std::vector<std::size_t>> covers;
    for (ElementId e = 0; e < n; ++e) {
      covers[e];
      for (std::size_t j = 0; j < universe; ++j) {
        if (u(rng) < 0.3) covers[e].push_back(j);
      }
    }
    return std::make_unique<CoverageObjective>(weights, covers);
  }
  if (kind == 1) {
    std::map<ElementId, double> w;
    for (ElementId e = 0; e < n; ++e) w[e] = 4 * u(rng) - 2;
    return std::make_unique<ModularObjective>(w);
  }
  const std::size_t clients = 2 + static_cast<std::size_t>(rng() % 6);
  std::map<ElementId, std::vector<double>> sim;
  for (ElementId e = 0; e < n; ++e) {
    for (std::size_t c = 0; c < clients; ++c) sim[e].push_back(u(rng));
  }
  return std::make_unique<FacilityLocationObjective>(sim);
}

// Classical greedy: add up to k elements by largest gain, lowest id on ties.
double selection_greedy(const SetObjective& obj, const PointSet& ps, std::size_t k) {
  std::vector<ElementId> chosen;
  double value = 0;
  for (std::size_t step = 0; step < k; ++step) {
    double best = -INFINITY;
    ElementId pick = 0;
    for (ElementId e : ps.ids()) {
      if (std::find(chosen.begin(), chosen.end(), e) != chosen.end()) continue;
      auto trial = chosen;
      trial.push_back(e);
      const double v = oracle::phi(obj, ps, trial);
      if (v > best) {
        best = v;
        pick = e;
      }
    }
    chosen.push_back(pick);
    value = best;
  }
  return value;
}

// Exhaustive max over subsets of size 1..k.
double selection_opt(const SetObjective& obj, const PointSet& ps, std::size_t k) {
  const std::size_t n = ps.size();
  double best = -INFINITY;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > k) continue;
    std::vector<ElementId> ids;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) ids.push_back(ps.id_at(i));
    }
    best = std::max(best, oracle::phi(obj, ps, ids));
  }
  return best;
}

Verdict greedy_equivalence() {
  std::mt19937_64 rng(404);
  std::size_t matches = 0, above_opt = 0, modular_suboptimal = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 11);
    const std::size_t k = 1 + static_cast<std::size_t>(rng() % std::min<std::size_t>(4, n - 1));
    const int kind = inst % 3;
    const auto obj = random_instance(n, rng, kind);
    const PointSet ps(Matrix(n, 1), 0);
    ScoreStrategy exact;
    exact.kind = StrategyKind::kExact;
    const auto trace = select(*obj, ps, exact, k);
    if (trace.removed() == oracle::greedy_oracle(*obj, ps, k)) ++matches;
    // Removal form: compared with the exhaustive optimum directly.
    const auto opt = brute_force_opt(*obj, ps, k);
    const double got = trace.steps.back().objective;
    if (got > opt.value + 1e-12) ++above_opt;
    if (kind == 1) {
      // Exactly k removals: dropping the k smallest weights is optimal.
      std::vector<double> w;
      for (const auto& [id, v] : dynamic_cast<const ModularObjective&>(*obj).weights()) w.push_back(v);
      std::sort(w.begin(), w.end());
      double best = 0;
      for (std::size_t i = k; i < w.size(); ++i) best += w[i];
      if (std::abs(got - best) > 1e-12) ++modular_suboptimal;
    }
  }
  detail("removal sequences identical to the oracle: " + std::to_string(matches) + "/200");
  detail("removal greedy above brute-force optimum: " + std::to_string(above_opt) +
         ", modular instances off the k-smallest optimum: " + std::to_string(modular_suboptimal));

  double worst_ratio = INFINITY;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 11);
    const std::size_t k = 1 + static_cast<std::size_t>(rng() % std::min<std::size_t>(4, n));
    const auto obj = random_instance(n, rng, 0);
    const PointSet ps(Matrix(n, 1), 0);
    const double opt = selection_opt(*obj, ps, k);
    if (opt <= 0) continue;
    worst_ratio = std::min(worst_ratio, selection_greedy(*obj, ps, k) / opt);
  }
  const double bound = 1 - std::exp(-1.0);
  detail("selection-form coverage greedy: worst greedy/OPT = " + fmt(worst_ratio) + " (bound " + fmt(bound) + ")");
  const bool pass = matches == 200 && above_opt == 0 && modular_suboptimal == 0 && worst_ratio >= bound;
  return {pass, std::to_string(matches) + "/200 sequences match, worst coverage ratio " + fmt(worst_ratio)};
}

// ---------------------------------------------------------------------------
// 5. per-iteration pass counts over a k = 50 run

Verdict cost_contract() {
  DatasetConfig dc;
  dc.train_per_class = 0;
  dc.test_per_class = 1;
  dc.seed = 5;
  const auto ds = make_dataset(dc);
  const PointSet& ps = ds.test.front();
  auto model = std::make_shared<SetClassifier>(SetClassifier::initialize(Architecture{}, 5));
  const NeuralObjective obj(model);
  const std::size_t k = 50, n = ps.size();

  struct Case {
    std::string spec;
    std::function<EvalCounter::Snapshot(std::size_t keep)> expect;
  };
  const std::vector<Case> cases{
      {"exact", [](std::size_t keep) { return EvalCounter::Snapshot{keep + 1, 0, 0}; }},
      {"sfo-median", [](std::size_t) { return EvalCounter::Snapshot{1, 1, 0}; }},
      {"sfo-feature-min", [](std::size_t) { return EvalCounter::Snapshot{1, 1, 0}; }},
      {"saliency", [](std::size_t) { return EvalCounter::Snapshot{1, 1, 0}; }},
      {"hybrid:sfo-median:8", [](std::size_t) { return EvalCounter::Snapshot{9, 1, 0}; }},
      {"hybrid:saliency:2", [](std::size_t) { return EvalCounter::Snapshot{3, 1, 0}; }},
      {"hybrid:sfo-feature-min:32", [](std::size_t) { return EvalCounter::Snapshot{33, 1, 0}; }},
  };
  bool pass = true;
  for (const auto& c : cases) {
    const auto trace = select(obj, ps, parse_strategy_spec(c.spec), k);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      if (trace.steps[i].cost != c.expect(n - i)) ++bad;
    }
    if (bad != 0 || trace.steps.size() != k) pass = false;
    detail(c.spec + ": " + std::to_string(trace.counters.forwards) + " forwards, " +
           std::to_string(trace.counters.backwards) + " backwards, " + std::to_string(bad) +
           " iterations off contract");
  }
  return {pass, "n=" + std::to_string(n) + " k=50 over " + std::to_string(cases.size()) + " strategies"};
}

// ---------------------------------------------------------------------------
// 6-8. desk-scale experiment on the default dataset and model

struct Desk {
  Dataset data;
  SetClassifier model;
  double test_accuracy = 0;
  double train_seconds = 0;
  std::map<std::string, AttackResult> attacks;
  double attack_seconds = 0;
};

Desk& desk() {
  static std::optional<Desk> d;
  if (d) return *d;
  const auto t0 = std::chrono::steady_clock::now();
  Desk out{make_dataset(DatasetConfig{}), SetClassifier::initialize(Architecture{}, 0), 0, 0, {}, 0};
  const auto history = train(out.model, out.data.train, out.data.test, TrainConfig{});
  out.test_accuracy = history.back().test_accuracy;
  const auto t1 = std::chrono::steady_clock::now();
  out.train_seconds = std::chrono::duration<double>(t1 - t0).count();
  for (const char* spec :
       {"random", "sfo-median", "exact", "hybrid:sfo-median:2", "hybrid:sfo-median:8", "hybrid:sfo-median:32"}) {
    AttackConfig cfg;
    cfg.strategy = parse_strategy_spec(spec);
    cfg.k = 64;
    cfg.record_objective = false;
    out.attacks.emplace(spec, run_attack(out.model, out.data.test, cfg));
  }
  out.attack_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  d.emplace(std::move(out));
  return *d;
}

double acc(const std::string& spec) { return desk().attacks.at(spec).summary.final_accuracy(); }

Verdict attack_ordering() {
  auto& d = desk();
  detail("default model: test accuracy " + fmt(d.test_accuracy) + ", trained in " + fmt(d.train_seconds, 3) + " s");
  for (const auto& [spec, res] : d.attacks) {
    detail(res.summary.strategy + ": accuracy " + fmt(res.summary.clean_accuracy()) + " -> " +
           fmt(res.summary.final_accuracy()) + " at k=64");
  }
  const double e = acc("exact"), s = acc("sfo-median"), r = acc("random");
  const bool trained = d.test_accuracy >= 0.9;
  const bool order_es = e <= s, order_sr = s <= r;
  const bool gap_e = r - e >= 0.20, gap_s = r - s >= 0.10;
  detail(std::string("trained >= 0.90: ") + (trained ? "yes" : "no") + "; exact <= sfo-median: " +
         (order_es ? "yes" : "no") + "; sfo-median <= random: " + (order_sr ? "yes" : "no"));
  detail(std::string("random - exact >= 0.20: ") + (gap_e ? "yes" : "no") + "; random - sfo-median >= 0.10: " +
         (gap_s ? "yes" : "no"));
  const double minutes = (d.train_seconds + d.attack_seconds) / 60;
  detail("training plus attacks: " + fmt(minutes, 3) + " min");
  return {trained && order_es && order_sr && gap_e && gap_s,
          "exact " + fmt(e) + ", sfo-median " + fmt(s) + ", random " + fmt(r)};
}

Verdict hybrid_interpolation() {
  auto& d = desk();
  const double e = acc("exact"), s = acc("sfo-median");
  const double lo = std::min(e, s), hi = std::max(e, s);
  const double h2 = acc("hybrid:sfo-median:2"), h8 = acc("hybrid:sfo-median:8"), h32 = acc("hybrid:sfo-median:32");
  const bool between = lo <= h2 && h2 <= hi && lo <= h8 && h8 <= hi && lo <= h32 && h32 <= hi;
  const bool monotone = h2 >= h8 && h8 >= h32;
  detail("sfo-median " + fmt(s) + ", m=2 " + fmt(h2) + ", m=8 " + fmt(h8) + ", m=32 " + fmt(h32) + ", exact " +
         fmt(e));
  detail(std::string("all between sfo-median and exact: ") + (between ? "yes" : "no") +
         "; non-increasing in m: " + (monotone ? "yes" : "no"));

  // m = n must reproduce exact's removals and scores.
  auto model = std::make_shared<SetClassifier>(d.model);
  const NeuralObjective obj(model);
  const auto& exact_runs = d.attacks.at("exact").outcomes;
  bool identical = true;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& ps = d.data.test[i * 97 % d.data.test.size()];
    const auto& ref = exact_runs[i * 97 % d.data.test.size()].trace;
    ScoreStrategy h = parse_strategy_spec("hybrid:sfo-median:1");
    h.m = ps.size();
    const auto t = select(obj, ps, h, 64, SelectOptions{false});
    bool same = t.removed() == ref.removed();
    for (std::size_t j = 0; same && j < t.steps.size(); ++j) same = t.steps[j].score == ref.steps[j].score;
    identical = identical && same;
  }
  detail(std::string("m = n reproduces exact traces on 3 samples: ") + (identical ? "yes" : "no"));
  return {between && monotone && identical,
          "m=2 " + fmt(h2) + ", m=8 " + fmt(h8) + ", m=32 " + fmt(h32) + " vs sfo-median " + fmt(s) + ", exact " +
              fmt(e)};
}

Verdict tradeoff() {
  auto& d = desk();
  // Every 12th test sample: 21 samples spread over all classes.
  std::vector<PointSet> subset;
  for (std::size_t i = 0; i < d.data.test.size(); i += 12) subset.push_back(d.data.test[i]);
  BenchConfig cfg;
  cfg.k = 50;
  cfg.repetitions = 3;
  const std::vector<std::string> sfo{"sfo-median", "sfo-feature-min", "saliency"};
  std::vector<std::string> specs{"exact"};
  specs.insert(specs.end(), sfo.begin(), sfo.end());
  for (int m : {1, 2, 4, 8, 16, 32}) specs.push_back("hybrid:random:" + std::to_string(m));
  for (const auto& s : specs) cfg.strategies.push_back(parse_strategy_spec(s));
  const auto rows = run_bench(d.model, subset, cfg);
  std::map<std::string, BenchRow> by;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    by[specs[i]] = rows[i];
    detail(rows[i].strategy + ": " + fmt(rows[i].ms_per_sample) + " ms/sample, accuracy " + fmt(rows[i].accuracy));
  }
  const double ratio = by["exact"].ms_per_sample / by["sfo-median"].ms_per_sample;
  detail("exact / sfo-median time ratio: " + fmt(ratio, 3) + " (need >= 20)");

  // Matched budget: every random-candidate hybrid that needs at most twice
  // the s_FO time must not reach a lower accuracy.
  bool dominated = true;
  for (const auto& s : sfo) {
    std::size_t in_band = 0;
    for (int m : {1, 2, 4, 8, 16, 32}) {
      const auto& h = by["hybrid:random:" + std::to_string(m)];
      if (h.ms_per_sample > 2 * by[s].ms_per_sample) continue;
      ++in_band;
      if (by[s].accuracy > h.accuracy) {
        dominated = false;
        detail(s + " loses to " + h.strategy + " at matched time");
      }
    }
    if (in_band == 0) dominated = false;
    detail(s + ": " + std::to_string(in_band) + " random-candidate hybrids within 2x its time");
  }
  return {ratio >= 20 && dominated,
          "time ratio " + fmt(ratio, 3) + ", s_FO dominates at matched time: " + (dominated ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9. CLI reruns are byte-identical outside timing values

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Blanks timing cells: named timing columns, and x of accuracy_vs_time
// rows in report tables.
std::string strip_timing(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  const auto names = split_csv_line(header);
  const auto& timing = timing_columns();
  std::ostringstream out;
  out << header << '\n';
  const bool report = header == "figure,series,k,x,y";
  for (std::string line; std::getline(in, line);) {
    auto cells = split_csv_line(line);
    for (std::size_t i = 0; i < cells.size() && i < names.size(); ++i) {
      if (std::find(timing.begin(), timing.end(), names[i]) != timing.end()) cells[i] = "*";
    }
    if (report && !cells.empty() && cells[0] == "accuracy_vs_time" && cells.size() > 3) cells[3] = "*";
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict cli_determinism(const fs::path& work) {
#ifndef SUBSEL_CLI_PATH
  (void)work;
  detail("built without the CLI target");
  return {false, "CLI not available"};
#else
  const std::string cli = SUBSEL_CLI_PATH;
  const fs::path root = work / "determinism";
  const fs::path cur = root / "run";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path instance = root / "instance.json";
  std::ofstream(instance) << R"({"kind": "coverage", "universe_weights": [1, 2, 3, 1],
    "covers": {"0": [0, 1], "1": [1, 2], "2": [2, 3], "3": [0], "4": [3], "5": []}})";

  const std::string c = cur.string();
  const std::vector<std::string> commands{
      "--seed 3 gen --out " + c + "/data --train-per-class 6 --test-per-class 2 --points 64",
      "--seed 3 train --data " + c + "/data --out " + c + "/model --epochs 2 --batch 8 --point-widths 16,32 "
          "--head-widths 16 --quiet",
      "--seed 3 --threads 2 select --model " + c + "/model/model.sfm --data " + c +
          "/data --strategy hybrid --m 4 -k 6 --out " + c + "/select",
      "--seed 3 select --model " + c + "/model/model.sfm --data " + c + "/data --strategy random -k 6 --out " + c +
          "/select_random",
      "--seed 3 --precision f32 select --model " + c + "/model/model.sfm --data " + c +
          "/data --strategy saliency -k 6 --out " + c + "/select_f32",
      "select --instance " + instance.string() + " --strategy exact -k 3 --out " + c + "/instance",
      "--seed 3 bench --model " + c + "/model/model.sfm --data " + c + "/data --per-class 1 " +
          "--strategies exact,sfo-median,hybrid:random:2 -k 4 --reps 1 --out " + c + "/bench",
      "report " + c + "/select/summary.csv " + c + "/select/trace.csv " + c + "/bench/bench.csv " + c +
          "/model/metrics.csv --out " + c + "/report",
  };
  auto run_all = [&](const std::string& log) {
    for (const auto& cmd : commands) {
      const std::string line = "\"" + cli + "\" " + cmd + " >> \"" + log + "\" 2>&1";
      if (std::system(line.c_str()) != 0) {
        detail("command failed: subsel " + cmd);
        return false;
      }
    }
    return true;
  };
  if (!run_all((root / "first.log").string())) return {false, "CLI command failed"};
  const fs::path first = root / "first";
  fs::rename(cur, first);
  if (!run_all((root / "second.log").string())) return {false, "CLI command failed"};

  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(first)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), first);
    const fs::path other = cur / rel;
    ++files;
    std::string a = slurp(entry.path()), b = fs::exists(other) ? slurp(other) : std::string("\x01missing");
    if (entry.path().extension() == ".csv") {
      a = strip_timing(a);
      b = strip_timing(b);
    }
    if (a != b) {
      ++differing;
      detail("differs: " + rel.string());
    }
  }
  std::size_t second_files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(cur)) second_files += entry.is_regular_file() ? 1 : 0;
  detail(std::to_string(commands.size()) + " commands run twice, " + std::to_string(files) +
         " output files compared (timing columns masked)");
  return {differing == 0 && files == second_files && files > 0,
          std::to_string(files) + " files, " + std::to_string(differing) + " differing"};
#endif
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = "acceptance_work";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string t; std::getline(ss, t, ',');) only.insert(std::stoi(t));
    } else {
      std::cerr << "usage: subsel_acceptance [--work DIR] [--only 1,2,...]\n";
      return 2;
    }
  }
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient correctness", gradients},
      {"dominated replacement equals removal", substitution},
      {"first-order exactness on linear objectives", linear_first_order},
      {"greedy oracle equivalence", greedy_equivalence},
      {"cost contract", cost_contract},
      {"desk-scale attack ordering", attack_ordering},
      {"hybrid interpolation", hybrid_interpolation},
      {"time and accuracy tradeoff", tradeoff},
      {"determinism", [&] { return cli_determinism(work); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first
              << "): " << v.summary << " [" << fmt(secs, 3) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
