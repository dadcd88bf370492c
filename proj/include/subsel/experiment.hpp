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

// Attack runs over a list of samples, tradeoff benchmarks and the CSV
// tables they produce.
//
// Post-attack accuracy is measured on the audit channel: predictions made to
// report a result are never charged as optimizer passes.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "subsel/eval_counter.hpp"
#include "subsel/point_set.hpp"
#include "subsel/selection.hpp"
#include "subsel/set_model.hpp"

namespace subsel {

struct AttackConfig {
  ScoreStrategy strategy;
  std::size_t k = 64;
  // Worker threads over samples. Per-sample results do not depend on it.
  std::size_t threads = 1;
  bool record_objective = true;
};

// Removal counts at which accuracy is reported: 0, s, 2s, ... with
// s = ceil(k / 10), and k itself.
std::vector<std::size_t> accuracy_grid(std::size_t k);

struct SampleOutcome {
  std::size_t index = 0;  // position in the input list
  std::string name;
  std::size_t label = 0;
  SelectionTrace trace;
  // correct[i]: prediction after accuracy_grid(k)[i] removals is right.
  std::vector<bool> correct;
};

struct AttackSummary {
  std::string strategy;
  std::size_t k = 0;
  std::size_t samples = 0;
  std::vector<std::size_t> grid;
  std::vector<double> accuracy;  // aligned with grid
  double mean_ms = 0;            // scoring wall time per sample
  double forwards_per_sample = 0;
  double backwards_per_sample = 0;

  double clean_accuracy() const { return accuracy.front(); }
  double final_accuracy() const { return accuracy.back(); }
};

struct AttackResult {
  std::vector<SampleOutcome> outcomes;  // input order
  AttackSummary summary;
};

// Seed used for sample `index` given the run seed (random scores).
std::uint64_t sample_seed(std::uint64_t seed, std::size_t index);

// Runs the attack on every sample. Each worker evaluates a private copy of
// the model with its own counter.
AttackResult run_attack(const SetClassifier& model, std::span<const PointSet> samples, const AttackConfig& config,
                        const std::function<void(const SampleOutcome&)>& on_sample = {});

AttackSummary summarize(const std::string& strategy, std::size_t k, std::span<const SampleOutcome> outcomes);

struct BenchConfig {
  std::vector<ScoreStrategy> strategies;
  std::size_t k = 50;
  std::size_t repetitions = 3;
  std::size_t threads = 1;
};

struct BenchRow {
  std::string strategy;
  std::size_t k = 0;
  std::size_t samples = 0;
  std::size_t workers = 1;
  double accuracy = 0;        // mean post-attack accuracy
  double clean_accuracy = 0;
  double ms_per_sample = 0;   // mean over samples of the median over repetitions
  double forwards_per_sample = 0;
  double backwards_per_sample = 0;
};

// One row per strategy, timed single-threaded; with config.threads > 1 a
// second row per strategy reports the parallel run (time per sample is wall
// time of the whole run divided by the sample count).
std::vector<BenchRow> run_bench(const SetClassifier& model, std::span<const PointSet> samples,
                                const BenchConfig& config,
                                const std::function<void(const BenchRow&)>& on_row = {});

// Shortest decimal that round-trips.
std::string format_number(double v);

std::string trace_csv(std::span<const SampleOutcome> outcomes);
// Columns: strategy,k,removed,accuracy,samples,mean_ms,forwards_per_sample,backwards_per_sample
std::string summary_csv(std::span<const AttackSummary> summaries);
std::string bench_csv(std::span<const BenchRow> rows);

// Column names holding wall-clock measurements.
const std::vector<std::string>& timing_columns();

}  // namespace subsel
