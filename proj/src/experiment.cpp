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

#include "subsel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "subsel/errors.hpp"
#include "subsel/objective.hpp"

namespace subsel {

std::vector<std::size_t> accuracy_grid(std::size_t k) {
  const std::size_t step = std::max<std::size_t>(1, (k + 9) / 10);
  std::vector<std::size_t> grid;
  for (std::size_t r = 0; r <= k; r += step) grid.push_back(r);
  if (grid.back() != k) grid.push_back(k);
  return grid;
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5e1ecu};
  std::mt19937_64 rng(seq);
  return rng();
}

namespace {

// Runs fn(i) for i in [0, count) on `threads` workers, each with its own
// state from make_state(). The first exception is rethrown after joining.
template <class MakeState, class Fn>
void parallel_for(std::size_t count, std::size_t threads, MakeState make_state, Fn fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    auto state = make_state();
    for (std::size_t i = 0; i < count; ++i) fn(state, i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        auto state = make_state();
        for (std::size_t i = next++; i < count && !failed; i = next++) fn(state, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

SampleOutcome attack_one(const std::shared_ptr<SetClassifier>& model, const PointSet& ps, std::size_t index,
                         const AttackConfig& config) {
  if (ps.dim() != model->input_dim()) {
    throw DimensionError("sample '" + ps.name() + "' has dimension " + std::to_string(ps.dim()) +
                         ", model expects " + std::to_string(model->input_dim()));
  }
  if (ps.label() >= model->num_classes()) {
    throw DataError("sample '" + ps.name() + "' has label " + std::to_string(ps.label()) + " but the model has " +
                    std::to_string(model->num_classes()) + " classes");
  }
  const NeuralObjective objective(model);
  ScoreStrategy strategy = config.strategy;
  strategy.seed = sample_seed(config.strategy.seed, index);
  SelectOptions options;
  options.record_objective = config.record_objective;

  SampleOutcome out;
  out.index = index;
  out.name = ps.name();
  out.label = ps.label();
  out.trace = select(objective, ps, strategy, config.k, options);
  out.trace.strategy = config.strategy.label();

  const auto removed = out.trace.removed();
  Subset keep(ps);
  std::size_t done = 0;
  for (std::size_t r : accuracy_grid(config.k)) {
    for (; done < r; ++done) keep.remove_row(ps.row_of(removed[done]));
    const std::size_t pred = model->predict(ps.gather_coords(keep.rows()), Charge::kAudit);
    out.correct.push_back(pred == ps.label());
  }
  return out;
}

}  // namespace

AttackSummary summarize(const std::string& strategy, std::size_t k, std::span<const SampleOutcome> outcomes) {
  AttackSummary s;
  s.strategy = strategy;
  s.k = k;
  s.samples = outcomes.size();
  s.grid = accuracy_grid(k);
  s.accuracy.assign(s.grid.size(), 0.0);
  if (outcomes.empty()) return s;
  double ms = 0, fwd = 0, bwd = 0;
  for (const auto& o : outcomes) {
    for (std::size_t i = 0; i < s.grid.size(); ++i) s.accuracy[i] += o.correct[i] ? 1.0 : 0.0;
    ms += o.trace.wall_ms;
    fwd += static_cast<double>(o.trace.counters.forwards);
    bwd += static_cast<double>(o.trace.counters.backwards);
  }
  const double n = static_cast<double>(outcomes.size());
  for (double& a : s.accuracy) a /= n;
  s.mean_ms = ms / n;
  s.forwards_per_sample = fwd / n;
  s.backwards_per_sample = bwd / n;
  return s;
}

AttackResult run_attack(const SetClassifier& model, std::span<const PointSet> samples, const AttackConfig& config,
                        const std::function<void(const SampleOutcome&)>& on_sample) {
  config.strategy.validate();
  if (samples.empty()) throw DataError("no samples to attack");
  for (const auto& ps : samples) {
    if (config.k < 1 || config.k + 1 > ps.size()) {
      throw ParameterError("k = " + std::to_string(config.k) + " outside [1, n - 1] for sample '" + ps.name() +
                           "' with n = " + std::to_string(ps.size()));
    }
  }
  AttackResult result;
  result.outcomes.resize(samples.size());
  std::mutex report;
  parallel_for(
      samples.size(), config.threads,
      [&] {
        auto copy = std::make_shared<SetClassifier>(model);
        copy->set_counter(std::make_shared<EvalCounter>());
        return copy;
      },
      [&](const std::shared_ptr<SetClassifier>& local, std::size_t i) {
        result.outcomes[i] = attack_one(local, samples[i], i, config);
        if (on_sample) {
          std::lock_guard<std::mutex> lock(report);
          on_sample(result.outcomes[i]);
        }
      });
  result.summary = summarize(config.strategy.label(), config.k, result.outcomes);
  return result;
}

std::vector<BenchRow> run_bench(const SetClassifier& model, std::span<const PointSet> samples,
                                const BenchConfig& config, const std::function<void(const BenchRow&)>& on_row) {
  if (config.strategies.empty()) throw ParameterError("bench needs at least one strategy");
  if (config.repetitions < 1) throw ParameterError("bench needs at least one repetition");
  std::vector<BenchRow> rows;
  for (const auto& strategy : config.strategies) {
    AttackConfig ac;
    ac.strategy = strategy;
    ac.k = config.k;
    ac.threads = 1;
    ac.record_objective = false;
    std::vector<std::vector<double>> times(samples.size());
    AttackSummary first;
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
      auto res = run_attack(model, samples, ac);
      if (rep == 0) first = res.summary;
      for (std::size_t i = 0; i < samples.size(); ++i) times[i].push_back(res.outcomes[i].trace.wall_ms);
    }
    double total = 0;
    for (auto& t : times) {
      std::sort(t.begin(), t.end());
      const std::size_t mid = t.size() / 2;
      total += t.size() % 2 ? t[mid] : 0.5 * (t[mid - 1] + t[mid]);
    }
    BenchRow row;
    row.strategy = strategy.label();
    row.k = config.k;
    row.samples = samples.size();
    row.workers = 1;
    row.accuracy = first.final_accuracy();
    row.clean_accuracy = first.clean_accuracy();
    row.ms_per_sample = total / static_cast<double>(samples.size());
    row.forwards_per_sample = first.forwards_per_sample;
    row.backwards_per_sample = first.backwards_per_sample;
    rows.push_back(row);
    if (on_row) on_row(row);

    if (config.threads > 1) {
      ac.threads = config.threads;
      const auto t0 = std::chrono::steady_clock::now();
      auto res = run_attack(model, samples, ac);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      BenchRow par = row;
      par.workers = config.threads;
      par.accuracy = res.summary.final_accuracy();
      par.ms_per_sample = ms / static_cast<double>(samples.size());
      rows.push_back(par);
      if (on_row) on_row(par);
    }
  }
  return rows;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trace_csv(std::span<const SampleOutcome> outcomes) {
  std::ostringstream out;
  out << "sample,strategy,iteration,removed_id,score,objective,forwards_cum,backwards_cum,ms_cum\n";
  for (const auto& o : outcomes) {
    for (const auto& s : o.trace.steps) {
      out << o.name << ',' << o.trace.strategy << ',' << s.iteration << ',' << s.removed << ','
          << format_number(s.score) << ',' << format_number(s.objective) << ',' << s.forwards_cum << ','
          << s.backwards_cum << ',' << format_number(s.ms_cum) << '\n';
    }
  }
  return out.str();
}

std::string summary_csv(std::span<const AttackSummary> summaries) {
  std::ostringstream out;
  out << "strategy,k,removed,accuracy,samples,mean_ms,forwards_per_sample,backwards_per_sample\n";
  for (const auto& s : summaries) {
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      out << s.strategy << ',' << s.k << ',' << s.grid[i] << ',' << format_number(s.accuracy[i]) << ','
          << s.samples << ',' << format_number(s.mean_ms) << ',' << format_number(s.forwards_per_sample) << ','
          << format_number(s.backwards_per_sample) << '\n';
    }
  }
  return out.str();
}

std::string bench_csv(std::span<const BenchRow> rows) {
  std::ostringstream out;
  out << "strategy,k,samples,workers,accuracy,clean_accuracy,ms_per_sample,forwards_per_sample,"
         "backwards_per_sample\n";
  for (const auto& r : rows) {
    out << r.strategy << ',' << r.k << ',' << r.samples << ',' << r.workers << ',' << format_number(r.accuracy)
        << ',' << format_number(r.clean_accuracy) << ',' << format_number(r.ms_per_sample) << ','
        << format_number(r.forwards_per_sample) << ',' << format_number(r.backwards_per_sample) << '\n';
  }
  return out.str();
}

const std::vector<std::string>& timing_columns() {
  static const std::vector<std::string> cols{"ms_cum", "mean_ms", "ms_per_sample"};
  return cols;
}

}  // namespace subsel
