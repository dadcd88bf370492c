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

// subsel: dataset generation, training, subset selection attacks,
// benchmarks and report tables.
//
// Every command writes into its --out directory, including a config.json
// with the resolved parameters. Output files are assembled in memory and
// written only once the command has succeeded.
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
// 3 data error, 4 numeric error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "subsel/dataset.hpp"
#include "subsel/errors.hpp"
#include "subsel/experiment.hpp"
#include "subsel/objective.hpp"
#include "subsel/selection.hpp"
#include "subsel/set_model.hpp"
#include "subsel/shapes.hpp"
#include "subsel/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace subsel;

namespace {

constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Global {
  std::uint64_t seed = 0;
  std::string precision = "f64";
  std::size_t threads = 1;
};

// Files of one command, written together at the end.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string bytes) { files_.emplace_back(name, std::move(bytes)); }
  void add_config(const json& config) { add("config.json", config.dump(2) + "\n"); }

  void commit() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw DataError("cannot create " + dir_.string() + ": " + ec.message());
    for (const auto& [name, bytes] : files_) {
      const fs::path final_path = dir_ / name;
      const fs::path tmp = dir_ / (name + ".tmp");
      {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("failed writing " + tmp.string());
      }
      fs::rename(tmp, final_path, ec);
      if (ec) throw DataError("cannot move " + tmp.string() + " to " + final_path.string() + ": " + ec.message());
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

json base_config(const std::string& command, const Global& g) {
  json j;
  j["command"] = command;
  j["seed"] = g.seed;
  j["precision"] = g.precision;
  j["threads"] = g.threads;
  return j;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// First `per_class` samples of every label, in dataset order; 0 keeps all.
std::vector<PointSet> take_per_class(const std::vector<PointSet>& samples, std::size_t per_class) {
  if (per_class == 0) return samples;
  std::map<std::size_t, std::size_t> seen;
  std::vector<PointSet> out;
  for (const auto& ps : samples) {
    if (seen[ps.label()]++ < per_class) out.push_back(ps);
  }
  return out;
}

struct SampleSource {
  std::string model;
  std::string data;
  std::string split = "test";
  std::size_t per_class = 0;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--model", model, "Checkpoint file")->required();
    cmd->add_option("--data", data, "Dataset directory (holding manifest.json)")->required();
    cmd->add_option("--split", split, "Dataset split to attack")
        ->check(CLI::IsMember({"train", "test"}))
        ->capture_default_str();
    cmd->add_option("--per-class", per_class, "Use the first N samples of each class (0 = all)")
        ->capture_default_str();
  }

  json to_json() const { return {{"model", model}, {"data", data}, {"split", split}, {"per_class", per_class}}; }

  std::pair<SetClassifier, std::vector<PointSet>> load(const Global& g) const {
    SetClassifier m = load_checkpoint(model);
    m.set_precision(parse_precision(g.precision));
    Dataset ds = read_dataset(data);
    auto samples = take_per_class(split == "test" ? ds.test : ds.train, per_class);
    if (samples.empty()) throw DataError("split '" + split + "' of " + data + " has no samples");
    for (const auto& ps : samples) {
      if (ps.dim() != m.input_dim()) {
        throw DimensionError("dataset " + data + " has dimension " + std::to_string(ps.dim()) + ", model " +
                             model + " expects " + std::to_string(m.input_dim()));
      }
    }
    return {std::move(m), std::move(samples)};
  }
};

// ---- gen --------------------------------------------------------------------

struct GenArgs {
  std::string out;
  std::string classes;
  std::size_t train_per_class = 200;
  std::size_t test_per_class = 50;
  std::size_t points = 256;
  double scale_jitter = 0.2;
  double aspect_jitter = 0.2;
  double ratio_jitter = 0.15;
};

void run_gen(const GenArgs& a, const Global& g) {
  DatasetConfig cfg;
  if (!a.classes.empty()) {
    cfg.classes.clear();
    for (const auto& name : split_list(a.classes)) cfg.classes.push_back(parse_family(name));
  }
  cfg.train_per_class = a.train_per_class;
  cfg.test_per_class = a.test_per_class;
  cfg.points = a.points;
  cfg.seed = g.seed;
  cfg.scale_jitter = a.scale_jitter;
  cfg.aspect_jitter = a.aspect_jitter;
  cfg.ratio_jitter = a.ratio_jitter;
  const Dataset ds = make_dataset(cfg);

  json config = base_config("gen", g);
  config["out"] = a.out;
  std::vector<std::string> names;
  for (auto f : cfg.classes) names.emplace_back(family_name(f));
  config["classes"] = names;
  config["train_per_class"] = a.train_per_class;
  config["test_per_class"] = a.test_per_class;
  config["points"] = a.points;
  config["scale_jitter"] = a.scale_jitter;
  config["aspect_jitter"] = a.aspect_jitter;
  config["ratio_jitter"] = a.ratio_jitter;

  write_dataset(a.out, ds);
  Outputs out(a.out);
  out.add_config(config);
  out.commit();
  std::cout << "wrote " << ds.train.size() + ds.test.size() << " samples (" << ds.train.size() << " train, "
            << ds.test.size() << " test) to " << a.out << "\n";
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  TrainConfig cfg;
  std::string point_widths = "64,64,128";
  std::string head_widths = "64";
  bool quiet = false;
};

std::vector<std::size_t> parse_widths(const std::string& text, bool allow_empty) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0) throw ParameterError("bad layer width '" + item + "'");
    out.push_back(v);
  }
  if (out.empty() && !allow_empty) throw ParameterError("layer width list must not be empty");
  return out;
}

void run_train(TrainArgs a, const Global& g) {
  if (g.precision != "f64") throw ParameterError("training runs in f64 only (got --precision " + g.precision + ")");
  const Dataset ds = read_dataset(a.data);
  if (ds.train.empty()) throw DataError("dataset " + a.data + " has no training samples");
  Architecture arch;
  arch.input_dim = ds.train.front().dim();
  arch.point_widths = parse_widths(a.point_widths, false);
  arch.head_widths = parse_widths(a.head_widths, true);
  arch.num_classes = std::max<std::size_t>(2, ds.class_names.size());
  a.cfg.seed = g.seed;
  SetClassifier model = SetClassifier::initialize(arch, g.seed);

  auto history = train(model, ds.train, ds.test, a.cfg, [&](const EpochMetrics& m) {
    if (!a.quiet) {
      std::fprintf(stderr, "epoch %3zu  lr %.5f  train loss %.4f acc %.4f  test loss %.4f acc %.4f\n", m.epoch, m.lr,
                   m.train_loss, m.train_accuracy, m.test_loss, m.test_accuracy);
    }
  });

  std::ostringstream csv;
  csv << "epoch,lr,train_loss,train_accuracy,test_loss,test_accuracy\n";
  for (const auto& m : history) {
    csv << m.epoch << ',' << format_number(m.lr) << ',' << format_number(m.train_loss) << ','
        << format_number(m.train_accuracy) << ',' << format_number(m.test_loss) << ','
        << format_number(m.test_accuracy) << '\n';
  }
  json config = base_config("train", g);
  config["data"] = a.data;
  config["out"] = a.out;
  config["epochs"] = a.cfg.epochs;
  config["batch"] = a.cfg.batch;
  config["lr"] = a.cfg.lr;
  config["momentum"] = a.cfg.momentum;
  config["jitter"] = a.cfg.jitter;
  config["point_widths"] = arch.point_widths;
  config["head_widths"] = arch.head_widths;
  config["classes"] = ds.class_names;

  Outputs out(a.out);
  out.add("model.sfm", checkpoint_bytes(model));
  out.add("metrics.csv", csv.str());
  out.add_config(config);
  out.commit();
  const auto& last = history.back();
  std::cout << "trained " << model.parameter_count() << " parameters for " << history.size()
            << " epochs; final test accuracy " << format_number(last.test_accuracy) << "\n";
}

// ---- select -----------------------------------------------------------------

struct SelectArgs {
  SampleSource source;
  std::string instance;
  std::string out;
  std::string strategy = "exact";
  std::size_t k = 64;
  std::size_t m = 8;
  std::string inner;
  bool freeze = false;
  std::vector<double> reference;
};

ScoreStrategy resolve_strategy(const std::string& spec, std::size_t m, const std::string& inner, bool freeze,
                               const std::vector<double>& reference, std::uint64_t seed) {
  ScoreStrategy s = parse_strategy_spec(spec);
  if (s.kind == StrategyKind::kHybrid && spec.find('[') == std::string::npos &&
      spec.find(':') == std::string::npos) {
    s.m = m;
    if (!inner.empty()) s.inner = parse_strategy(inner);
  }
  s.freeze_reference = s.freeze_reference || freeze;
  s.custom_reference = reference;
  s.seed = seed;
  s.validate();
  return s;
}

json strategy_json(const ScoreStrategy& s) {
  json j;
  j["label"] = s.label();
  j["kind"] = std::string(strategy_name(s.kind));
  if (s.kind == StrategyKind::kHybrid) {
    j["m"] = s.m;
    j["inner"] = std::string(strategy_name(s.inner));
  }
  j["freeze_reference"] = s.freeze_reference;
  if (!s.custom_reference.empty()) j["reference"] = s.custom_reference;
  return j;
}

void run_select_instance(const SelectArgs& a, const Global& g, const ScoreStrategy& strategy) {
  const AnalyticInstance inst = load_instance(a.instance);
  SelectionTrace trace = select(*inst.objective, inst.points, strategy, a.k);
  SampleOutcome o;
  o.name = fs::path(a.instance).stem().string();
  o.trace = trace;
  std::vector<SampleOutcome> outcomes{o};

  std::ostringstream summary;
  summary << "strategy,k,final_objective,forwards,backwards,mean_ms\n";
  const double final_value = inst.objective->evaluate(inst.points, Subset(inst.points, trace.final_keep), Charge::kAudit);
  summary << trace.strategy << ',' << a.k << ',' << format_number(final_value) << ',' << trace.counters.forwards
          << ',' << trace.counters.backwards << ',' << format_number(trace.wall_ms) << '\n';

  json config = base_config("select", g);
  config["instance"] = a.instance;
  config["out"] = a.out;
  config["strategy"] = strategy_json(strategy);
  config["k"] = a.k;
  Outputs out(a.out);
  out.add("trace.csv", trace_csv(outcomes));
  out.add("summary.csv", summary.str());
  out.add_config(config);
  out.commit();
  std::cout << trace.strategy << " k=" << a.k << ": final objective " << format_number(final_value) << "\n";
}

void run_select(const SelectArgs& a, const Global& g) {
  const ScoreStrategy strategy = resolve_strategy(a.strategy, a.m, a.inner, a.freeze, a.reference, g.seed);
  if (!a.instance.empty()) return run_select_instance(a, g, strategy);
  if (a.source.model.empty() || a.source.data.empty()) {
    throw ParameterError("select needs --model and --data, or --instance");
  }
  auto [model, samples] = a.source.load(g);
  AttackConfig ac;
  ac.strategy = strategy;
  ac.k = a.k;
  ac.threads = g.threads;
  const AttackResult res = run_attack(model, samples, ac);

  json config = base_config("select", g);
  config.update(a.source.to_json());
  config["out"] = a.out;
  config["strategy"] = strategy_json(strategy);
  config["k"] = a.k;
  const std::vector<AttackSummary> summaries{res.summary};
  Outputs out(a.out);
  out.add("trace.csv", trace_csv(res.outcomes));
  out.add("summary.csv", summary_csv(summaries));
  out.add_config(config);
  out.commit();
  const auto& s = res.summary;
  std::cout << s.strategy << " k=" << s.k << " on " << s.samples << " samples: accuracy "
            << format_number(s.clean_accuracy()) << " -> " << format_number(s.final_accuracy()) << ", "
            << format_number(s.forwards_per_sample) << " forwards and " << format_number(s.backwards_per_sample)
            << " backwards per sample, " << format_number(s.mean_ms) << " ms per sample\n";
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
  SampleSource source;
  std::string out;
  std::string strategies = "exact,sfo-median,sfo-feature-min,saliency,random,hybrid:sfo-median:8";
  std::size_t k = 50;
  std::size_t reps = 3;
};

void run_bench_cmd(const BenchArgs& a, const Global& g) {
  BenchConfig bc;
  for (const auto& spec : split_list(a.strategies)) {
    bc.strategies.push_back(resolve_strategy(spec, 8, "", false, {}, g.seed));
  }
  bc.k = a.k;
  bc.repetitions = a.reps;
  bc.threads = g.threads;
  auto [model, samples] = a.source.load(g);
  const auto rows = run_bench(model, samples, bc, [](const BenchRow& r) {
    std::fprintf(stderr, "%-28s workers %zu  accuracy %.4f  %.3f ms/sample  %.1f fwd  %.1f bwd\n",
                 r.strategy.c_str(), r.workers, r.accuracy, r.ms_per_sample, r.forwards_per_sample,
                 r.backwards_per_sample);
  });

  json config = base_config("bench", g);
  config.update(a.source.to_json());
  config["out"] = a.out;
  json strategies = json::array();
  for (const auto& s : bc.strategies) strategies.push_back(strategy_json(s));
  config["strategies"] = strategies;
  config["k"] = a.k;
  config["repetitions"] = a.reps;
  Outputs out(a.out);
  out.add("bench.csv", bench_csv(rows));
  out.add_config(config);
  out.commit();
  std::cout << "wrote " << rows.size() << " rows to " << (fs::path(a.out) / "bench.csv").string() << "\n";
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw DataError(path + ": empty CSV");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw FormatError(path + ":" + std::to_string(i + 1) + ": expected " + std::to_string(rows[0].size()) +
                        " fields, found " + std::to_string(rows[i].size()));
    }
  }
  return rows;
}

void run_report(const ReportArgs& a, const Global& g) {
  std::ostringstream out;
  out << "figure,series,k,x,y\n";
  for (const auto& path : a.inputs) {
    const auto rows = read_csv(path);
    const auto& header = rows[0];
    auto col = [&](const std::string& name) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw FormatError(path + ": missing column '" + name + "'");
      return static_cast<std::size_t>(it - header.begin());
    };
    auto has = [&](const std::string& name) { return std::find(header.begin(), header.end(), name) != header.end(); };
    if (has("removed") && has("accuracy")) {
      const auto s = col("strategy"), k = col("k"), x = col("removed"), y = col("accuracy");
      for (std::size_t i = 1; i < rows.size(); ++i) {
        out << "accuracy_vs_removed," << rows[i][s] << ',' << rows[i][k] << ',' << rows[i][x] << ',' << rows[i][y]
            << '\n';
      }
    } else if (has("ms_per_sample")) {
      const auto s = col("strategy"), k = col("k"), w = col("workers"), t = col("ms_per_sample"),
                 y = col("accuracy"), f = col("forwards_per_sample");
      for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::string series = rows[i][w] == "1" ? rows[i][s] : rows[i][s] + "@" + rows[i][w];
        out << "accuracy_vs_time," << series << ',' << rows[i][k] << ',' << rows[i][t] << ',' << rows[i][y] << '\n';
        out << "accuracy_vs_forwards," << series << ',' << rows[i][k] << ',' << rows[i][f] << ',' << rows[i][y]
            << '\n';
      }
    } else if (has("epoch") && has("test_accuracy")) {
      const auto e = col("epoch");
      for (const char* metric : {"train_loss", "train_accuracy", "test_loss", "test_accuracy"}) {
        const auto c = col(metric);
        for (std::size_t i = 1; i < rows.size(); ++i) {
          out << "training," << metric << ",," << rows[i][e] << ',' << rows[i][c] << '\n';
        }
      }
    } else if (has("removed_id") && has("objective")) {
      const auto s = col("sample"), st = col("strategy"), it = col("iteration"), y = col("objective");
      for (std::size_t i = 1; i < rows.size(); ++i) {
        out << "objective_vs_iteration," << rows[i][st] << '/' << rows[i][s] << ",," << rows[i][it] << ','
            << rows[i][y] << '\n';
      }
    } else {
      throw FormatError(path + ": not a summary, bench, metrics or trace table");
    }
  }
  json config = base_config("report", g);
  config["inputs"] = a.inputs;
  config["out"] = a.out;
  Outputs files(a.out);
  files.add("report.csv", out.str());
  files.add_config(config);
  files.commit();
  std::cout << "wrote " << (fs::path(a.out) / "report.csv").string() << "\n";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DataError*>(&e)) return kExitData;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitData;
  return kExitUnexpected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subset selection for set classifiers: data, training, attacks, benchmarks."};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "Seed for data, initialization, shuffling and random scores")
      ->capture_default_str();
  app.add_option("--precision", g.precision, "Execution precision of the model")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads over samples (select, bench)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate the synthetic shape dataset");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--classes", gen.classes, "Comma-separated families (default: all five)");
  gen_cmd->add_option("--train-per-class", gen.train_per_class, "Training samples per class")->capture_default_str();
  gen_cmd->add_option("--test-per-class", gen.test_per_class, "Test samples per class")->capture_default_str();
  gen_cmd->add_option("--points", gen.points, "Points per sample")->capture_default_str();
  gen_cmd->add_option("--scale-jitter", gen.scale_jitter, "Relative scale jitter")->capture_default_str();
  gen_cmd->add_option("--aspect-jitter", gen.aspect_jitter, "Relative per-axis jitter")->capture_default_str();
  gen_cmd->add_option("--ratio-jitter", gen.ratio_jitter, "Relative jitter of the family ratio")
      ->capture_default_str();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the set classifier; writes model.sfm and metrics.csv");
  train_cmd->add_option("--data", tr.data, "Dataset directory")->required();
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_option("--epochs", tr.cfg.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--batch", tr.cfg.batch, "Minibatch size")->capture_default_str();
  train_cmd->add_option("--lr", tr.cfg.lr, "Initial learning rate (cosine decay)")->capture_default_str();
  train_cmd->add_option("--momentum", tr.cfg.momentum, "SGD momentum")->capture_default_str();
  train_cmd->add_option("--jitter", tr.cfg.jitter, "Uniform input jitter amplitude")->capture_default_str();
  train_cmd->add_option("--point-widths", tr.point_widths, "Point MLP widths")->capture_default_str();
  train_cmd->add_option("--head-widths", tr.head_widths, "Hidden head widths")->capture_default_str();
  train_cmd->add_flag("--quiet", tr.quiet, "No per-epoch progress on stderr");

  SelectArgs sel;
  auto* select_cmd = app.add_subcommand("select", "Run a removal attack; writes trace.csv and summary.csv");
  select_cmd->add_option("--model", sel.source.model, "Checkpoint file");
  select_cmd->add_option("--data", sel.source.data, "Dataset directory");
  select_cmd->add_option("--split", sel.source.split, "Dataset split")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();
  select_cmd->add_option("--per-class", sel.source.per_class, "First N samples of each class (0 = all)")
      ->capture_default_str();
  select_cmd->add_option("--instance", sel.instance, "Analytic instance JSON instead of model and data");
  select_cmd->add_option("--out", sel.out, "Output directory")->required();
  select_cmd->add_option("--strategy", sel.strategy,
                         "exact, sfo-median, sfo-feature-min, sfo-custom, saliency, random, hybrid, "
                         "or hybrid[<inner>:m=<m>]")
      ->capture_default_str();
  select_cmd->add_option("-k,--k", sel.k, "Elements to remove")->capture_default_str();
  select_cmd->add_option("--m", sel.m, "Hybrid candidate count")->capture_default_str();
  select_cmd->add_option("--inner", sel.inner, "Hybrid inner score (default sfo-median)");
  select_cmd->add_flag("--freeze-reference", sel.freeze, "Resolve the reference embedding once from the full set");
  select_cmd->add_option("--reference", sel.reference, "Reference embedding for sfo-custom")->delimiter(',');

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Speed and quality tradeoff table; writes bench.csv");
  bench.source.add_options(bench_cmd);
  bench_cmd->add_option("--out", bench.out, "Output directory")->required();
  bench_cmd->add_option("--strategies", bench.strategies, "Comma-separated strategy specs")->capture_default_str();
  bench_cmd->add_option("-k,--k", bench.k, "Elements to remove")->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps, "Timing repetitions (median is reported)")->capture_default_str();

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Convert result CSVs into one long-format table");
  report_cmd->add_option("inputs", rep.inputs, "summary.csv, bench.csv, metrics.csv or trace.csv files")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--out", rep.out, "Output directory")->required();

  for (auto* cmd : {gen_cmd, train_cmd, select_cmd, bench_cmd, report_cmd}) cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen_cmd) run_gen(gen, g);
    if (*train_cmd) run_train(tr, g);
    if (*select_cmd) run_select(sel, g);
    if (*bench_cmd) run_bench_cmd(bench, g);
    if (*report_cmd) run_report(rep, g);
  } catch (const std::exception& e) {
    std::cerr << "subsel: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
