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

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>
#include <vector>

#include "subsel/dataset.hpp"
#include "subsel/errors.hpp"
#include "subsel/experiment.hpp"
#include "subsel/objective.hpp"
#include "subsel/selection.hpp"
#include "subsel/set_model.hpp"
#include "subsel/training.hpp"

namespace py = pybind11;
using namespace subsel;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array, got " + std::to_string(a.ndim()) + " dimensions");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

std::vector<double> row_vector(const Matrix& m) { return {m.values().begin(), m.values().end()}; }

py::dict counters(const EvalCounter::Snapshot& s) {
  py::dict d;
  d["forwards"] = s.forwards;
  d["backwards"] = s.backwards;
  d["audits"] = s.audits;
  return d;
}

py::dict trace_dict(const SelectionTrace& t) {
  py::list steps;
  for (const auto& s : t.steps) {
    py::dict d;
    d["iteration"] = s.iteration;
    d["removed"] = s.removed;
    d["score"] = s.score;
    d["objective"] = s.objective;
    d["forwards_cum"] = s.forwards_cum;
    d["backwards_cum"] = s.backwards_cum;
    d["ms_cum"] = s.ms_cum;
    steps.append(d);
  }
  py::dict out;
  out["strategy"] = t.strategy;
  out["removed"] = t.removed();
  out["keep"] = t.final_keep;
  out["steps"] = steps;
  out["counters"] = counters(t.counters);
  out["wall_ms"] = t.wall_ms;
  return out;
}

py::dict summary_dict(const AttackSummary& s) {
  py::dict d;
  d["strategy"] = s.strategy;
  d["k"] = s.k;
  d["samples"] = s.samples;
  d["grid"] = s.grid;
  d["accuracy"] = s.accuracy;
  d["mean_ms"] = s.mean_ms;
  d["forwards_per_sample"] = s.forwards_per_sample;
  d["backwards_per_sample"] = s.backwards_per_sample;
  return d;
}

std::shared_ptr<SetObjective> neural(const SetClassifier& model) {
  return std::make_shared<NeuralObjective>(std::make_shared<SetClassifier>(model));
}

}  // namespace

PYBIND11_MODULE(_subsel, m) {
  m.doc() = "Set classifiers, set objectives and iterative subset selection.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<PointSet>(m, "PointSet")
      .def(py::init([](const Array& coords, std::size_t label, std::optional<std::vector<ElementId>> ids,
                       std::string name) {
             Matrix c = to_matrix(coords);
             return ids ? PointSet(std::move(*ids), std::move(c), label, std::move(name))
                        : PointSet(std::move(c), label, std::move(name));
           }),
           py::arg("coords"), py::arg("label") = 0, py::arg("ids") = py::none(), py::arg("name") = "")
      .def_property_readonly("coords", [](const PointSet& p) { return to_array(p.coords()); })
      .def_property_readonly("ids", &PointSet::ids)
      .def_property_readonly("label", &PointSet::label)
      .def_property_readonly("name", &PointSet::name)
      .def("__len__", &PointSet::size)
      .def("__repr__", [](const PointSet& p) {
        return "PointSet(n=" + std::to_string(p.size()) + ", d=" + std::to_string(p.dim()) +
               ", label=" + std::to_string(p.label()) + ")";
      });

  m.def(
      "make_dataset",
      [](std::vector<std::string> classes, std::size_t train_per_class, std::size_t test_per_class,
         std::size_t points, std::uint64_t seed) {
        DatasetConfig cfg;
        if (!classes.empty()) {
          cfg.classes.clear();
          for (const auto& c : classes) cfg.classes.push_back(parse_family(c));
        }
        cfg.train_per_class = train_per_class;
        cfg.test_per_class = test_per_class;
        cfg.points = points;
        cfg.seed = seed;
        const auto ds = make_dataset(cfg);
        return py::make_tuple(ds.train, ds.test, ds.class_names);
      },
      py::arg("classes") = std::vector<std::string>{}, py::arg("train_per_class") = 200,
      py::arg("test_per_class") = 50, py::arg("points") = 256, py::arg("seed") = 0,
      "Returns (train, test, class_names).");
  m.def("read_dataset", [](const std::filesystem::path& dir) {
    const auto ds = read_dataset(dir);
    return py::make_tuple(ds.train, ds.test, ds.class_names);
  });

  py::class_<SetClassifier>(m, "SetClassifier")
      .def_static(
          "initialize",
          [](std::vector<std::size_t> point_widths, std::vector<std::size_t> head_widths, std::size_t classes,
             std::size_t input_dim, std::uint64_t seed) {
            Architecture a;
            a.point_widths = std::move(point_widths);
            a.head_widths = std::move(head_widths);
            a.num_classes = classes;
            a.input_dim = input_dim;
            return SetClassifier::initialize(a, seed);
          },
          py::arg("point_widths") = std::vector<std::size_t>{64, 64, 128},
          py::arg("head_widths") = std::vector<std::size_t>{64}, py::arg("num_classes") = 5,
          py::arg("input_dim") = 3, py::arg("seed") = 0)
      .def_static("load", [](const std::filesystem::path& p) { return load_checkpoint(p); })
      .def("save", [](const SetClassifier& s, const std::filesystem::path& p) { save_checkpoint(s, p); })
      .def_property_readonly("num_classes", &SetClassifier::num_classes)
      .def_property_readonly("feature_dim", &SetClassifier::feature_dim)
      .def_property_readonly("parameter_count", &SetClassifier::parameter_count)
      .def_property(
          "precision", [](const SetClassifier& s) { return to_string(s.precision()); },
          [](SetClassifier& s, const std::string& p) { s.set_precision(parse_precision(p)); })
      .def("logits", [](const SetClassifier& s, const Array& x) { return row_vector(s.forward(to_matrix(x)).logits); })
      .def("loss", [](const SetClassifier& s, const Array& x, std::size_t y) { return s.loss(to_matrix(x), y); })
      .def("predict", [](const SetClassifier& s, const Array& x) { return s.predict(to_matrix(x)); })
      .def("point_features", [](const SetClassifier& s, const Array& x) {
        return to_array(s.point_features(to_matrix(x)));
      })
      .def("input_gradient", [](const SetClassifier& s, const Array& x, std::size_t y) {
        const auto g = s.input_gradient(to_matrix(x), y);
        return py::make_tuple(*g.forward.loss, to_array(g.gradient));
      }, "Returns (loss, d loss / d coords).")
      .def("feature_gradient", [](const SetClassifier& s, const Array& x, std::size_t y) {
        const auto g = s.feature_gradient(to_matrix(x), y);
        return py::make_tuple(*g.forward.loss, to_array(g.gradient));
      }, "Returns (loss, d loss / d point features).")
      .def("counters", [](const SetClassifier& s) { return counters(s.counter().snapshot()); });

  m.def(
      "train",
      [](SetClassifier& model, const std::vector<PointSet>& train_set, const std::vector<PointSet>& test_set,
         std::size_t epochs, std::size_t batch, double lr, double momentum, std::uint64_t seed, double jitter) {
        TrainConfig cfg{epochs, batch, lr, momentum, seed, jitter};
        py::list out;
        for (const auto& e : train(model, train_set, test_set, cfg)) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["lr"] = e.lr;
          d["train_loss"] = e.train_loss;
          d["train_accuracy"] = e.train_accuracy;
          d["test_loss"] = e.test_loss;
          d["test_accuracy"] = e.test_accuracy;
          out.append(d);
        }
        return out;
      },
      py::arg("model"), py::arg("train_set"), py::arg("test_set") = std::vector<PointSet>{},
      py::arg("epochs") = 60, py::arg("batch") = 32, py::arg("lr") = 0.01, py::arg("momentum") = 0.9,
      py::arg("seed") = 0, py::arg("jitter") = 0.0, "Trains in place; returns per-epoch metrics.");

  py::class_<SetObjective, std::shared_ptr<SetObjective>>(m, "SetObjective")
      .def_property_readonly("kind", &SetObjective::kind)
      .def("evaluate",
           [](const SetObjective& o, const PointSet& ps, std::optional<std::vector<ElementId>> keep) {
             return keep ? o.evaluate(ps, *keep) : o.evaluate(ps, Subset(ps));
           },
           py::arg("points"), py::arg("keep") = py::none())
      .def("marginal_gain",
           [](const SetObjective& o, const PointSet& ps, ElementId e, std::optional<std::vector<ElementId>> keep) {
             return keep ? o.marginal_gain(ps, Subset(ps, *keep), e) : o.marginal_gain(ps, Subset(ps), e);
           },
           py::arg("points"), py::arg("element"), py::arg("keep") = py::none(),
           "phi(keep without element) - phi(keep).")
      .def("counters", [](const SetObjective& o) { return counters(o.counter().snapshot()); });

  m.def("neural_objective", &neural, py::arg("model"), "Loss of a copy of the model on the kept rows.");
  m.def("modular_objective", [](std::map<ElementId, double> w) -> std::shared_ptr<SetObjective> {
    return std::make_shared<ModularObjective>(std::move(w));
  });
  m.def("coverage_objective",
        [](std::vector<double> weights, std::map<ElementId, std::vector<std::size_t>> covers)
            -> std::shared_ptr<SetObjective> {
          return std::make_shared<CoverageObjective>(std::move(weights), std::move(covers));
        });
  m.def("facility_location_objective",
        [](std::map<ElementId, std::vector<double>> sim) -> std::shared_ptr<SetObjective> {
          return std::make_shared<FacilityLocationObjective>(std::move(sim));
        });
  m.def(
      "linear_objective",
      [](std::vector<double> weight, double offset) -> std::shared_ptr<SetObjective> {
        return std::make_shared<LinearEmbeddingObjective>(std::move(weight), offset);
      },
      py::arg("weight"), py::arg("offset") = 0.0);

  m.def(
      "select",
      [](const SetObjective& obj, const PointSet& ps, const std::string& strategy, std::size_t k,
         std::uint64_t seed, std::optional<std::vector<double>> reference) {
        ScoreStrategy s = parse_strategy_spec(strategy);
        s.seed = seed;
        if (reference) s.custom_reference = *reference;
        s.validate();
        return trace_dict(select(obj, ps, s, k));
      },
      py::arg("objective"), py::arg("points"), py::arg("strategy"), py::arg("k"), py::arg("seed") = 0,
      py::arg("reference") = py::none(),
      "Removes k elements greedily. Strategy specs: exact, sfo-median, sfo-feature-min, sfo-custom, "
      "saliency, random, hybrid[INNER:m=M] (or hybrid:INNER:M); append +frozen to fix the reference.");

  m.def(
      "brute_force_opt",
      [](const SetObjective& obj, const PointSet& ps, std::size_t k) {
        const auto r = brute_force_opt(obj, ps, k);
        return py::make_tuple(r.keep, r.value);
      },
      "Returns (keep, value) maximizing phi over |keep| >= n - k.");

  m.def(
      "run_attack",
      [](const SetClassifier& model, const std::vector<PointSet>& samples, const std::string& strategy,
         std::size_t k, std::uint64_t seed, std::size_t threads) {
        AttackConfig cfg;
        cfg.strategy = parse_strategy_spec(strategy);
        cfg.strategy.seed = seed;
        cfg.strategy.validate();
        cfg.k = k;
        cfg.threads = threads;
        AttackResult res;
        {
          py::gil_scoped_release release;
          res = run_attack(model, samples, cfg);
        }
        py::list traces;
        for (const auto& o : res.outcomes) traces.append(trace_dict(o.trace));
        py::dict out = summary_dict(res.summary);
        out["traces"] = traces;
        return out;
      },
      py::arg("model"), py::arg("samples"), py::arg("strategy"), py::arg("k") = 64, py::arg("seed") = 0,
      py::arg("threads") = 1);
}
