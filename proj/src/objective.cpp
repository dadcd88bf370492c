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

#include "subsel/objective.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "subsel/errors.hpp"

namespace subsel {

double SetObjective::evaluate(const PointSet& ps, const Subset& keep, Charge charge) const {
  if (keep.size() == 0) throw EmptySetError(kind() + " objective: cannot evaluate an empty subset");
  if (keep.universe() != ps.size()) {
    throw DimensionError("subset universe " + std::to_string(keep.universe()) +
                         " does not match point set of size " + std::to_string(ps.size()));
  }
  return value(ps, keep, charge);
}

double SetObjective::evaluate(const PointSet& ps, std::span<const ElementId> keep) const {
  return evaluate(ps, Subset(ps, keep));
}

double SetObjective::marginal_gain(const PointSet& ps, const Subset& keep, ElementId e,
                                   std::optional<double> base) const {
  const std::size_t row = ps.row_of(e);
  if (!keep.contains_row(row)) throw IdError("element " + std::to_string(e) + " is not in the kept set");
  if (keep.size() < 2) throw EmptySetError("marginal gain needs |keep| >= 2");
  const double before = base ? *base : evaluate(ps, keep);
  const double after = evaluate(ps, keep.without_row(row));
  return after - before;
}

EmbeddingGradient SetObjective::input_gradient(const PointSet&, const Subset&) const {
  throw UnsupportedError(kind() + " objective has no embedding gradient");
}

EmbeddingGradient SetObjective::feature_gradient(const PointSet&, const Subset&) const {
  throw UnsupportedError(kind() + " objective has no feature gradient");
}

// ---- neural ---------------------------------------------------------------

NeuralObjective::NeuralObjective(std::shared_ptr<const SetClassifier> model) : model_(std::move(model)) {
  if (!model_) throw ParameterError("neural objective needs a model");
}

double NeuralObjective::value(const PointSet& ps, const Subset& keep, Charge charge) const {
  return model_->loss(ps.gather_coords(keep.rows()), ps.label(), charge);
}

EmbeddingGradient NeuralObjective::input_gradient(const PointSet& ps, const Subset& keep) const {
  if (keep.size() == 0) throw EmptySetError("neural objective: empty subset");
  auto rec = model_->input_gradient(ps.gather_coords(keep.rows()), ps.label());
  return {*rec.forward.loss, std::move(rec.gradient), std::move(rec.forward.features)};
}

EmbeddingGradient NeuralObjective::feature_gradient(const PointSet& ps, const Subset& keep) const {
  if (keep.size() == 0) throw EmptySetError("neural objective: empty subset");
  auto rec = model_->feature_gradient(ps.gather_coords(keep.rows()), ps.label());
  return {*rec.forward.loss, std::move(rec.gradient), std::move(rec.forward.features)};
}

// ---- analytic -------------------------------------------------------------

namespace {

template <class Map>
const typename Map::mapped_type& lookup(const Map& m, ElementId id, const std::string& kind) {
  auto it = m.find(id);
  if (it == m.end()) throw IdError(kind + " objective: no data for element " + std::to_string(id));
  return it->second;
}

}  // namespace

ModularObjective::ModularObjective(std::map<ElementId, double> weights) : weights_(std::move(weights)) {
  for (const auto& [id, w] : weights_) {
    if (!std::isfinite(w)) throw DataError("modular weight for " + std::to_string(id) + " is not finite");
  }
}

double ModularObjective::value(const PointSet& ps, const Subset& keep, Charge c) const {
  charge(c);
  double total = 0;
  for (std::size_t r : keep.rows()) total += lookup(weights_, ps.id_at(r), kind());
  return total;
}

CoverageObjective::CoverageObjective(std::vector<double> universe_weights,
                                     std::map<ElementId, std::vector<std::size_t>> covers)
    : universe_weights_(std::move(universe_weights)), covers_(std::move(covers)) {
  for (double w : universe_weights_) {
    if (!(w >= 0) || !std::isfinite(w)) throw DataError("coverage weights must be finite and nonnegative");
  }
  for (const auto& [id, items] : covers_) {
    for (std::size_t u : items) {
      if (u >= universe_weights_.size()) {
        throw DataError("coverage: element " + std::to_string(id) + " covers item " + std::to_string(u) +
                        " outside the universe of " + std::to_string(universe_weights_.size()));
      }
    }
  }
}

double CoverageObjective::value(const PointSet& ps, const Subset& keep, Charge c) const {
  charge(c);
  std::vector<bool> covered(universe_weights_.size(), false);
  for (std::size_t r : keep.rows()) {
    for (std::size_t u : lookup(covers_, ps.id_at(r), kind())) covered[u] = true;
  }
  double total = 0;
  for (std::size_t u = 0; u < covered.size(); ++u) {
    if (covered[u]) total += universe_weights_[u];
  }
  return total;
}

FacilityLocationObjective::FacilityLocationObjective(std::map<ElementId, std::vector<double>> similarity)
    : similarity_(std::move(similarity)) {
  bool first = true;
  for (const auto& [id, row] : similarity_) {
    if (first) clients_ = row.size();
    first = false;
    if (row.size() != clients_) throw DataError("facility location: ragged similarity rows");
    for (double s : row) {
      if (!(s >= 0) || !std::isfinite(s)) throw DataError("facility location similarities must be >= 0");
    }
  }
}

double FacilityLocationObjective::value(const PointSet& ps, const Subset& keep, Charge c) const {
  charge(c);
  std::vector<double> best(clients_, 0.0);
  for (std::size_t r : keep.rows()) {
    const auto& row = lookup(similarity_, ps.id_at(r), kind());
    for (std::size_t j = 0; j < clients_; ++j) best[j] = std::max(best[j], row[j]);
  }
  double total = 0;
  for (double b : best) total += b;
  return total;
}

LinearEmbeddingObjective::LinearEmbeddingObjective(std::vector<double> weight, double offset)
    : weight_(std::move(weight)), offset_(offset) {
  if (weight_.empty()) throw DataError("linear objective needs a weight vector");
}

double LinearEmbeddingObjective::value(const PointSet& ps, const Subset& keep, Charge c) const {
  if (ps.dim() != weight_.size()) {
    throw DimensionError("linear objective: weight has " + std::to_string(weight_.size()) +
                         " entries, embeddings have " + std::to_string(ps.dim()));
  }
  charge(c);
  double total = offset_;
  for (std::size_t r : keep.rows()) {
    auto x = ps.coords().row(r);
    for (std::size_t k = 0; k < x.size(); ++k) total += weight_[k] * x[k];
  }
  return total;
}

EmbeddingGradient LinearEmbeddingObjective::input_gradient(const PointSet& ps, const Subset& keep) const {
  EmbeddingGradient g;
  g.value = evaluate(ps, keep);
  counter().add_backward();
  g.gradient = Matrix(keep.size(), weight_.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    std::copy(weight_.begin(), weight_.end(), g.gradient.row(i).begin());
  }
  return g;
}

// ---- oracles ----------------------------------------------------------------

BruteForceResult brute_force_opt(const SetObjective& obj, const PointSet& ps, std::size_t k) {
  const std::size_t n = ps.size();
  if (n > kBruteForceLimit) {
    throw ParameterError("brute_force_opt: n = " + std::to_string(n) + " exceeds the exhaustive limit of " +
                         std::to_string(kBruteForceLimit));
  }
  const std::size_t min_size = n > k ? n - k : 1;
  BruteForceResult best;
  std::uint32_t best_mask = 0;
  bool found = false;
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  for (std::uint32_t mask = 1; mask <= full && mask != 0; ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size < min_size) continue;
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < n; ++r) {
      if (mask & (std::uint32_t{1} << r)) rows.push_back(r);
    }
    const Subset s = Subset::from_rows(n, rows);
    const double v = obj.evaluate(ps, s, Charge::kAudit);
    bool better = !found || v > best.value;
    if (found && v == best.value) {
      const auto best_size = static_cast<std::size_t>(std::popcount(best_mask));
      // Larger subsets first, then the row set that is lexicographically
      // smallest (lowest bits set).
      if (size != best_size) {
        better = size > best_size;
      } else {
        const std::uint32_t diff = mask ^ best_mask;
        better = (mask & (diff & (~diff + 1))) != 0;
      }
    }
    if (better) {
      found = true;
      best.value = v;
      best_mask = mask;
      best.keep = s.ids(ps);
    }
  }
  return best;
}

bool verify_submodular(const SetObjective& obj, const PointSet& ps, std::size_t trials, std::uint64_t seed,
                       double tolerance) {
  if (obj.kind() == "neural") {
    throw UnsupportedError("verify_submodular: the neural objective carries no submodularity guarantee");
  }
  const std::size_t n = ps.size();
  if (n < 2) return true;
  std::mt19937_64 rng(seed);
  auto eval = [&](const std::vector<std::size_t>& rows) {
    return obj.evaluate(ps, Subset::from_rows(n, rows), Charge::kAudit);
  };
  std::vector<std::size_t> perm(n);
  for (std::size_t t = 0; t < trials; ++t) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    // perm = [A | B \ A | e | rest]; A nonempty, e outside B.
    const std::size_t a = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
    const std::size_t b = std::uniform_int_distribution<std::size_t>(a, n - 1)(rng);
    std::vector<std::size_t> A(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(a));
    std::vector<std::size_t> B(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(b));
    const std::size_t e = perm[b];
    const double fa = eval(A), fb = eval(B);
    A.push_back(e);
    B.push_back(e);
    const double gain_a = eval(A) - fa;
    const double gain_b = eval(B) - fb;
    if (gain_a + tolerance < gain_b) return false;
    if (fb + tolerance < fa) return false;
    if (gain_b < -tolerance) return false;
  }
  return true;
}

// ---- instance files -----------------------------------------------------------

namespace {

ElementId parse_id(const std::string& key) {
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size() || v > 0xffffffffUL) throw FormatError("instance: invalid element id '" + key + "'");
  return static_cast<ElementId>(v);
}

PointSet id_points(const std::vector<ElementId>& ids) {
  return PointSet(ids, Matrix(ids.size(), 1), 0, "instance");
}

}  // namespace

AnalyticInstance parse_instance(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("instance: ") + e.what());
  }
  try {
    const auto kind = j.at("kind").get<std::string>();
    AnalyticInstance inst;
    std::vector<ElementId> ids;
    if (kind == "modular") {
      std::map<ElementId, double> w;
      for (const auto& [key, val] : j.at("weights").items()) w[parse_id(key)] = val.get<double>();
      for (const auto& [id, _] : w) ids.push_back(id);
      inst.objective = std::make_shared<ModularObjective>(std::move(w));
    } else if (kind == "coverage") {
      std::map<ElementId, std::vector<std::size_t>> covers;
      for (const auto& [key, val] : j.at("covers").items()) {
        covers[parse_id(key)] = val.get<std::vector<std::size_t>>();
      }
      for (const auto& [id, _] : covers) ids.push_back(id);
      inst.objective = std::make_shared<CoverageObjective>(
          j.at("universe_weights").get<std::vector<double>>(), std::move(covers));
    } else if (kind == "facility-location") {
      std::map<ElementId, std::vector<double>> sim;
      for (const auto& [key, val] : j.at("similarity").items()) sim[parse_id(key)] = val.get<std::vector<double>>();
      for (const auto& [id, _] : sim) ids.push_back(id);
      inst.objective = std::make_shared<FacilityLocationObjective>(std::move(sim));
    } else if (kind == "linear-embedding") {
      const auto coords = j.at("coords").get<std::vector<std::vector<double>>>();
      const auto weight = j.at("weight").get<std::vector<double>>();
      Matrix m(coords.size(), weight.size());
      for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i].size() != weight.size()) throw FormatError("instance: coordinate rows must match weight");
        std::copy(coords[i].begin(), coords[i].end(), m.row(i).begin());
      }
      inst.objective = std::make_shared<LinearEmbeddingObjective>(weight, j.value("offset", 0.0));
      inst.points = PointSet(std::move(m), 0, "instance");
      return inst;
    } else {
      throw FormatError("instance: unknown kind '" + kind + "'");
    }
    inst.points = id_points(ids);
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("instance: ") + e.what());
  }
}

AnalyticInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open instance " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_instance(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string instance_json(const SetObjective& obj) {
  nlohmann::ordered_json j;
  j["kind"] = obj.kind();
  auto key = [](ElementId id) { return std::to_string(id); };
  if (const auto* m = dynamic_cast<const ModularObjective*>(&obj)) {
    for (const auto& [id, w] : m->weights()) j["weights"][key(id)] = w;
  } else if (const auto* c = dynamic_cast<const CoverageObjective*>(&obj)) {
    j["universe_weights"] = c->universe_weights();
    for (const auto& [id, items] : c->covers()) j["covers"][key(id)] = items;
  } else if (const auto* f = dynamic_cast<const FacilityLocationObjective*>(&obj)) {
    for (const auto& [id, row] : f->similarity()) j["similarity"][key(id)] = row;
  } else {
    throw UnsupportedError("instance_json: cannot serialize a " + obj.kind() + " objective");
  }
  return j.dump(2);
}

}  // namespace subsel
