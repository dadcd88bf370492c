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

#include "subsel/set_model.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "subsel/errors.hpp"
#include "subsel/tape.hpp"

namespace subsel {

std::string to_string(Precision p) { return p == Precision::kF32 ? "f32" : "f64"; }

Precision parse_precision(std::string_view s) {
  if (s == "f64") return Precision::kF64;
  if (s == "f32") return Precision::kF32;
  throw ParameterError("unknown precision '" + std::string(s) + "' (expected f32 or f64)");
}

namespace {

template <class T>
struct LayerT {
  BasicMatrix<T> weight;
  BasicMatrix<T> bias;
};

template <class T>
struct ParamsT {
  std::vector<LayerT<T>> point;
  std::vector<LayerT<T>> head;
};

template <class T>
ParamsT<T> cast_params(const std::vector<DenseLayer>& point, const std::vector<DenseLayer>& head) {
  ParamsT<T> p;
  for (const auto& l : point) p.point.push_back({l.weight.cast<T>(), l.bias.cast<T>()});
  for (const auto& l : head) p.head.push_back({l.weight.cast<T>(), l.bias.cast<T>()});
  return p;
}

// Views double parameters without copying.
struct ParamsView64 {
  const std::vector<DenseLayer>& point;
  const std::vector<DenseLayer>& head;
};

template <class Layers, class T>
BasicMatrix<T> mlp(const Layers& layers, BasicMatrix<T> x) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    BasicMatrix<T> y(x.rows(), layers[i].weight.cols());
    affine_into(x.values().data(), x.rows(), layers[i].weight, layers[i].bias, i + 1 < layers.size(),
                y.values().data());
    x = std::move(y);
  }
  return x;
}

// Loss only, through reused per-thread buffers. Same arithmetic as
// run_forward, so the value is bitwise identical.
template <class T, class P>
double run_loss(const P& params, const BasicMatrix<T>& x, std::size_t label) {
  thread_local std::vector<T> a, b;
  const std::size_t n = x.rows();
  const T* in = x.values().data();
  for (std::size_t i = 0; i < params.point.size(); ++i) {
    const auto& l = params.point[i];
    a.resize(n * l.weight.cols());
    affine_into(in, n, l.weight, l.bias, i + 1 < params.point.size(), a.data());
    std::swap(a, b);
    in = b.data();
  }
  const std::size_t h = params.point.back().weight.cols();
  BasicMatrix<T> pooled(1, h);
  T* pm = pooled.values().data();
  std::copy(in, in + h, pm);
  for (std::size_t r = 1; r < n; ++r) {
    const T* row = in + r * h;
    for (std::size_t j = 0; j < h; ++j) {
      if (row[j] > pm[j]) pm[j] = row[j];
    }
  }
  const BasicMatrix<T> logits = mlp(params.head, std::move(pooled));
  return static_cast<double>(softmax_xent(logits, label));
}

template <class T>
ForwardRecord to_record(const BasicMatrix<T>& features, Pooled<T> pooled, const BasicMatrix<T>& logits,
                        std::optional<std::size_t> label) {
  ForwardRecord r;
  if constexpr (std::is_same_v<T, double>) {
    r.features = features;
    r.pooled = std::move(pooled.pooled);
    r.logits = logits;
  } else {
    r.features = features.template cast<double>();
    r.pooled = pooled.pooled.template cast<double>();
    r.logits = logits.template cast<double>();
  }
  r.witness = std::move(pooled.witness);
  if (label) r.loss = static_cast<double>(softmax_xent(logits, *label));
  return r;
}

template <class T, class P>
ForwardRecord run_forward(const P& params, const BasicMatrix<T>& x, std::optional<std::size_t> label) {
  BasicMatrix<T> features = mlp(params.point, x);
  Pooled<T> pooled = feature_max(features);
  BasicMatrix<T> logits = mlp(params.head, pooled.pooled);
  return to_record(features, std::move(pooled), logits, label);
}

enum class Target { kInput, kFeatures };

template <class T, class P>
GradientRecord run_gradient(const P& params, BasicMatrix<T> x, std::size_t label, Target target) {
  BasicTape<T> tape;
  auto chain = [&tape](const auto& layers, NodeId node) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      NodeId w = tape.leaf(layers[i].weight, false);
      NodeId b = tape.leaf(layers[i].bias, false);
      node = tape.affine(node, w, b);
      if (i + 1 < layers.size()) node = tape.relu(node);
    }
    return node;
  };
  auto convert = [](BasicMatrix<T> m) {
    if constexpr (std::is_same_v<T, double>) {
      return m;
    } else {
      return m.template cast<double>();
    }
  };

  const NodeId input = tape.leaf(std::move(x), target == Target::kInput);
  NodeId features = chain(params.point, input);
  if (target == Target::kFeatures) features = tape.leaf(tape.value(features), true);
  const NodeId pooled = tape.feature_max(features);
  const NodeId logits = chain(params.head, pooled);
  const NodeId loss = tape.softmax_xent(logits, label);
  auto grads = tape.backward(loss);

  GradientRecord out;
  out.forward.features = convert(tape.value(features));
  out.forward.pooled = convert(tape.value(pooled));
  out.forward.witness = tape.witness(pooled);
  out.forward.logits = convert(tape.value(logits));
  out.forward.loss = static_cast<double>(tape.value(loss)(0, 0));
  out.gradient = convert(grads.take(target == Target::kInput ? input : features));
  return out;
}

void check_chain(const std::vector<DenseLayer>& layers, const char* what) {
  if (layers.empty()) throw DimensionError(std::string(what) + " needs at least one layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.rows() != 1 || l.bias.cols() != l.weight.cols()) {
      throw DimensionError(std::string(what) + " layer " + std::to_string(i) + ": bias " +
                           l.bias.shape_string() + " does not match weight " + l.weight.shape_string());
    }
    if (i > 0 && layers[i - 1].weight.cols() != l.weight.rows()) {
      throw DimensionError(std::string(what) + " layer " + std::to_string(i) + ": weight " +
                           l.weight.shape_string() + " does not follow " +
                           layers[i - 1].weight.shape_string());
    }
  }
}

}  // namespace

struct SetClassifier::FloatParams : ParamsT<float> {};

SetClassifier SetClassifier::initialize(const Architecture& arch, std::uint64_t seed) {
  if (arch.input_dim == 0 || arch.point_widths.empty() || arch.num_classes < 2) {
    throw ParameterError("architecture needs input_dim >= 1, a point MLP and >= 2 classes");
  }
  std::mt19937_64 rng(seed);
  auto make = [&rng](std::size_t in, std::size_t out) {
    if (in == 0 || out == 0) throw ParameterError("layer widths must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer l{Matrix(in, out), Matrix(1, out)};
    for (double& v : l.weight.values()) v = dist(rng);
    return l;
  };
  std::vector<DenseLayer> point, head;
  std::size_t in = arch.input_dim;
  for (std::size_t w : arch.point_widths) {
    point.push_back(make(in, w));
    in = w;
  }
  for (std::size_t w : arch.head_widths) {
    head.push_back(make(in, w));
    in = w;
  }
  head.push_back(make(in, arch.num_classes));
  return SetClassifier(std::move(point), std::move(head));
}

SetClassifier::SetClassifier(std::vector<DenseLayer> point_mlp, std::vector<DenseLayer> head)
    : point_mlp_(std::move(point_mlp)), head_(std::move(head)) {
  check_chain(point_mlp_, "point MLP");
  check_chain(head_, "head");
  if (head_.front().weight.rows() != feature_dim()) {
    throw DimensionError("head input width " + std::to_string(head_.front().weight.rows()) +
                         " does not match feature width " + std::to_string(feature_dim()));
  }
  if (num_classes() < 2) throw DimensionError("classifier needs at least 2 classes");
}

std::vector<DenseLayer>& SetClassifier::mutable_point_mlp() {
  set_precision(Precision::kF64);
  return point_mlp_;
}

std::vector<DenseLayer>& SetClassifier::mutable_head() {
  set_precision(Precision::kF64);
  return head_;
}

void SetClassifier::set_precision(Precision p) {
  precision_ = p;
  if (p == Precision::kF32) {
    auto fp = std::make_shared<FloatParams>();
    static_cast<ParamsT<float>&>(*fp) = cast_params<float>(point_mlp_, head_);
    float_params_ = std::move(fp);
  } else {
    float_params_.reset();
  }
}

void SetClassifier::set_counter(std::shared_ptr<EvalCounter> counter) {
  if (!counter) throw ParameterError("counter must not be null");
  counter_ = std::move(counter);
}

void SetClassifier::check_input(const Matrix& coords) const {
  if (coords.cols() != input_dim()) {
    throw DimensionError("input has width " + std::to_string(coords.cols()) + " (shape " +
                         coords.shape_string() + "), model expects " + std::to_string(input_dim()));
  }
  if (coords.rows() == 0) throw EmptySetError("cannot evaluate the classifier on an empty set");
}

ForwardRecord SetClassifier::forward(const Matrix& coords, std::optional<std::size_t> label,
                                     Charge charge) const {
  check_input(coords);
  if (label && *label >= num_classes()) {
    throw IndexError("label " + std::to_string(*label) + " out of range for " +
                     std::to_string(num_classes()) + " classes");
  }
  charge == Charge::kAudit ? counter_->add_audit() : counter_->add_forward();
  if (precision_ == Precision::kF32) {
    return run_forward(*float_params_, coords.cast<float>(), label);
  }
  return run_forward(ParamsView64{point_mlp_, head_}, coords, label);
}

double SetClassifier::loss(const Matrix& coords, std::size_t label, Charge charge) const {
  check_input(coords);
  if (label >= num_classes()) throw IndexError("label " + std::to_string(label) + " out of range");
  charge == Charge::kAudit ? counter_->add_audit() : counter_->add_forward();
  if (precision_ == Precision::kF32) return run_loss(*float_params_, coords.cast<float>(), label);
  return run_loss(ParamsView64{point_mlp_, head_}, coords, label);
}

ForwardRecord SetClassifier::forward(const PointSet& ps, Charge charge) const {
  return forward(ps.coords(), ps.label(), charge);
}

GradientRecord SetClassifier::input_gradient(const Matrix& coords, std::size_t label) const {
  check_input(coords);
  if (label >= num_classes()) throw IndexError("label " + std::to_string(label) + " out of range");
  counter_->add_forward();
  counter_->add_backward();
  if (precision_ == Precision::kF32) {
    return run_gradient(*float_params_, coords.cast<float>(), label, Target::kInput);
  }
  return run_gradient(ParamsView64{point_mlp_, head_}, coords, label, Target::kInput);
}

GradientRecord SetClassifier::feature_gradient(const Matrix& coords, std::size_t label) const {
  check_input(coords);
  if (label >= num_classes()) throw IndexError("label " + std::to_string(label) + " out of range");
  counter_->add_forward();
  counter_->add_backward();
  if (precision_ == Precision::kF32) {
    return run_gradient(*float_params_, coords.cast<float>(), label, Target::kFeatures);
  }
  return run_gradient(ParamsView64{point_mlp_, head_}, coords, label, Target::kFeatures);
}

std::size_t SetClassifier::predict(const Matrix& coords, Charge charge) const {
  const auto rec = forward(coords, std::nullopt, charge);
  return argmax(rec.logits.row(0));
}

Matrix SetClassifier::point_features(const Matrix& coords) const {
  check_input(coords);
  if (precision_ == Precision::kF32) {
    return mlp(float_params_->point, coords.cast<float>()).cast<double>();
  }
  return mlp(point_mlp_, coords);
}

std::size_t SetClassifier::parameter_count() const {
  std::size_t n = 0;
  for (const auto* layers : {&point_mlp_, &head_}) {
    for (const auto& l : *layers) n += l.weight.size() + l.bias.size();
  }
  return n;
}

namespace {

constexpr std::string_view kCheckpointMagic = "SFM1";

void put_matrix(detail::ByteWriter& w, const Matrix& m) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (double v : m.values()) w.f64(v);
}

Matrix get_matrix(detail::ByteReader& r) {
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  const std::uint64_t count = std::uint64_t{rows} * cols;
  if (count * 8 > r.remaining()) throw FormatError("checkpoint: matrix payload truncated");
  std::vector<double> data(count);
  for (double& v : data) v = r.f64();
  return Matrix(rows, cols, std::move(data));
}

}  // namespace

std::string checkpoint_bytes(const SetClassifier& model) {
  detail::ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u32(static_cast<std::uint32_t>(model.point_mlp().size() + model.head().size()));
  w.u32(static_cast<std::uint32_t>(model.point_mlp().size()));
  for (const auto* layers : {&model.point_mlp(), &model.head()}) {
    for (const auto& l : *layers) {
      put_matrix(w, l.weight);
      put_matrix(w, l.bias);
    }
  }
  w.u32(static_cast<std::uint32_t>(model.input_dim()));
  w.u32(static_cast<std::uint32_t>(model.feature_dim()));
  w.u32(static_cast<std::uint32_t>(model.num_classes()));
  return w.take();
}

SetClassifier checkpoint_from_bytes(std::string_view bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  if (r.raw(4) != kCheckpointMagic) throw FormatError("checkpoint: bad magic (expected SFM1)");
  const std::uint32_t layers = r.u32();
  const std::uint32_t point_layers = r.u32();
  if (point_layers == 0 || point_layers >= layers) {
    throw FormatError("checkpoint: invalid layer split " + std::to_string(point_layers) + "/" +
                      std::to_string(layers));
  }
  std::vector<DenseLayer> point, head;
  for (std::uint32_t i = 0; i < layers; ++i) {
    DenseLayer l;
    l.weight = get_matrix(r);
    l.bias = get_matrix(r);
    (i < point_layers ? point : head).push_back(std::move(l));
  }
  const std::uint32_t d = r.u32(), h = r.u32(), c = r.u32();
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes");
  try {
    SetClassifier model(std::move(point), std::move(head));
    if (model.input_dim() != d || model.feature_dim() != h || model.num_classes() != c) {
      throw FormatError("checkpoint: header dims do not match layer shapes");
    }
    return model;
  } catch (const DimensionError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const SetClassifier& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  const std::string bytes = checkpoint_bytes(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

SetClassifier load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_bytes(ss.str());
}

}  // namespace subsel
