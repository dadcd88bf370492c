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

#include "subsel/tape.hpp"

#include "subsel/errors.hpp"

namespace subsel {

namespace {

template <class T>
void accumulate(std::optional<BasicMatrix<T>>& slot, BasicMatrix<T> grad) {
  if (!slot) {
    slot = std::move(grad);
    return;
  }
  auto dst = slot->values();
  auto src = grad.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

template <class T>
NodeId BasicTape<T>::push(Node node) {
  for (NodeId in : node.inputs) {
    if (in >= nodes_.size()) {
      throw ContractError("tape: input node " + std::to_string(in) + " does not exist");
    }
    if (nodes_[in].requires_grad) node.requires_grad = true;
  }
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

template <class T>
NodeId BasicTape<T>::leaf(BasicMatrix<T> value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

template <class T>
NodeId BasicTape<T>::affine(NodeId x, NodeId w, NodeId b) {
  Node n;
  n.requires_grad = false;
  n.kind = OpKind::kAffine;
  n.inputs = {x, w, b};
  n.value = subsel::affine(value(x), value(w), value(b));
  return push(std::move(n));
}

template <class T>
NodeId BasicTape<T>::relu(NodeId x) {
  Node n;
  n.requires_grad = false;
  n.kind = OpKind::kRelu;
  n.inputs = {x};
  n.value = subsel::relu(value(x));
  return push(std::move(n));
}

template <class T>
NodeId BasicTape<T>::feature_max(NodeId x) {
  Node n;
  n.requires_grad = false;
  n.kind = OpKind::kFeatureMax;
  n.inputs = {x};
  auto pooled = subsel::feature_max(value(x));
  n.value = std::move(pooled.pooled);
  n.witness = std::move(pooled.witness);
  return push(std::move(n));
}

template <class T>
NodeId BasicTape<T>::softmax_xent(NodeId logits, std::size_t label) {
  Node n;
  n.requires_grad = false;
  n.kind = OpKind::kSoftmaxXent;
  n.inputs = {logits};
  n.label = label;
  n.value = BasicMatrix<T>(1, 1, subsel::softmax_xent(value(logits), label));
  return push(std::move(n));
}

template <class T>
NodeId BasicTape<T>::sum(NodeId x) {
  Node n;
  n.requires_grad = false;
  n.kind = OpKind::kSum;
  n.inputs = {x};
  T acc = 0;
  for (T v : value(x).values()) acc += v;
  n.value = BasicMatrix<T>(1, 1, acc);
  return push(std::move(n));
}

template <class T>
BasicGradients<T> BasicTape<T>::backward(NodeId output) const {
  const auto& out = nodes_.at(output);
  if (out.value.rows() != 1 || out.value.cols() != 1) {
    throw ContractError("backward: output node must be scalar, got " + out.value.shape_string());
  }
  std::vector<std::optional<BasicMatrix<T>>> adj(nodes_.size());
  auto needs = [this](NodeId id) { return nodes_[id].requires_grad; };
  adj[output] = BasicMatrix<T>(1, 1, T(1));

  for (std::size_t idx = output + 1; idx-- > 0;) {
    if (!adj[idx]) continue;
    const Node& n = nodes_[idx];
    const BasicMatrix<T>& g = *adj[idx];
    switch (n.kind) {
      case OpKind::kLeaf:
        break;
      case OpKind::kAffine: {
        const auto& x = value(n.inputs[0]);
        const auto& w = value(n.inputs[1]);
        if (needs(n.inputs[0])) accumulate(adj[n.inputs[0]], affine_grad_input(g, w));
        if (needs(n.inputs[1])) accumulate(adj[n.inputs[1]], affine_grad_weight(x, g));
        if (needs(n.inputs[2])) accumulate(adj[n.inputs[2]], affine_grad_bias(g));
        break;
      }
      case OpKind::kRelu:
        if (!needs(n.inputs[0])) break;
        accumulate(adj[n.inputs[0]], relu_grad(n.value, g));
        break;
      case OpKind::kFeatureMax:
        if (!needs(n.inputs[0])) break;
        accumulate(adj[n.inputs[0]],
                   feature_max_grad(n.witness, value(n.inputs[0]).rows(), g));
        break;
      case OpKind::kSoftmaxXent: {
        auto d = softmax_xent_grad(value(n.inputs[0]), n.label);
        for (T& v : d.values()) v *= g(0, 0);
        accumulate(adj[n.inputs[0]], std::move(d));
        break;
      }
      case OpKind::kSum: {
        const auto& x = value(n.inputs[0]);
        accumulate(adj[n.inputs[0]], BasicMatrix<T>(x.rows(), x.cols(), g(0, 0)));
        break;
      }
    }
  }
  return BasicGradients<T>(this, std::move(adj));
}

template <class T>
BasicMatrix<T> BasicGradients<T>::of(NodeId id) const {
  const auto& slot = adjoints_.at(id);
  if (slot) return *slot;
  const auto& v = tape_->value(id);
  return BasicMatrix<T>(v.rows(), v.cols());
}

template <class T>
BasicMatrix<T> BasicGradients<T>::take(NodeId id) {
  auto& slot = adjoints_.at(id);
  if (slot) {
    BasicMatrix<T> out = std::move(*slot);
    slot.reset();
    return out;
  }
  const auto& v = tape_->value(id);
  return BasicMatrix<T>(v.rows(), v.cols());
}

template class BasicTape<float>;
template class BasicTape<double>;
template class BasicGradients<float>;
template class BasicGradients<double>;

}  // namespace subsel
