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

// Reverse-mode differentiation over the primitive set in tensor.hpp.
//
// A tape records one evaluation. Nodes are appended in execution order, so
// every input id precedes its consumer and backward() can sweep the node
// list in reverse. Values are computed by the same kernels as the untraced
// path, so a traced forward is bit-identical to a plain one.

#include <cstddef>
#include <optional>
#include <vector>

#include "subsel/tensor.hpp"

namespace subsel {

using NodeId = std::size_t;

enum class OpKind { kLeaf, kAffine, kRelu, kFeatureMax, kSoftmaxXent, kSum };

template <class T>
class BasicGradients;

template <class T>
class BasicTape {
 public:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::vector<NodeId> inputs;
    BasicMatrix<T> value;
    PoolWitness witness;       // kFeatureMax only
    std::size_t label = 0;     // kSoftmaxXent only
    bool requires_grad = true;
  };

  // Leaves with requires_grad = false are constants: backward() does not
  // compute adjoints flowing into them.
  NodeId leaf(BasicMatrix<T> value, bool requires_grad = true);
  NodeId affine(NodeId x, NodeId w, NodeId b);
  NodeId relu(NodeId x);
  NodeId feature_max(NodeId x);
  NodeId softmax_xent(NodeId logits, std::size_t label);
  // Sum of all entries, as a 1x1 matrix.
  NodeId sum(NodeId x);

  const BasicMatrix<T>& value(NodeId id) const { return nodes_.at(id).value; }
  const PoolWitness& witness(NodeId id) const { return nodes_.at(id).witness; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

  // Reverse accumulation from a 1x1 output node. Throws ContractError for a
  // non-scalar output.
  BasicGradients<T> backward(NodeId output) const;

 private:
  NodeId push(Node node);

  std::vector<Node> nodes_;
};

// Adjoints of every node reached from the output; nodes the output does not
// depend on report a zero matrix of their own shape.
template <class T>
class BasicGradients {
 public:
  BasicGradients(const BasicTape<T>* tape, std::vector<std::optional<BasicMatrix<T>>> adjoints)
      : tape_(tape), adjoints_(std::move(adjoints)) {}

  BasicMatrix<T> of(NodeId id) const;
  bool reached(NodeId id) const { return adjoints_.at(id).has_value(); }

  // Moves the adjoint out; zero matrix if unreached.
  BasicMatrix<T> take(NodeId id);

 private:
  const BasicTape<T>* tape_;
  std::vector<std::optional<BasicMatrix<T>>> adjoints_;
};

using Tape = BasicTape<double>;
using Gradients = BasicGradients<double>;

}  // namespace subsel
