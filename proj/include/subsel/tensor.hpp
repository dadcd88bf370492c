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

// Dense row-major matrices and the handful of primitives the set classifier
// is built from: affine maps, ReLU, feature-wise max pooling over rows,
// and softmax cross-entropy. Every primitive has a matching adjoint used by
// the tape in tape.hpp.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace subsel {

template <class T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T(0));
  // Throws DimensionError unless data.size() == rows * cols.
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data);

  static BasicMatrix from_rows(std::initializer_list<std::initializer_list<T>> rows);
  static BasicMatrix row_vector(std::span<const T> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  // "rows x cols", used in error messages.
  std::string shape_string() const;

  template <class U>
  BasicMatrix<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicMatrix<U>(rows_, cols_, std::move(out));
  }

  bool operator==(const BasicMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using MatrixF = BasicMatrix<float>;

// Per-feature argmax over the rows of a pooled matrix. Ties resolve to the
// lowest row index.
struct PoolWitness {
  std::vector<std::size_t> argmax;

  bool operator==(const PoolWitness&) const = default;
};

template <class T>
struct Pooled {
  BasicMatrix<T> pooled;  // 1 x h
  PoolWitness witness;
};

// out = x * w + b, with b a 1 x cols(w) row vector.
template <class T>
BasicMatrix<T> affine(const BasicMatrix<T>& x, const BasicMatrix<T>& w, const BasicMatrix<T>& b);

// affine on n raw rows of x into `out` (n x cols(w)), optionally followed by
// relu. Bitwise identical to relu(affine(x, w, b)). No shape checks beyond
// the weight/bias pair.
template <class T>
void affine_into(const T* x, std::size_t n, const BasicMatrix<T>& w, const BasicMatrix<T>& b,
                 bool apply_relu, T* out);

// Subgradient at 0 is 0.
template <class T>
BasicMatrix<T> relu(const BasicMatrix<T>& x);

template <class T>
Pooled<T> feature_max(const BasicMatrix<T>& features);

// -log softmax(logits)[label] via the shifted log-sum-exp form.
template <class T>
T softmax_xent(const BasicMatrix<T>& logits, std::size_t label);

// d loss / d logits = softmax(logits) - onehot(label).
template <class T>
BasicMatrix<T> softmax_xent_grad(const BasicMatrix<T>& logits, std::size_t label);

// Adjoints. Each returns the gradient with respect to one input given the
// upstream gradient `dout`.
template <class T>
BasicMatrix<T> affine_grad_input(const BasicMatrix<T>& dout, const BasicMatrix<T>& w);
template <class T>
BasicMatrix<T> affine_grad_weight(const BasicMatrix<T>& x, const BasicMatrix<T>& dout);
template <class T>
BasicMatrix<T> affine_grad_bias(const BasicMatrix<T>& dout);
template <class T>
BasicMatrix<T> relu_grad(const BasicMatrix<T>& output, const BasicMatrix<T>& dout);
template <class T>
BasicMatrix<T> feature_max_grad(const PoolWitness& witness, std::size_t rows,
                                const BasicMatrix<T>& dout);

// Lowest index wins ties.
template <class T>
std::size_t argmax(std::span<const T> values);

}  // namespace subsel
