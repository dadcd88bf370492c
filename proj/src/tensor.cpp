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

#include "subsel/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "subsel/errors.hpp"

namespace subsel {

template <class T>
BasicMatrix<T>::BasicMatrix(std::size_t rows, std::size_t cols, T fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

template <class T>
BasicMatrix<T>::BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data has " + std::to_string(data_.size()) +
                         " entries, expected " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

template <class T>
BasicMatrix<T> BasicMatrix<T>::from_rows(std::initializer_list<std::initializer_list<T>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<T> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged initializer for matrix");
    data.insert(data.end(), row.begin(), row.end());
  }
  return BasicMatrix(r, c, std::move(data));
}

template <class T>
BasicMatrix<T> BasicMatrix<T>::row_vector(std::span<const T> values) {
  return BasicMatrix(1, values.size(), std::vector<T>(values.begin(), values.end()));
}

template <class T>
std::string BasicMatrix<T>::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

namespace {

constexpr std::size_t kRowBlock = 4;
constexpr std::size_t kColBlock = 32;

template <class T>
inline void tile(const T* __restrict a, std::size_t inner, const T* __restrict b, std::size_t m,
                 std::size_t j0, const T* __restrict init, T* __restrict out) {
  T acc[kRowBlock][kColBlock];
  for (std::size_t r = 0; r < kRowBlock; ++r) {
    for (std::size_t jj = 0; jj < kColBlock; ++jj) acc[r][jj] = init[j0 + jj];
  }
  for (std::size_t k = 0; k < inner; ++k) {
    const T* bk = b + k * m + j0;
    for (std::size_t r = 0; r < kRowBlock; ++r) {
      const T x = a[r * inner + k];
      for (std::size_t jj = 0; jj < kColBlock; ++jj) acc[r][jj] += x * bk[jj];
    }
  }
  for (std::size_t r = 0; r < kRowBlock; ++r) {
    for (std::size_t jj = 0; jj < kColBlock; ++jj) out[r * m + j0 + jj] = acc[r][jj];
  }
}

// out[i, :] = init + sum_k a[i, k] * b[k, :], k ascending.
//
// Every row goes through the same instruction sequence (a trailing partial
// row block is padded through scratch), and a column's path depends only on
// its index. So an output row depends on its own input row alone, bit for
// bit, whatever the row count or position.
template <class T>
void gemm_rows(const T* a, std::size_t n, std::size_t inner, const T* b, std::size_t m, const T* init,
               T* out) {
  std::vector<T> zeros;
  if (init == nullptr) {
    zeros.assign(m, T(0));
    init = zeros.data();
  }
  auto block = [&](const T* ab, T* ob) {
    std::size_t j0 = 0;
    for (; j0 + kColBlock <= m; j0 += kColBlock) tile(ab, inner, b, m, j0, init, ob);
    for (std::size_t r = 0; r < kRowBlock; ++r) {
      for (std::size_t j = j0; j < m; ++j) {
        T s = init[j];
        for (std::size_t k = 0; k < inner; ++k) s += ab[r * inner + k] * b[k * m + j];
        ob[r * m + j] = s;
      }
    }
  };
  std::size_t i = 0;
  for (; i + kRowBlock <= n; i += kRowBlock) block(a + i * inner, out + i * m);
  if (i < n) {
    std::vector<T> pa(kRowBlock * inner, T(0));
    std::vector<T> po(kRowBlock * m);
    std::copy(a + i * inner, a + n * inner, pa.begin());
    block(pa.data(), po.data());
    std::copy(po.begin(), po.begin() + static_cast<std::ptrdiff_t>((n - i) * m), out + i * m);
  }
}

template <class T>
BasicMatrix<T> transpose(const BasicMatrix<T>& x) {
  BasicMatrix<T> t(x.cols(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) t(j, i) = x(i, j);
  }
  return t;
}

}  // namespace

template <class T>
BasicMatrix<T> affine(const BasicMatrix<T>& x, const BasicMatrix<T>& w, const BasicMatrix<T>& b) {
  if (x.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) {
    throw DimensionError("affine: input " + x.shape_string() + " incompatible with weight " +
                         w.shape_string() + " and bias " + b.shape_string());
  }
  BasicMatrix<T> out(x.rows(), w.cols());
  gemm_rows(x.values().data(), x.rows(), x.cols(), w.values().data(), w.cols(), b.values().data(),
            out.values().data());
  return out;
}

template <class T>
void affine_into(const T* x, std::size_t n, const BasicMatrix<T>& w, const BasicMatrix<T>& b,
                 bool apply_relu, T* out) {
  if (b.rows() != 1 || b.cols() != w.cols()) {
    throw DimensionError("affine: weight " + w.shape_string() + " and bias " + b.shape_string());
  }
  gemm_rows(x, n, w.rows(), w.values().data(), w.cols(), b.values().data(), out);
  if (apply_relu) {
    for (T* p = out; p != out + n * w.cols(); ++p) *p = *p > T(0) ? *p : T(0);
  }
}

template <class T>
BasicMatrix<T> relu(const BasicMatrix<T>& x) {
  BasicMatrix<T> out = x;
  for (T& v : out.values()) v = v > T(0) ? v : T(0);
  return out;
}

template <class T>
Pooled<T> feature_max(const BasicMatrix<T>& features) {
  if (features.rows() == 0) throw EmptySetError("feature_max: empty set (0 rows)");
  const std::size_t h = features.cols();
  Pooled<T> result{BasicMatrix<T>(1, h), PoolWitness{std::vector<std::size_t>(h, 0)}};
  auto pooled = result.pooled.row(0);
  auto first = features.row(0);
  std::copy(first.begin(), first.end(), pooled.begin());
  auto& arg = result.witness.argmax;
  for (std::size_t i = 1; i < features.rows(); ++i) {
    auto r = features.row(i);
    for (std::size_t j = 0; j < h; ++j) {
      if (r[j] > pooled[j]) {
        pooled[j] = r[j];
        arg[j] = i;
      }
    }
  }
  return result;
}

namespace {

template <class T>
void check_label(const BasicMatrix<T>& logits, std::size_t label) {
  if (logits.rows() != 1 || logits.cols() < 2) {
    throw DimensionError("softmax_xent: logits must be 1xC with C >= 2, got " +
                         logits.shape_string());
  }
  if (label >= logits.cols()) {
    throw IndexError("softmax_xent: label " + std::to_string(label) + " out of range [0, " +
                     std::to_string(logits.cols()) + ")");
  }
}

template <class T>
T log_sum_exp(std::span<const T> z, T shift) {
  T acc = 0;
  for (T v : z) acc += std::exp(v - shift);
  return shift + std::log(acc);
}

}  // namespace

template <class T>
T softmax_xent(const BasicMatrix<T>& logits, std::size_t label) {
  check_label(logits, label);
  auto z = logits.row(0);
  const T shift = *std::max_element(z.begin(), z.end());
  return log_sum_exp(z, shift) - z[label];
}

template <class T>
BasicMatrix<T> softmax_xent_grad(const BasicMatrix<T>& logits, std::size_t label) {
  check_label(logits, label);
  auto z = logits.row(0);
  const T shift = *std::max_element(z.begin(), z.end());
  const T lse = log_sum_exp(z, shift);
  BasicMatrix<T> g(1, z.size());
  for (std::size_t j = 0; j < z.size(); ++j) g(0, j) = std::exp(z[j] - lse);
  g(0, label) -= T(1);
  return g;
}

template <class T>
BasicMatrix<T> affine_grad_input(const BasicMatrix<T>& dout, const BasicMatrix<T>& w) {
  const BasicMatrix<T> wt = transpose(w);
  BasicMatrix<T> dx(dout.rows(), w.rows());
  gemm_rows(dout.values().data(), dout.rows(), dout.cols(), wt.values().data(), wt.cols(),
            static_cast<const T*>(nullptr), dx.values().data());
  return dx;
}

template <class T>
BasicMatrix<T> affine_grad_weight(const BasicMatrix<T>& x, const BasicMatrix<T>& dout) {
  const BasicMatrix<T> xt = transpose(x);
  BasicMatrix<T> dw(x.cols(), dout.cols());
  gemm_rows(xt.values().data(), xt.rows(), xt.cols(), dout.values().data(), dout.cols(),
            static_cast<const T*>(nullptr), dw.values().data());
  return dw;
}

template <class T>
BasicMatrix<T> affine_grad_bias(const BasicMatrix<T>& dout) {
  BasicMatrix<T> db(1, dout.cols());
  auto acc = db.row(0);
  for (std::size_t i = 0; i < dout.rows(); ++i) {
    auto g = dout.row(i);
    for (std::size_t j = 0; j < g.size(); ++j) acc[j] += g[j];
  }
  return db;
}

template <class T>
BasicMatrix<T> relu_grad(const BasicMatrix<T>& output, const BasicMatrix<T>& dout) {
  BasicMatrix<T> dx = dout;
  auto o = output.values();
  auto d = dx.values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(o[i] > T(0))) d[i] = T(0);
  }
  return dx;
}

template <class T>
BasicMatrix<T> feature_max_grad(const PoolWitness& witness, std::size_t rows,
                                const BasicMatrix<T>& dout) {
  const std::size_t h = witness.argmax.size();
  BasicMatrix<T> dx(rows, h);
  for (std::size_t j = 0; j < h; ++j) dx(witness.argmax[j], j) += dout(0, j);
  return dx;
}

template <class T>
std::size_t argmax(std::span<const T> values) {
  if (values.empty()) throw EmptySetError("argmax of empty sequence");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

#define SUBSEL_INSTANTIATE(T)                                                                    \
  template class BasicMatrix<T>;                                                                 \
  template BasicMatrix<T> affine(const BasicMatrix<T>&, const BasicMatrix<T>&,                   \
                                 const BasicMatrix<T>&);                                         \
  template void affine_into(const T*, std::size_t, const BasicMatrix<T>&, const BasicMatrix<T>&,     \
                            bool, T*);                                                           \
  template BasicMatrix<T> relu(const BasicMatrix<T>&);                                           \
  template Pooled<T> feature_max(const BasicMatrix<T>&);                                         \
  template T softmax_xent(const BasicMatrix<T>&, std::size_t);                                   \
  template BasicMatrix<T> softmax_xent_grad(const BasicMatrix<T>&, std::size_t);                 \
  template BasicMatrix<T> affine_grad_input(const BasicMatrix<T>&, const BasicMatrix<T>&);       \
  template BasicMatrix<T> affine_grad_weight(const BasicMatrix<T>&, const BasicMatrix<T>&);      \
  template BasicMatrix<T> affine_grad_bias(const BasicMatrix<T>&);                               \
  template BasicMatrix<T> relu_grad(const BasicMatrix<T>&, const BasicMatrix<T>&);               \
  template BasicMatrix<T> feature_max_grad(const PoolWitness&, std::size_t, const BasicMatrix<T>&); \
  template std::size_t argmax(std::span<const T>);

SUBSEL_INSTANTIATE(float)
SUBSEL_INSTANTIATE(double)

#undef SUBSEL_INSTANTIATE

}  // namespace subsel
