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

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "subsel/errors.hpp"
#include "subsel/tape.hpp"
#include "subsel/tensor.hpp"

using namespace subsel;

TEST_CASE("matrix construction checks the data length") {
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
  const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6);
  CHECK(m.shape_string() == "2x3");
  CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), DimensionError);
}

TEST_CASE("affine on hand examples") {
  CHECK(affine(Matrix::from_rows({{1, 2}}), Matrix::from_rows({{1, 0}, {0, 1}}), Matrix::from_rows({{0, 0}})) ==
        Matrix::from_rows({{1, 2}}));
  CHECK(affine(Matrix::from_rows({{1, 1}}), Matrix::from_rows({{2}, {3}}), Matrix::from_rows({{1}})) ==
        Matrix::from_rows({{6}}));
}

TEST_CASE("affine shape mismatch names both shapes") {
  const Matrix x(2, 3), w(4, 2), b(1, 2);
  try {
    (void)affine(x, w, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("4x2") != std::string::npos);
  }
  CHECK_THROWS_AS(affine(Matrix(2, 4), Matrix(4, 2), Matrix(1, 3)), DimensionError);
}

TEST_CASE("affine matches the triple-loop oracle") {
  std::mt19937_64 rng(11);
  // 3x4 times 4x2 from the examples, plus shapes that hit every blocking
  // remainder of the kernel.
  const std::vector<std::array<std::size_t, 3>> shapes{{3, 4, 2}, {1, 1, 1}, {5, 3, 33}, {9, 64, 64},
                                                       {7, 17, 70}, {4, 128, 5}, {13, 2, 31}};
  for (const auto& [n, a, b] : shapes) {
    const Matrix x = oracle::random_matrix(n, a, rng);
    const Matrix w = oracle::random_matrix(a, b, rng);
    const Matrix bias = oracle::random_matrix(1, b, rng);
    const Matrix got = affine(x, w, bias);
    const Matrix want = oracle::naive_affine(x, w, bias);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got.values()[i] - want.values()[i]) <= 1e-12);
  }
}

TEST_CASE("affine rows do not depend on their neighbours") {
  std::mt19937_64 rng(5);
  const Matrix x = oracle::random_matrix(11, 7, rng);
  const Matrix w = oracle::random_matrix(7, 40, rng);
  const Matrix b = oracle::random_matrix(1, 40, rng);
  const Matrix full = affine(x, w, b);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const Matrix one = affine(Matrix::row_vector(x.row(i)), w, b);
    for (std::size_t j = 0; j < w.cols(); ++j) CHECK(one(0, j) == full(i, j));
  }
}

TEST_CASE("affine_into with relu equals relu of affine bitwise") {
  std::mt19937_64 rng(8);
  const Matrix x = oracle::random_matrix(6, 5, rng);
  const Matrix w = oracle::random_matrix(5, 35, rng);
  const Matrix b = oracle::random_matrix(1, 35, rng);
  Matrix out(6, 35);
  affine_into(x.values().data(), 6, w, b, true, out.values().data());
  CHECK(out == relu(affine(x, w, b)));
}

TEST_CASE("relu has subgradient zero at zero") {
  const Matrix x = Matrix::from_rows({{-1, 0, 2}});
  CHECK(relu(x) == Matrix::from_rows({{0, 0, 2}}));
  CHECK(relu_grad(relu(x), Matrix::from_rows({{1, 1, 1}})) == Matrix::from_rows({{0, 0, 1}}));
}

TEST_CASE("feature_max pools columns with the lowest-index witness") {
  const auto p = feature_max(Matrix::from_rows({{1, 5}, {3, 2}}));
  CHECK(p.pooled == Matrix::from_rows({{3, 5}}));
  CHECK(p.witness.argmax == std::vector<std::size_t>{1, 0});

  const auto same = feature_max(Matrix::from_rows({{2, 7}, {2, 7}, {2, 7}}));
  CHECK(same.pooled == Matrix::from_rows({{2, 7}}));
  CHECK(same.witness.argmax == std::vector<std::size_t>{0, 0});

  CHECK_THROWS_AS(feature_max(Matrix(0, 3)), EmptySetError);
}

TEST_CASE("feature_max adjoint routes to witnesses and conserves mass") {
  std::mt19937_64 rng(3);
  const Matrix f = oracle::random_matrix(9, 6, rng);
  const auto p = feature_max(f);
  const Matrix up = oracle::random_matrix(1, 6, rng);
  const Matrix g = feature_max_grad(p.witness, f.rows(), up);
  for (std::size_t j = 0; j < 6; ++j) {
    double sum = 0;
    for (std::size_t i = 0; i < 9; ++i) {
      if (i != p.witness.argmax[j]) CHECK(g(i, j) == 0);
      sum += g(i, j);
    }
    CHECK(sum == up(0, j));
  }
}

TEST_CASE("softmax cross-entropy values and gradient") {
  CHECK(softmax_xent(Matrix::from_rows({{0, 0}}), 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const double big = softmax_xent(Matrix::from_rows({{1000, 0}}), 0);
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx(0.0));
  CHECK(softmax_xent_grad(Matrix::from_rows({{0, 0}}), 0) == Matrix::from_rows({{-0.5, 0.5}}));
  CHECK_THROWS_AS(softmax_xent(Matrix::from_rows({{0, 0}}), 2), IndexError);
  CHECK_THROWS_AS(softmax_xent(Matrix::from_rows({{0}}), 0), DimensionError);
}

TEST_CASE("argmax takes the lowest index on ties") {
  const std::vector<double> a{0.1, 0.9, 0.3}, b{0.5, 0.5};
  CHECK(argmax<double>(a) == 1);
  CHECK(argmax<double>(b) == 0);
}

TEST_CASE("tape: identity chain has gradient ones") {
  Tape t;
  const Matrix x = Matrix::from_rows({{1, -2}, {3, 4}});
  const NodeId in = t.leaf(x);
  const NodeId out = t.sum(in);
  auto g = t.backward(out);
  CHECK(g.of(in) == Matrix::from_rows({{1, 1}, {1, 1}}));
}

TEST_CASE("tape: non-scalar output is a contract violation") {
  Tape t;
  const NodeId in = t.leaf(Matrix(2, 2, 1.0));
  CHECK_THROWS_AS(t.backward(in), ContractError);
}

TEST_CASE("tape: affine relu sum matches finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const Matrix x = oracle::random_matrix(4, 3, rng);
    const Matrix w = oracle::random_matrix(3, 5, rng);
    const Matrix b = oracle::random_matrix(1, 5, rng);
    auto f = [&](const Matrix& xx) {
      double s = 0;
      const Matrix r = relu(affine(xx, w, b));
      for (double v : r.values()) s += v;
      return s;
    };
    Tape t;
    const NodeId xi = t.leaf(x), wi = t.leaf(w), bi = t.leaf(b);
    const NodeId out = t.sum(t.relu(t.affine(xi, wi, bi)));
    auto g = t.backward(out);
    CHECK(oracle::relative_error(g.of(xi), oracle::finite_difference(f, x)) <= 1e-6);
    auto fw = [&](const Matrix& ww) {
      double s = 0;
      const Matrix r = relu(affine(x, ww, b));
      for (double v : r.values()) s += v;
      return s;
    };
    CHECK(oracle::relative_error(g.of(wi), oracle::finite_difference(fw, w)) <= 1e-6);
    auto fb = [&](const Matrix& bb) {
      double s = 0;
      const Matrix r = relu(affine(x, w, bb));
      for (double v : r.values()) s += v;
      return s;
    };
    CHECK(oracle::relative_error(g.of(bi), oracle::finite_difference(fb, b)) <= 1e-6);
  }
}

TEST_CASE("tape: feature_max chain is nonzero only on witness rows") {
  std::mt19937_64 rng(2);
  Tape t;
  const NodeId x = t.leaf(oracle::random_matrix(7, 4, rng));
  const NodeId pooled = t.feature_max(x);
  auto g = t.backward(t.sum(pooled));
  const auto& w = t.witness(pooled).argmax;
  const Matrix gx = g.of(x);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(gx(i, j) == (i == w[j] ? 1.0 : 0.0));
  }
}

TEST_CASE("tape: constant leaves receive no adjoint") {
  std::mt19937_64 rng(4);
  Tape t;
  const NodeId x = t.leaf(oracle::random_matrix(3, 2, rng));
  const NodeId w = t.leaf(oracle::random_matrix(2, 2, rng), false);
  const NodeId b = t.leaf(Matrix(1, 2), false);
  auto g = t.backward(t.sum(t.affine(x, w, b)));
  CHECK(g.reached(x));
  CHECK_FALSE(g.reached(w));
  CHECK(g.of(w) == Matrix(2, 2));
}

TEST_CASE("tape: replaying forward reproduces recorded values bitwise") {
  std::mt19937_64 rng(6);
  const Matrix x = oracle::random_matrix(5, 3, rng), w = oracle::random_matrix(3, 4, rng),
               b = oracle::random_matrix(1, 4, rng);
  Tape t;
  const NodeId h = t.relu(t.affine(t.leaf(x), t.leaf(w), t.leaf(b)));
  CHECK(t.value(h) == relu(affine(x, w, b)));
  const NodeId p = t.feature_max(h);
  CHECK(t.value(p) == feature_max(relu(affine(x, w, b))).pooled);
}

TEST_CASE("primitives are deterministic") {
  std::mt19937_64 rng(9);
  const Matrix x = oracle::random_matrix(10, 8, rng), w = oracle::random_matrix(8, 8, rng),
               b = oracle::random_matrix(1, 8, rng);
  CHECK(affine(x, w, b) == affine(x, w, b));
  CHECK(affine_grad_input(x, w) == affine_grad_input(x, w));
}

TEST_CASE("float instantiation agrees with double to single precision") {
  std::mt19937_64 rng(10);
  const Matrix x = oracle::random_matrix(6, 5, rng), w = oracle::random_matrix(5, 40, rng),
               b = oracle::random_matrix(1, 40, rng);
  const Matrix want = affine(x, w, b);
  const Matrix got = affine(x.cast<float>(), w.cast<float>(), b.cast<float>()).cast<double>();
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got.values()[i] - want.values()[i]) <= 1e-5);
}
