// Copyright 2026 The raflow Authors. All Rights Reserved.
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

#include "raflow/autodiff.hpp"
#include "raflow/parameter.hpp"
#include "raflow/random.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace raflow;
using raflow::testing::gradient_check;
using raflow::testing::leaf;
using raflow::testing::random_matrix;

TEST_CASE("matmul examples") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Matrix ones(2, 1);
  ones << 1, 1;
  Matrix x(2, 1);
  x << 3, 4;
  CHECK(ad::matmul(ad::constant(Matrix::Identity(2, 2)), ad::constant(x)).value() == x);
  CHECK(ad::matmul(ad::constant(a), ad::constant(Matrix::Zero(2, 1))).value().isZero(0.0));
  const Matrix r = ad::matmul(ad::constant(a), ad::constant(ones)).value();
  CHECK(r(0, 0) == 3.0);
  CHECK(r(1, 0) == 7.0);
  CHECK_THROWS_AS(ad::matmul(ad::constant(a), ad::constant(Matrix::Zero(3, 1))), DimensionError);
}

TEST_CASE("elementwise examples") {
  CHECK(ad::logistic(ad::constant_scalar(0.0)).scalar() == 0.5);
  CHECK(ad::tanh(ad::constant_scalar(0.0)).scalar() == 0.0);
  Matrix a(1, 2), b(1, 2);
  a << 2, 3;
  b << 4, 5;
  const Matrix m = ad::mul(ad::constant(a), ad::constant(b)).value();
  CHECK(m(0, 0) == 8.0);
  CHECK(m(0, 1) == 15.0);
  CHECK_THROWS_AS(ad::log(ad::constant_scalar(0.0)), DomainError);
  CHECK_THROWS_AS(ad::log(ad::constant_scalar(-1.0)), DomainError);
  CHECK_THROWS_AS(ad::add(ad::constant(a), ad::constant(Matrix::Zero(2, 1))), DimensionError);
  CHECK_THROWS_AS(ad::mul(ad::constant(a), ad::constant(Matrix::Zero(1, 3))), DimensionError);
}

TEST_CASE("non-finite values are rejected, naming the op") {
  CHECK_THROWS_AS(ad::constant_scalar(std::nan("")), NumericError);
  try {
    ad::exp(ad::constant_scalar(1000.0));
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("exp") != std::string::npos);
  }
}

TEST_CASE("backward examples") {
  ad::Var p = leaf(Matrix::Ones(3, 1) * 0.3);
  ad::backward(ad::sum(p));
  CHECK(p.grad() == Matrix::Ones(3, 1));

  Matrix v(2, 1);
  v << 1, 2;
  ad::Var q = leaf(v);
  ad::backward(ad::sum(ad::mul(q, q)));
  CHECK(q.grad()(0, 0) == 2.0);
  CHECK(q.grad()(1, 0) == 4.0);

  // Accumulates across calls.
  ad::backward(ad::sum(q));
  CHECK(q.grad()(0, 0) == 3.0);

  CHECK_THROWS_AS(ad::backward(q), ContractError);
}

TEST_CASE("NoGradGuard records nothing") {
  ad::Var p = leaf(Matrix::Ones(2, 1));
  ad::Var out;
  {
    ad::NoGradGuard guard;
    CHECK_FALSE(ad::grad_enabled());
    out = ad::sum(ad::tanh(p));
  }
  CHECK(ad::grad_enabled());
  CHECK_FALSE(out.requires_grad());
}

TEST_CASE("five-parameter composite matches central differences") {
  Rng rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ad::Var> leaves{leaf(random_matrix(rng, 3, 2)), leaf(random_matrix(rng, 2, 4)),
                                leaf(random_matrix(rng, 3, 4)), leaf(random_matrix(rng, 4, 1)),
                                leaf(random_matrix(rng, 3, 1))};
    auto loss = [&] {
      const ad::Var h = ad::logistic(ad::matmul(leaves[0], leaves[1]) + leaves[2]);
      const ad::Var y = ad::tanh(ad::matmul(h, leaves[3]));
      return ad::sum(ad::mul(y, leaves[4]));
    };
    CHECK(gradient_check(leaves, loss) < 1e-4);
  }
}

// Random graphs of depth <= 6 over every elementwise op and matmul.
TEST_CASE("random computation graphs match central differences") {
  Rng rng(12, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 3;
    std::vector<ad::Var> leaves{leaf(random_matrix(rng, n, n, 0.7)), leaf(random_matrix(rng, n, n, 0.7)),
                                leaf(random_matrix(rng, n, n, 0.7))};
    std::vector<int> ops;
    const int depth = 1 + static_cast<int>(rng.uniform_index(6));
    for (int d = 0; d < depth; ++d) ops.push_back(static_cast<int>(rng.uniform_index(8)));
    auto loss = [&] {
      ad::Var x = leaves[0];
      for (std::size_t d = 0; d < ops.size(); ++d) {
        const ad::Var& other = leaves[1 + d % 2];
        switch (ops[d]) {
          case 0: x = ad::add(x, other); break;
          case 1: x = ad::sub(x, other); break;
          case 2: x = ad::mul(x, other); break;
          case 3: x = ad::logistic(x); break;
          case 4: x = ad::tanh(x); break;
          case 5: x = ad::exp(ad::scale(ad::tanh(x), 0.5)); break;
          case 6: x = ad::log(ad::add_scalar(ad::exp(x), 0.5)); break;
          default: x = ad::matmul(ad::scale(x, 0.5), other); break;
        }
      }
      return ad::sum(x);
    };
    worst = std::max(worst, gradient_check(leaves, loss));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("structural ops match central differences") {
  Rng rng(13, 0);
  std::vector<ad::Var> leaves{leaf(random_matrix(rng, 4, 3)), leaf(random_matrix(rng, 4, 1)),
                              leaf(random_matrix(rng, 1, 6))};
  const std::vector<Index> pick{2, 0, 3};
  auto loss = [&] {
    const ad::Var a = ad::add_columnwise(leaves[0], leaves[1]);
    const ad::Var b = ad::repeat_columns(ad::select_rows(a, pick), 2);
    const std::vector<ad::Var> parts{ad::rows(b, 0, 1), leaves[2]};
    const ad::Var c = ad::vstack(parts);
    const ad::Var d = ad::log_softmax_blocks(ad::rows(ad::column_sums(ad::abs(c)), 0, 1), 3);
    const ad::Var e = ad::leaky_linear(ad::clamp_min(ad::hstack(parts), -0.5), 0.2);
    return ad::add(ad::sum(ad::mul(d, leaves[2])), ad::mean(ad::soft_leaky(e, 0.3))) +
           ad::sum(ad::log_soft_leaky_derivative(leaves[2], 0.1)) +
           ad::sum(ad::log_logistic_derivative(leaves[2]));
  };
  CHECK(gradient_check(leaves, loss) < 1e-4);
}

TEST_CASE("log_softmax_blocks normalizes each block") {
  Matrix r(1, 6);
  r << 1, 2, 3, -1, 0, 800;
  const Matrix out = ad::log_softmax_blocks(ad::constant(r), 3).value();
  CHECK(std::abs(out.leftCols(3).array().exp().sum() - 1.0) < 1e-15);
  CHECK(std::abs(out.rightCols(3).array().exp().sum() - 1.0) < 1e-15);
}

TEST_CASE("parameters") {
  Parameter p("w", {2, 3});
  CHECK(p.value().rows() == 2);
  CHECK(p.grad().rows() == 2);
  CHECK(p.grad().cols() == 3);
  p.mutable_grad().setOnes();
  p.zero_grad();
  CHECK(p.grad().isZero(0.0));
  Parameter v("b", {4});
  CHECK(v.value().rows() == 4);
  CHECK(v.value().cols() == 1);
  CHECK_THROWS_AS(p.assign(Matrix::Zero(3, 2)), DimensionError);
  CHECK(parameter_count({&p, &v}) == 10);
}

TEST_CASE("rng determinism and streams") {
  Rng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t x = a.next_u64();
    REQUIRE(x == b.next_u64());
    differs_c |= x != c.next_u64();
    differs_d |= x != d.next_u64();
  }
  CHECK(differs_c);
  CHECK(differs_d);
  Rng n1(1, 1), n2(1, 1);
  for (int i = 0; i < 1000; ++i) REQUIRE(n1.standard_normal() == n2.standard_normal());
}

TEST_CASE("rng draws") {
  Rng rng(5, 0);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(rng.bernoulli(0.0) == 0);
    REQUIRE(rng.bernoulli(1.0) == 1);
  }
  CHECK_THROWS_AS(rng.bernoulli(-0.1), DomainError);
  CHECK_THROWS_AS(rng.bernoulli(1.5), DomainError);

  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 100000.0 - 0.5) < 0.005);

  // Normal moments; standard errors 1/sqrt(n) and sqrt(2/n).
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.standard_normal();
    m1 += z;
    m2 += z * z;
  }
  CHECK(std::abs(m1 / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));

  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[rng.uniform_index(5)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}
