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

#ifndef RAFLOW_TESTS_TEST_SUPPORT_HPP
#define RAFLOW_TESTS_TEST_SUPPORT_HPP

#include "raflow/autodiff.hpp"
#include "raflow/parameter.hpp"
#include "raflow/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace raflow::testing {

inline ad::Var leaf(Matrix v) { return ad::Var(std::move(v), true); }

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.standard_normal();
  return m;
}

inline Vector random_vector(Rng& rng, Index n, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.standard_normal();
  return v;
}

/// |a - n| / max(|a|, |n|, floor). The floor keeps round-off in entries that
/// are zero analytically from dominating.
inline double relative_error(double analytic, double numeric, double floor = 1e-5) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Largest relative error between backward() gradients and central
/// differences of `loss` over every entry of the given values.
inline double gradient_check(const std::vector<Matrix*>& values, const std::vector<const Matrix*>& grads,
                             const std::function<ad::Var()>& loss, double step) {
  ad::backward(loss());
  std::vector<Matrix> analytic;
  for (std::size_t k = 0; k < values.size(); ++k)
    analytic.push_back(grads[k]->size() ? *grads[k] : Matrix::Zero(values[k]->rows(), values[k]->cols()));
  double worst = 0.0;
  ad::NoGradGuard no_grad;
  for (std::size_t k = 0; k < values.size(); ++k) {
    Matrix& v = *values[k];
    for (Index i = 0; i < v.size(); ++i) {
      const double original = v.data()[i];
      v.data()[i] = original + step;
      const double up = loss().scalar();
      v.data()[i] = original - step;
      const double down = loss().scalar();
      v.data()[i] = original;
      worst = std::max(worst, relative_error(analytic[k].data()[i], (up - down) / (2.0 * step)));
    }
  }
  return worst;
}

inline double gradient_check(std::vector<ad::Var>& leaves, const std::function<ad::Var()>& loss,
                             double step = 1e-5) {
  std::vector<Matrix*> values;
  std::vector<const Matrix*> grads;
  for (auto& l : leaves) {
    l.node()->grad.resize(0, 0);
    values.push_back(&l.mutable_value());
    grads.push_back(&l.node()->grad);
  }
  return gradient_check(values, grads, loss, step);
}

inline double gradient_check(const ParameterList& params, const std::function<ad::Var()>& loss,
                             double step = 1e-5) {
  std::vector<Matrix*> values;
  std::vector<const Matrix*> grads;
  for (Parameter* p : params) {
    p->zero_grad();
    values.push_back(&p->mutable_value());
    grads.push_back(&p->grad());
  }
  return gradient_check(values, grads, loss, step);
}

/// Central-difference Jacobian of f at x.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                          double step = 1e-6) {
  const Index n = x.size();
  const Index m = f(x).size();
  Matrix j(m, n);
  for (Index c = 0; c < n; ++c) {
    Vector up = x;
    Vector down = x;
    up(c) += step;
    down(c) -= step;
    j.col(c) = (f(up) - f(down)) / (2.0 * step);
  }
  return j;
}

/// ln|det J| via a pivoted LU.
inline double log_abs_det(const Matrix& j) {
  const Eigen::PartialPivLU<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>> lu(j);
  double acc = 0.0;
  const auto& u = lu.matrixLU();
  for (Index i = 0; i < u.rows(); ++i) acc += std::log(std::abs(u(i, i)));
  return acc;
}

}  // namespace raflow::testing

#endif  // RAFLOW_TESTS_TEST_SUPPORT_HPP
