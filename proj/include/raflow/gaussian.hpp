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

#ifndef RAFLOW_GAUSSIAN_HPP
#define RAFLOW_GAUSSIAN_HPP

#include "raflow/autodiff.hpp"
#include "raflow/random.hpp"

#include <cmath>
#include <numbers>

namespace raflow {

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

/// Standard-normal log density of a single K-vector.
template <typename Derived>
typename Derived::Scalar gaussian_log_prob(const Eigen::MatrixBase<Derived>& z) {
  require_finite(z, "gaussian_log_prob");
  using Scalar = typename Derived::Scalar;
  return Scalar(-0.5) * z.squaredNorm() - Scalar(kHalfLog2Pi) * Scalar(z.size());
}

/// Column-wise standard-normal log density: K x B -> 1 x B.
inline ad::Var gaussian_log_prob(const ad::Var& z) {
  const double k = static_cast<double>(z.rows());
  return ad::add_scalar(ad::scale(ad::column_sums(ad::mul(z, z)), -0.5), -kHalfLog2Pi * k);
}

/// K x count matrix of independent standard-normal draws, column by column.
inline Matrix standard_normal_matrix(Rng& rng, Index rows, Index cols) {
  Matrix z(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) z(i, j) = rng.standard_normal();
  return z;
}

}  // namespace raflow

#endif  // RAFLOW_GAUSSIAN_HPP
