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

// Recurrent autoregressive flow cell.
//
// A GRU summarizes the observations x_0..x_t into h_t. The first K(K+1)/2
// entries of h_t, read row by row, form a lower-triangular matrix W whose
// diagonal is exp-mapped; the next K entries form a bias b. The transform of
// the next observation is
//
//   z = act(W x_{t+1} + b),   ln|det dz/dx| = sum_i ln act'(u_i) + sum_i ln W_ii
//
// and since ln W_ii is the raw hidden entry, the second sum is read straight
// off h_t. The inverse is a forward substitution.

#ifndef RAFLOW_RAF_CELL_HPP
#define RAFLOW_RAF_CELL_HPP

#include "raflow/flow_layer.hpp"
#include "raflow/gru.hpp"

#include <cmath>
#include <string>

namespace raflow {

/// kSoftLeaky is slope * u + (1 - slope) * softplus(u): the leaky-linear
/// shape with a smooth knee.
enum class Activation { kLeakyLinear, kLogistic, kIdentity, kSoftLeaky };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

/// Invertible scalar nonlinearity applied after the triangular affine map.
struct ActivationSpec {
  Activation kind = Activation::kLeakyLinear;
  double slope = 0.1;  // leaky / soft-leaky negative-side slope

  static constexpr double kLogisticClamp = 1e-7;

  double apply(double u) const;
  /// DomainError if z is outside the range of the activation. Logistic
  /// inputs are clamped to [1e-7, 1 - 1e-7] before the logit.
  double invert(double z) const;
  double log_derivative(double u) const;
};

constexpr Index triangular_size(Index k) { return k * (k + 1) / 2; }
constexpr Index required_hidden(Index k) { return triangular_size(k) + k; }
/// Position of the exp-mapped diagonal entry W_ii within the hidden state.
constexpr Index diagonal_offset(Index i) { return triangular_size(i) + i; }

template <typename Scalar>
struct TriangularAffine {
  MatrixX<Scalar> weight;  // lower triangular, positive diagonal
  VectorX<Scalar> bias;
};

template <typename Derived>
TriangularAffine<typename Derived::Scalar> split_hidden(const Eigen::MatrixBase<Derived>& h,
                                                        Index k) {
  using Scalar = typename Derived::Scalar;
  if (k < 1 || h.size() < required_hidden(k))
    throw ConfigError("split_hidden: hidden size " + std::to_string(h.size()) +
                      " cannot supply a " + std::to_string(k) + "x" + std::to_string(k) +
                      " triangular weight and bias (need " + std::to_string(required_hidden(k)) +
                      ")");
  TriangularAffine<Scalar> out{MatrixX<Scalar>::Zero(k, k), VectorX<Scalar>(k)};
  Index at = 0;
  for (Index i = 0; i < k; ++i) {
    for (Index l = 0; l < i; ++l) out.weight(i, l) = h(at++);
    out.weight(i, i) = std::exp(h(at++));
  }
  for (Index i = 0; i < k; ++i) out.bias(i) = h(at++);
  return out;
}

struct RafTransform {
  Vector value;
  double logdet;
};

/// z = act(W x + b) for a single observation and hidden vector.
template <typename DerivedX, typename DerivedH>
RafTransform raf_forward(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedH>& h,
                         const ActivationSpec& act) {
  const Index k = x.size();
  const auto affine = split_hidden(h, k);
  const Vector u = affine.weight * x + affine.bias;
  RafTransform out{Vector(k), 0.0};
  for (Index i = 0; i < k; ++i) {
    out.value(i) = act.apply(u(i));
    out.logdet += act.log_derivative(u(i)) + h(diagonal_offset(i));
  }
  require_finite(out.value, "raf_forward");
  if (!std::isfinite(out.logdet)) throw NumericError("raf_forward: non-finite logdet");
  return out;
}

/// x = W^{-1}(act^{-1}(z) - b); logdet is that of the inverse map.
template <typename DerivedZ, typename DerivedH>
RafTransform raf_inverse(const Eigen::MatrixBase<DerivedZ>& z, const Eigen::MatrixBase<DerivedH>& h,
                         const ActivationSpec& act) {
  const Index k = z.size();
  const auto affine = split_hidden(h, k);
  Vector u(k);
  double logdet = 0.0;
  for (Index i = 0; i < k; ++i) {
    u(i) = act.invert(z(i));
    logdet -= act.log_derivative(u(i)) + h(diagonal_offset(i));
  }
  Vector x = affine.weight.template triangularView<Eigen::Lower>().solve(u - affine.bias);
  require_finite(x, "raf_inverse");
  if (!std::isfinite(logdet)) throw NumericError("raf_inverse: non-finite logdet");
  return {std::move(x), logdet};
}

/// u = W(h) x + b(h) column by column; differentiable in h and x. A single
/// hidden column is shared by every column of x.
ad::Var triangular_affine(const ad::Var& hidden, const ad::Var& x);

class RafCell final : public FlowLayer {
 public:
  /// condition_dim is the width of what the GRU consumes; it equals dim when
  /// the cell is conditioned on past observations themselves.
  RafCell(const std::string& prefix, Index dim, Index hidden_dim, Index condition_dim,
          ActivationSpec activation);

  std::string kind() const override { return "raf"; }
  Index dim() const override { return dim_; }
  Index hidden_dim() const override { return gru_.hidden_dim(); }
  Index condition_dim() const override { return gru_.input_dim(); }
  const ActivationSpec& activation() const { return activation_; }

  LayerOutput forward(const ad::Var& x, const ad::Var& hidden) const override;
  InverseOutput inverse(const Matrix& z, const Matrix& hidden) const override;
  ad::Var advance(const ad::Var& hidden, const ad::Var& condition) const override;

  ParameterList parameters() override { return gru_.parameters(); }
  GruCell& gru() { return gru_; }
  nlohmann::json describe() const override;

 private:
  Index dim_;
  GruCell gru_;
  ActivationSpec activation_;
};

}  // namespace raflow

#endif  // RAFLOW_RAF_CELL_HPP
