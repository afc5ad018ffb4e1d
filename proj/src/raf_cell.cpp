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

#include "raflow/raf_cell.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace raflow {
namespace {

double softplus(double u) { return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double logistic(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kLeakyLinear:
      return "leaky";
    case Activation::kLogistic:
      return "logistic";
    case Activation::kIdentity:
      return "identity";
    case Activation::kSoftLeaky:
      return "softleaky";
  }
  return "unknown";
}

Activation parse_activation(const std::string& name) {
  if (name == "leaky") return Activation::kLeakyLinear;
  if (name == "logistic") return Activation::kLogistic;
  if (name == "identity") return Activation::kIdentity;
  if (name == "softleaky") return Activation::kSoftLeaky;
  throw ConfigError("unknown activation '" + name +
                    "' (expected leaky, softleaky, logistic or identity)");
}

double ActivationSpec::apply(double u) const {
  switch (kind) {
    case Activation::kLeakyLinear:
      return u >= 0 ? u : slope * u;
    case Activation::kLogistic:
      return logistic(u);
    case Activation::kIdentity:
      return u;
    case Activation::kSoftLeaky:
      return slope * u + (1.0 - slope) * softplus(u);
  }
  return u;
}

double ActivationSpec::invert(double z) const {
  if (!std::isfinite(z)) throw DomainError("activation inverse: non-finite input");
  switch (kind) {
    case Activation::kLeakyLinear:
      return z >= 0 ? z : z / slope;
    case Activation::kLogistic: {
      if (z <= 0.0 || z >= 1.0)
        throw DomainError("logistic inverse: " + std::to_string(z) + " outside (0, 1)");
      const double c = std::clamp(z, kLogisticClamp, 1.0 - kLogisticClamp);
      return std::log(c) - std::log1p(-c);
    }
    case Activation::kIdentity:
      return z;
    case Activation::kSoftLeaky: {
      // Convex and increasing, and above the leaky line, so Newton from the
      // leaky inverse decreases monotonically onto the root.
      double u = z >= 0 ? z : z / slope;
      for (int it = 0; it < 100; ++it) {
        const double f = apply(u) - z;
        const double step = f / (slope + (1.0 - slope) * logistic(u));
        u -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(u))) break;
      }
      return u;
    }
  }
  return z;
}

double ActivationSpec::log_derivative(double u) const {
  switch (kind) {
    case Activation::kLeakyLinear:
      return u >= 0 ? 0.0 : std::log(slope);
    case Activation::kLogistic:
      return -softplus(u) - softplus(-u);
    case Activation::kIdentity:
      return 0.0;
    case Activation::kSoftLeaky:
      return std::log(slope + (1.0 - slope) * logistic(u));
  }
  return 0.0;
}

ad::Var triangular_affine(const ad::Var& hidden, const ad::Var& x) {
  const Index k = x.rows();
  const Index batch = x.cols();
  const bool shared = hidden.cols() == 1;
  if (hidden.rows() < required_hidden(k) || !(shared || hidden.cols() == batch))
    throw DimensionError("triangular_affine: hidden " + shape_string(hidden.rows(), hidden.cols()) +
                         " for input " + shape_string(k, batch));
  const Index bias_at = triangular_size(k);
  const Matrix& h = hidden.value();
  const Matrix& xv = x.value();
  Matrix u(k, batch);
  for (Index j = 0; j < batch; ++j) {
    const Index hj = shared ? 0 : j;
    for (Index i = 0; i < k; ++i) {
      const Index row = triangular_size(i);
      double acc = h(bias_at + i, hj) + std::exp(h(row + i, hj)) * xv(i, j);
      for (Index l = 0; l < i; ++l) acc += h(row + l, hj) * xv(l, j);
      u(i, j) = acc;
    }
  }
  return ad::make_result(
      std::move(u), {hidden, x},
      [k, batch, shared, bias_at](ad::Node& out) {
        ad::Node& hn = *out.parents[0];
        ad::Node& xn = *out.parents[1];
        const Matrix& h = hn.value;
        const Matrix& xv = xn.value;
        const Matrix& g = out.grad;
        Matrix* dh = hn.requires_grad ? &hn.grad_buffer() : nullptr;
        Matrix* dx = xn.requires_grad ? &xn.grad_buffer() : nullptr;
        for (Index j = 0; j < batch; ++j) {
          const Index hj = shared ? 0 : j;
          for (Index i = 0; i < k; ++i) {
            const Index row = triangular_size(i);
            const double gi = g(i, j);
            const double w_ii = std::exp(h(row + i, hj));
            if (dh) {
              (*dh)(bias_at + i, hj) += gi;
              (*dh)(row + i, hj) += gi * xv(i, j) * w_ii;
              for (Index l = 0; l < i; ++l) (*dh)(row + l, hj) += gi * xv(l, j);
            }
            if (dx) {
              (*dx)(i, j) += gi * w_ii;
              for (Index l = 0; l < i; ++l) (*dx)(l, j) += gi * h(row + l, hj);
            }
          }
        }
      },
      "triangular_affine");
}

RafCell::RafCell(const std::string& prefix, Index dim, Index hidden_dim, Index condition_dim,
                 ActivationSpec activation)
    : dim_(dim), gru_(prefix, condition_dim, hidden_dim), activation_(activation) {
  if (dim < 1) throw ConfigError("RafCell: dimension must be positive");
  if (hidden_dim < required_hidden(dim))
    throw ConfigError("RafCell: hidden size " + std::to_string(hidden_dim) + " < K(K+1)/2 + K = " +
                      std::to_string(required_hidden(dim)));
  if (activation.kind == Activation::kLeakyLinear && !(activation.slope > 0.0))
    throw ConfigError("RafCell: leaky slope must be positive");
  if (activation.kind == Activation::kSoftLeaky && !(activation.slope > 0.0 && activation.slope <= 1.0))
    throw ConfigError("RafCell: soft-leaky slope must lie in (0, 1]");
}

LayerOutput RafCell::forward(const ad::Var& x, const ad::Var& hidden) const {
  if (x.rows() != dim_) throw DimensionError("RafCell::forward: input rows != K");
  const ad::Var u = triangular_affine(hidden, x);

  std::vector<Index> diag(static_cast<std::size_t>(dim_));
  for (Index i = 0; i < dim_; ++i) diag[static_cast<std::size_t>(i)] = diagonal_offset(i);
  ad::Var logdet = ad::column_sums(ad::select_rows(hidden, diag));
  if (logdet.cols() != x.cols()) logdet = ad::repeat_columns(logdet, x.cols());

  ad::Var z;
  switch (activation_.kind) {
    case Activation::kLeakyLinear: {
      z = ad::leaky_linear(u, activation_.slope);
      const double log_slope = std::log(activation_.slope);
      Matrix jac = u.value().unaryExpr([log_slope](double v) { return v >= 0 ? 0.0 : log_slope; });
      logdet = logdet + ad::constant(jac.colwise().sum());
      break;
    }
    case Activation::kLogistic:
      z = ad::logistic(u);
      logdet = logdet + ad::column_sums(ad::log_logistic_derivative(u));
      break;
    case Activation::kIdentity:
      z = u;
      break;
    case Activation::kSoftLeaky:
      z = ad::soft_leaky(u, activation_.slope);
      logdet = logdet + ad::column_sums(ad::log_soft_leaky_derivative(u, activation_.slope));
      break;
  }
  return {z, logdet};
}

InverseOutput RafCell::inverse(const Matrix& z, const Matrix& hidden) const {
  if (z.rows() != dim_) throw DimensionError("RafCell::inverse: input rows != K");
  if (!(hidden.cols() == 1 || hidden.cols() == z.cols()))
    throw DimensionError("RafCell::inverse: hidden columns must be 1 or match the batch");
  InverseOutput out{Matrix(dim_, z.cols()), RowVector(z.cols())};
  for (Index j = 0; j < z.cols(); ++j) {
    const auto r = raf_inverse(z.col(j), hidden.col(hidden.cols() == 1 ? 0 : j), activation_);
    out.x.col(j) = r.value;
    out.logdet(j) = r.logdet;
  }
  return out;
}

ad::Var RafCell::advance(const ad::Var& hidden, const ad::Var& condition) const {
  return gru_.update(hidden, condition);
}

nlohmann::json RafCell::describe() const {
  return {{"type", "raf"},
          {"dim", dim_},
          {"hidden", gru_.hidden_dim()},
          {"condition_dim", gru_.input_dim()},
          {"activation", to_string(activation_.kind)},
          {"slope", activation_.slope}};
}

}  // namespace raflow
