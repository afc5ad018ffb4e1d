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

#include "raflow/rnn_gaussian.hpp"

#include "raflow/gaussian.hpp"

#include <cmath>
#include <numbers>

namespace raflow {

RnnGaussian::RnnGaussian(Index dim, Index hidden)
    : dim_(dim),
      gru_("rnn", dim, hidden),
      head_w_("head.W", {dim + 1, hidden}),
      head_b_("head.b", {dim + 1}) {
  if (dim < 1 || hidden < 1) throw ConfigError("RnnGaussian: dimensions must be positive");
  standardizer_ = Standardizer::identity(dim);
  reset(1);
}

void RnnGaussian::initialize(Rng& rng) {
  gru_.initialize(rng);
  head_w_.fill_uniform(rng, 1.0 / std::sqrt(static_cast<double>(gru_.hidden_dim())));
  head_b_.mutable_value().setZero();
  reset(1);
}

void RnnGaussian::reset(Index batch) {
  if (batch < 1) throw ContractError("RnnGaussian::reset: batch must be positive");
  hidden_ = ad::constant(Matrix::Zero(gru_.hidden_dim(), batch));
}

void RnnGaussian::observe(const ad::Var& observation) {
  hidden_ = gru_.update(hidden_, standardizer_.apply(observation));
}

ad::Var RnnGaussian::head() const {
  return ad::add_columnwise(ad::matmul(head_w_.var(), hidden_), head_b_.var());
}

ad::Var RnnGaussian::log_prob(const ad::Var& x) const {
  if (x.rows() != dim_) throw DimensionError("RnnGaussian::log_prob: input rows != K");
  const ad::Var out = head();
  const ad::Var mu = ad::rows(out, 0, dim_);
  const ad::Var log_tau = ad::rows(out, dim_, 1);
  const ad::Var residual = standardizer_.apply(x) - mu;
  const ad::Var sq = ad::column_sums(ad::mul(residual, residual));
  const double k = static_cast<double>(dim_);
  // -K/2 ln(2 pi) - K/2 log tau - |r|^2 / (2 tau)
  const ad::Var lp = ad::scale(log_tau, -0.5 * k) -
                     ad::scale(ad::mul(sq, ad::exp(ad::scale(log_tau, -1.0))), 0.5);
  return ad::add_scalar(lp, -k * kHalfLog2Pi + standardizer_.logdet());
}

Matrix RnnGaussian::sample(Rng& rng, Index count) const {
  if (hidden_.cols() != 1 && hidden_.cols() != count)
    throw ContractError("RnnGaussian::sample: state batch must be 1 or match the draw count");
  ad::NoGradGuard no_grad;
  const Matrix out = head().value();
  Matrix draws = standard_normal_matrix(rng, dim_, count);
  for (Index j = 0; j < count; ++j) {
    const Index c = out.cols() == 1 ? 0 : j;
    const double sd = std::exp(0.5 * out(dim_, c));
    draws.col(j) = out.col(c).head(dim_) + sd * draws.col(j);
  }
  return standardizer_.restore(draws);
}

void RnnGaussian::detach_state() { hidden_ = ad::detach(hidden_); }

ParameterList RnnGaussian::parameters() {
  ParameterList out = gru_.parameters();
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

nlohmann::json RnnGaussian::describe() const {
  std::vector<double> shift(standardizer_.shift.data(),
                            standardizer_.shift.data() + standardizer_.shift.size());
  return {{"model", "rnn_gaussian"},
          {"dim", dim_},
          {"hidden", gru_.hidden_dim()},
          {"shift", shift},
          {"scale", standardizer_.scale}};
}

double isotropic_gaussian_log_prob(const Vector& x, const Vector& mu, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw NumericError("isotropic Gaussian: invalid tau");
  const double k = static_cast<double>(x.size());
  return -0.5 * k * std::log(2.0 * std::numbers::pi * tau) - (x - mu).squaredNorm() / (2.0 * tau);
}

}  // namespace raflow
