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

#ifndef RAFLOW_RNN_GAUSSIAN_HPP
#define RAFLOW_RNN_GAUSSIAN_HPP

#include "raflow/gru.hpp"
#include "raflow/sequence_model.hpp"

namespace raflow {

/// Recurrent Gaussian predictor: a GRU over the history and a dense head
/// h -> (mu, log tau), with x_{t+1} ~ N(mu, tau I).
class RnnGaussian final : public SequenceModel {
 public:
  RnnGaussian(Index dim, Index hidden);

  std::string name() const override { return "rnn_gaussian"; }
  Index dim() const override { return dim_; }
  Index hidden_dim() const { return gru_.hidden_dim(); }

  void initialize(Rng& rng) override;
  void reset(Index batch) override;
  void observe(const ad::Var& observation) override;
  ad::Var log_prob(const ad::Var& x) const override;
  Matrix sample(Rng& rng, Index count) const override;
  void detach_state() override;

  /// (K+1) x B head output in standardized units: rows 0..K-1 are mu,
  /// row K is log tau.
  ad::Var head() const;
  const ad::Var& hidden() const { return hidden_; }

  GruCell& gru() { return gru_; }
  Parameter& head_weight() { return head_w_; }
  Parameter& head_bias() { return head_b_; }

  ParameterList parameters() override;
  nlohmann::json describe() const override;

 private:
  Index dim_;
  GruCell gru_;
  Parameter head_w_;
  Parameter head_b_;
  ad::Var hidden_;
};

/// -K/2 ln(2 pi tau) - |x - mu|^2 / (2 tau).
double isotropic_gaussian_log_prob(const Vector& x, const Vector& mu, double tau);

}  // namespace raflow

#endif  // RAFLOW_RNN_GAUSSIAN_HPP
