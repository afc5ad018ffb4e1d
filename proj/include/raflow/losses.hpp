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

#ifndef RAFLOW_LOSSES_HPP
#define RAFLOW_LOSSES_HPP

#include "raflow/autodiff.hpp"
#include "raflow/episode.hpp"
#include "raflow/sequence_model.hpp"

#include <vector>

namespace raflow {

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kNormalizationTolerance = 1e-9;

/// sum P (ln P - ln Q) over cells. P cells below 1e-12 contribute nothing
/// and Q is floored at 1e-12. ContractError unless both sum to 1 +- 1e-9.
double kl_discrete(const Matrix& p, const Matrix& q);

/// Differentiable KL(P || Q) where Q is given by its log: p and log_q are
/// 1 x N rows split into blocks of `block` cells, each block a distribution.
/// Returns the sum over blocks.
ad::Var kl_discrete(const Matrix& p, const ad::Var& log_q, Index block);

/// (1/m) sum_k sum_cells |recon - target| for m fields.
double l1_loss(const std::vector<Matrix>& targets, const std::vector<Matrix>& reconstructions);
/// Cells x m columns.
ad::Var l1_loss(const ad::Var& reconstructions, const ad::Var& targets);

inline double composite_loss(double l1, double kl, double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("composite_loss: alpha must be non-negative");
  return l1 + alpha * kl;
}
inline ad::Var composite_loss(const ad::Var& l1, const ad::Var& kl, double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("composite_loss: alpha must be non-negative");
  return l1 + ad::scale(kl, alpha);
}

/// Episodes padded to a common length, observation columns per step.
/// mask(t, b) is 1 when step t -> t+1 exists for episode b.
struct SequenceBatch {
  std::vector<Matrix> steps;  // K x B each
  Matrix mask;                // (T-1) x B
};

SequenceBatch make_sequence_batch(const std::vector<const Episode*>& episodes);

/// Sum over valid transitions of log p(x_{t+1} | x_0..x_t), recorded for
/// differentiation, plus the number of transitions. truncation > 0 cuts
/// the recurrent history every `truncation` steps.
struct BatchLogDensity {
  ad::Var total;
  double count = 0.0;
};
BatchLogDensity batch_log_density(SequenceModel& model, const SequenceBatch& batch,
                                  Index truncation = 0);

/// -mean over all transitions of all episodes.
double nll_loss(SequenceModel& model, const std::vector<Episode>& episodes);

}  // namespace raflow

#endif  // RAFLOW_LOSSES_HPP
