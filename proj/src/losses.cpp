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

#include "raflow/losses.hpp"

#include <cmath>

namespace raflow {
namespace {

void require_distribution(const Matrix& m, const char* what) {
  require_finite(m, what);
  if ((m.array() < 0.0).any()) throw ContractError(std::string(what) + ": negative probability");
  if (std::abs(m.sum() - 1.0) > kNormalizationTolerance)
    throw ContractError(std::string(what) + ": does not sum to 1 (sum = " +
                        std::to_string(m.sum()) + ")");
}

}  // namespace

double kl_discrete(const Matrix& p, const Matrix& q) {
  require_same_shape(p, q, "kl_discrete");
  require_distribution(p, "kl_discrete P");
  require_distribution(q, "kl_discrete Q");
  double kl = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.cols(); ++j) {
      const double pij = p(i, j);
      if (pij < kProbabilityFloor) continue;
      kl += pij * (std::log(pij) - std::log(std::max(q(i, j), kProbabilityFloor)));
    }
  }
  return kl;
}

ad::Var kl_discrete(const Matrix& p, const ad::Var& log_q, Index block) {
  require_same_shape(p, log_q.value(), "kl_discrete");
  if (p.rows() != 1 || block < 1 || p.cols() % block != 0)
    throw DimensionError("kl_discrete: expected a 1 x N row of whole blocks");
  for (Index s = 0; s < p.cols(); s += block)
    require_distribution(p.middleCols(s, block), "kl_discrete P");
  Matrix weight = p;
  double entropy_term = 0.0;
  for (Index j = 0; j < p.cols(); ++j) {
    if (p(0, j) < kProbabilityFloor) {
      weight(0, j) = 0.0;
    } else {
      entropy_term += p(0, j) * std::log(p(0, j));
    }
  }
  const ad::Var floored = ad::clamp_min(log_q, std::log(kProbabilityFloor));
  return ad::add_scalar(ad::scale(ad::sum(ad::mul(ad::constant(weight), floored)), -1.0),
                        entropy_term);
}

double l1_loss(const std::vector<Matrix>& targets, const std::vector<Matrix>& reconstructions) {
  if (targets.size() != reconstructions.size())
    throw DimensionError("l1_loss: batch sizes differ");
  if (targets.empty()) throw ContractError("l1_loss: empty batch");
  double total = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    require_same_shape(targets[k], reconstructions[k], "l1_loss");
    total += (reconstructions[k] - targets[k]).cwiseAbs().sum();
  }
  return total / static_cast<double>(targets.size());
}

ad::Var l1_loss(const ad::Var& reconstructions, const ad::Var& targets) {
  return ad::scale(ad::sum(ad::abs(reconstructions - targets)),
                   1.0 / static_cast<double>(targets.cols()));
}

SequenceBatch make_sequence_batch(const std::vector<const Episode*>& episodes) {
  if (episodes.empty()) throw ContractError("make_sequence_batch: no episodes");
  const Index k = episodes.front()->dim();
  Index longest = 0;
  for (const Episode* e : episodes) {
    if (e->dim() != k) throw DimensionError("make_sequence_batch: episodes differ in dimension");
    if (e->length() < 2) throw ContractError("make_sequence_batch: episode shorter than 2 steps");
    longest = std::max(longest, e->length());
  }
  const Index b = static_cast<Index>(episodes.size());
  SequenceBatch batch;
  batch.steps.assign(static_cast<std::size_t>(longest), Matrix(k, b));
  batch.mask = Matrix::Zero(longest - 1, b);
  for (Index j = 0; j < b; ++j) {
    const Episode& e = *episodes[static_cast<std::size_t>(j)];
    for (Index t = 0; t < longest; ++t) {
      // Past the end the last observation is repeated and masked out.
      const Index src = std::min(t, e.length() - 1);
      batch.steps[static_cast<std::size_t>(t)].col(j) = e.samples.row(src).transpose();
      if (t + 1 < longest && t + 1 < e.length()) batch.mask(t, j) = 1.0;
    }
  }
  return batch;
}

BatchLogDensity batch_log_density(SequenceModel& model, const SequenceBatch& batch,
                                  Index truncation) {
  const Index b = batch.mask.cols();
  model.reset(b);
  model.observe(ad::constant(batch.steps.front()));
  std::vector<ad::Var> terms;
  terms.reserve(batch.steps.size());
  for (std::size_t t = 0; t + 1 < batch.steps.size(); ++t) {
    if (truncation > 0 && t > 0 && t % static_cast<std::size_t>(truncation) == 0)
      model.detach_state();
    const ad::Var next = ad::constant(batch.steps[t + 1]);
    const ad::Var lp = model.log_prob(next);
    terms.push_back(ad::mul(lp, ad::constant(batch.mask.row(static_cast<Index>(t)))));
    if (t + 2 < batch.steps.size()) model.observe(next);
  }
  return {ad::sum(ad::vstack(terms)), batch.mask.sum()};
}

double nll_loss(SequenceModel& model, const std::vector<Episode>& episodes) {
  if (episodes.empty()) throw ContractError("nll_loss: no episodes");
  ad::NoGradGuard no_grad;
  std::vector<const Episode*> ptrs;
  for (const auto& e : episodes) ptrs.push_back(&e);
  const BatchLogDensity d = batch_log_density(model, make_sequence_batch(ptrs));
  return -d.total.scalar() / d.count;
}

}  // namespace raflow
