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

#include "raflow/sequence_model.hpp"

#include <cmath>

namespace raflow {

Standardizer Standardizer::fit(const Matrix& samples) {
  if (samples.rows() < 2) throw ContractError("Standardizer::fit: need at least two samples");
  Standardizer s;
  s.shift = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - s.shift.transpose();
  const RowVector var = centered.array().square().colwise().sum() / static_cast<double>(samples.rows());
  s.scale = std::sqrt(var.maxCoeff());
  if (!(s.scale > 0.0)) s.scale = 1.0;
  return s;
}

ad::Var Standardizer::apply(const ad::Var& x) const {
  if (x.rows() != shift.size()) throw DimensionError("Standardizer: dimension mismatch");
  if (scale == 1.0 && shift.isZero(0.0)) return x;
  const ad::Var centered = ad::add_columnwise(x, ad::constant(-shift));
  return scale == 1.0 ? centered : ad::scale(centered, 1.0 / scale);
}

Matrix Standardizer::restore(const Matrix& standardized) const {
  return ((standardized * scale).colwise() + shift).eval();
}

double Standardizer::logdet() const {
  return -static_cast<double>(shift.size()) * std::log(scale);
}

void SequenceModel::set_standardizer(Standardizer s) {
  if (s.shift.size() != dim()) throw DimensionError("set_standardizer: dimension mismatch");
  if (!(s.scale > 0.0) || !std::isfinite(s.scale))
    throw ConfigError("set_standardizer: scale must be positive");
  require_finite(s.shift, "set_standardizer");
  standardizer_ = std::move(s);
}

std::vector<double> step_log_probs(SequenceModel& model, const Matrix& samples) {
  if (samples.rows() < 2) throw ContractError("step_log_probs: episode needs at least two samples");
  if (samples.cols() != model.dim())
    throw DimensionError("step_log_probs: episode dimension " + std::to_string(samples.cols()) +
                         " vs model " + std::to_string(model.dim()));
  ad::NoGradGuard no_grad;
  model.reset(1);
  model.observe(ad::constant(samples.row(0).transpose()));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(samples.rows() - 1));
  for (Index t = 0; t + 1 < samples.rows(); ++t) {
    const ad::Var next = ad::constant(samples.row(t + 1).transpose());
    out.push_back(model.log_prob(next).scalar());
    model.observe(next);
  }
  return out;
}

}  // namespace raflow
