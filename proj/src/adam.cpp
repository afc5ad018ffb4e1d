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

#include "raflow/adam.hpp"

#include <cmath>

namespace raflow {

AdamState AdamState::for_parameters(const ParameterList& params) {
  AdamState s;
  for (const Parameter* p : params) {
    s.m.push_back(Matrix::Zero(p->value().rows(), p->value().cols()));
    s.v.push_back(Matrix::Zero(p->value().rows(), p->value().cols()));
  }
  return s;
}

void adam_step(const ParameterList& params, AdamState& state, double lr) {
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw ContractError("adam_step: optimizer state does not match the parameter list");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    Matrix& g = p.mutable_grad();
    require_same_shape(g, state.m[i], "adam_step");
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g.cwiseProduct(g);
    if (lr != 0.0) {
      p.mutable_value().array() -=
          lr * (state.m[i].array() / c1) / ((state.v[i].array() / c2).sqrt() + state.epsilon);
    }
    g.setZero();
  }
}

double gradient_norm(const ParameterList& params) {
  double sq = 0.0;
  for (const Parameter* p : params) sq += p->grad().squaredNorm();
  return std::sqrt(sq);
}

double clip_gradient_norm(const ParameterList& params, double max_norm) {
  const double norm = gradient_norm(params);
  if (!std::isfinite(norm)) throw NumericError("clip_gradient_norm: non-finite gradient norm");
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Parameter* p : params) p->mutable_grad() *= factor;
  }
  return norm;
}

}  // namespace raflow
