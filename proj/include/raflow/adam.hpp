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

#ifndef RAFLOW_ADAM_HPP
#define RAFLOW_ADAM_HPP

#include "raflow/parameter.hpp"

#include <cstdint>
#include <vector>

namespace raflow {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;

  /// Zero moments shaped like the parameters.
  static AdamState for_parameters(const ParameterList& params);
};

/// Bias-corrected Adam update of every parameter, then zeroes the gradients.
void adam_step(const ParameterList& params, AdamState& state, double lr);

/// Global L2 norm of all gradients.
double gradient_norm(const ParameterList& params);

/// Rescales all gradients so their global norm is at most max_norm.
/// Returns the norm before clipping. max_norm <= 0 disables clipping.
double clip_gradient_norm(const ParameterList& params, double max_norm);

}  // namespace raflow

#endif  // RAFLOW_ADAM_HPP
