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

#ifndef RAFLOW_GRU_HPP
#define RAFLOW_GRU_HPP

#include "raflow/autodiff.hpp"
#include "raflow/parameter.hpp"

#include <string>

namespace raflow {

/// Gated recurrent unit:
///   y = sigma(W_y x + U_y h + b_y)
///   r = sigma(W_r x + U_r h + b_r)
///   h' = (1 - y) * h + y * tanh(W_h x + U_h (r * h) + b_h)
class GruCell {
 public:
  GruCell(const std::string& prefix, Index input_dim, Index hidden_dim);

  Index input_dim() const { return input_dim_; }
  Index hidden_dim() const { return hidden_dim_; }

  /// h: H x B, x: I x B -> H x B.
  ad::Var update(const ad::Var& h, const ad::Var& x) const;

  /// Weights uniform in +-1/sqrt(H), biases zero.
  void initialize(Rng& rng);

  /// W_y, U_y, b_y, W_r, U_r, b_r, W_h, U_h, b_h.
  ParameterList parameters();

 private:
  Index input_dim_;
  Index hidden_dim_;
  Parameter w_y_, u_y_, b_y_;
  Parameter w_r_, u_r_, b_r_;
  Parameter w_h_, u_h_, b_h_;
};

}  // namespace raflow

#endif  // RAFLOW_GRU_HPP
