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

#ifndef RAFLOW_COUPLING_HPP
#define RAFLOW_COUPLING_HPP

#include "raflow/dense_net.hpp"
#include "raflow/flow_layer.hpp"

namespace raflow {

/// Affine coupling: the first k coordinates pass through, the rest become
///   z_{k:K} = x_{k:K} * exp(g(x_{0:k})) + m(x_{0:k}),   logdet = sum g.
/// The log-scale is bounded to [-5, 5] as g = 5 tanh(raw / 5).
class CouplingLayer final : public FlowLayer {
 public:
  static constexpr double kScaleBound = 5.0;

  CouplingLayer(const std::string& prefix, Index dim, Index split, Index width = 32);

  std::string kind() const override { return "coupling"; }
  Index dim() const override { return dim_; }
  Index split() const { return split_; }

  LayerOutput forward(const ad::Var& x, const ad::Var& hidden) const override;
  InverseOutput inverse(const Matrix& z, const Matrix& hidden) const override;

  /// Hidden layers uniform, output layers zero: the layer starts as identity.
  void initialize(Rng& rng);
  DenseNet& scale_net() { return scale_net_; }
  DenseNet& shift_net() { return shift_net_; }

  ParameterList parameters() override;
  nlohmann::json describe() const override;

 private:
  ad::Var log_scale(const ad::Var& head) const;

  Index dim_;
  Index split_;
  Index width_;
  DenseNet scale_net_;
  DenseNet shift_net_;
};

}  // namespace raflow

#endif  // RAFLOW_COUPLING_HPP
