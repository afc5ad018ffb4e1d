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

#ifndef RAFLOW_FLOW_LAYER_HPP
#define RAFLOW_FLOW_LAYER_HPP

#include "raflow/autodiff.hpp"
#include "raflow/parameter.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace raflow {

/// Batched layer output. Columns are independent samples; logdet is 1 x B.
struct LayerOutput {
  ad::Var z;
  ad::Var logdet;
};

struct InverseOutput {
  Matrix x;
  RowVector logdet;
};

/// A bijection on R^K, data side (x) to latent side (z).
///
/// Recurrent layers carry a hidden state that the owning graph threads
/// through `advance`; stateless layers ignore the hidden argument. A hidden
/// state with a single column is broadcast over all sample columns.
class FlowLayer {
 public:
  virtual ~FlowLayer() = default;

  virtual std::string kind() const = 0;
  virtual Index dim() const = 0;

  virtual LayerOutput forward(const ad::Var& x, const ad::Var& hidden) const = 0;
  /// Plain evaluation; the returned logdet is that of the inverse map.
  virtual InverseOutput inverse(const Matrix& z, const Matrix& hidden) const = 0;

  virtual ParameterList parameters() { return {}; }

  virtual Index hidden_dim() const { return 0; }
  virtual Index condition_dim() const { return 0; }
  virtual ad::Var advance(const ad::Var& hidden, const ad::Var& /*condition*/) const {
    return hidden;
  }

  virtual nlohmann::json describe() const = 0;
};

/// Fixed reordering z_i = x_perm[i]. Volume preserving.
class PermutationLayer final : public FlowLayer {
 public:
  explicit PermutationLayer(std::vector<Index> perm);
  static PermutationLayer reversal(Index dim);

  std::string kind() const override { return "permutation"; }
  Index dim() const override { return static_cast<Index>(perm_.size()); }
  const std::vector<Index>& permutation() const { return perm_; }

  LayerOutput forward(const ad::Var& x, const ad::Var& hidden) const override;
  InverseOutput inverse(const Matrix& z, const Matrix& hidden) const override;
  nlohmann::json describe() const override;

 private:
  std::vector<Index> perm_;
};

}  // namespace raflow

#endif  // RAFLOW_FLOW_LAYER_HPP
