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

#include "raflow/flow_layer.hpp"

#include <algorithm>
#include <numeric>

namespace raflow {

PermutationLayer::PermutationLayer(std::vector<Index> perm) : perm_(std::move(perm)) {
  std::vector<Index> sorted = perm_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != static_cast<Index>(i))
      throw ConfigError("PermutationLayer: not a permutation of 0..K-1");
  if (perm_.empty()) throw ConfigError("PermutationLayer: empty permutation");
}

PermutationLayer PermutationLayer::reversal(Index dim) {
  std::vector<Index> perm(static_cast<std::size_t>(dim));
  std::iota(perm.rbegin(), perm.rend(), Index{0});
  return PermutationLayer(std::move(perm));
}

LayerOutput PermutationLayer::forward(const ad::Var& x, const ad::Var& /*hidden*/) const {
  if (x.rows() != dim()) throw DimensionError("PermutationLayer::forward: input rows != K");
  return {ad::select_rows(x, perm_), ad::constant(Matrix::Zero(1, x.cols()))};
}

InverseOutput PermutationLayer::inverse(const Matrix& z, const Matrix& /*hidden*/) const {
  if (z.rows() != dim()) throw DimensionError("PermutationLayer::inverse: input rows != K");
  Matrix x(z.rows(), z.cols());
  for (std::size_t i = 0; i < perm_.size(); ++i) x.row(perm_[i]) = z.row(static_cast<Index>(i));
  return {std::move(x), RowVector::Zero(z.cols())};
}

nlohmann::json PermutationLayer::describe() const {
  return {{"type", "permutation"}, {"perm", perm_}};
}

}  // namespace raflow
