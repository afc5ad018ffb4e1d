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

#include "raflow/coupling.hpp"

#include <array>

namespace raflow {
namespace {

Index checked_dim(Index dim, Index split) {
  if (dim < 2) throw ConfigError("CouplingLayer: K must be at least 2");
  if (split < 1 || split >= dim) throw ConfigError("CouplingLayer: split must satisfy 1 <= k < K");
  return dim;
}

}  // namespace

CouplingLayer::CouplingLayer(const std::string& prefix, Index dim, Index split, Index width)
    : dim_(checked_dim(dim, split)),
      split_(split),
      width_(width),
      scale_net_(prefix + ".scale", {split, width, width, dim - split}),
      shift_net_(prefix + ".shift", {split, width, width, dim - split}) {}

ad::Var CouplingLayer::log_scale(const ad::Var& head) const {
  return ad::scale(ad::tanh(ad::scale(scale_net_.forward(head), 1.0 / kScaleBound)), kScaleBound);
}

LayerOutput CouplingLayer::forward(const ad::Var& x, const ad::Var& /*hidden*/) const {
  if (x.rows() != dim_) throw DimensionError("CouplingLayer::forward: input rows != K");
  const ad::Var head = ad::rows(x, 0, split_);
  const ad::Var tail = ad::rows(x, split_, dim_ - split_);
  const ad::Var s = log_scale(head);
  const ad::Var moved = ad::add(ad::mul(tail, ad::exp(s)), shift_net_.forward(head));
  const std::array<ad::Var, 2> parts{head, moved};
  return {ad::vstack(parts), ad::column_sums(s)};
}

InverseOutput CouplingLayer::inverse(const Matrix& z, const Matrix& /*hidden*/) const {
  if (z.rows() != dim_) throw DimensionError("CouplingLayer::inverse: input rows != K");
  ad::NoGradGuard no_grad;
  const ad::Var head = ad::constant(z.topRows(split_));
  const Matrix s = log_scale(head).value();
  const Matrix shift = shift_net_.forward(head).value();
  Matrix x(dim_, z.cols());
  x.topRows(split_) = z.topRows(split_);
  x.bottomRows(dim_ - split_) =
      ((z.bottomRows(dim_ - split_) - shift).array() * (-s.array()).exp()).matrix();
  require_finite(x, "CouplingLayer::inverse");
  return {std::move(x), -s.colwise().sum()};
}

void CouplingLayer::initialize(Rng& rng) {
  scale_net_.initialize(rng, true);
  shift_net_.initialize(rng, true);
}

ParameterList CouplingLayer::parameters() {
  ParameterList out = scale_net_.parameters();
  for (Parameter* p : shift_net_.parameters()) out.push_back(p);
  return out;
}

nlohmann::json CouplingLayer::describe() const {
  return {{"type", "coupling"}, {"dim", dim_}, {"split", split_}, {"width", width_}};
}

}  // namespace raflow
