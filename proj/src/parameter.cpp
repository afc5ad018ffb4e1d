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

#include "raflow/parameter.hpp"

namespace raflow {
namespace {

std::pair<Index, Index> extents(const std::vector<Index>& shape) {
  if (shape.empty() || shape.size() > 2) throw DimensionError("parameter rank must be 1 or 2");
  for (Index e : shape)
    if (e < 1) throw DimensionError("parameter extents must be positive");
  return {shape[0], shape.size() == 2 ? shape[1] : 1};
}

}  // namespace

Parameter::Parameter(std::string name, std::vector<Index> shape)
    : name_(std::move(name)), shape_(std::move(shape)) {
  const auto [r, c] = extents(shape_);
  var_ = ad::Var(Matrix::Zero(r, c), true);
}

void Parameter::assign(const Matrix& value) {
  require_same_shape(value, this->value(), name_.c_str());
  require_finite(value, name_.c_str());
  mutable_value() = value;
}

void Parameter::fill_uniform(Rng& rng, double bound) {
  Matrix& v = mutable_value();
  for (Index i = 0; i < v.rows(); ++i)
    for (Index j = 0; j < v.cols(); ++j) v(i, j) = bound * (2.0 * rng.uniform01() - 1.0);
}

void zero_grads(const ParameterList& params) {
  for (Parameter* p : params) p->zero_grad();
}

Index parameter_count(const ParameterList& params) {
  Index n = 0;
  for (const Parameter* p : params) n += p->value().size();
  return n;
}

}  // namespace raflow
