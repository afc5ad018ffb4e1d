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

#ifndef RAFLOW_PARAMETER_HPP
#define RAFLOW_PARAMETER_HPP

#include "raflow/autodiff.hpp"
#include "raflow/random.hpp"

#include <string>
#include <vector>

namespace raflow {

/// A named trainable array. Rank-1 parameters are stored as n x 1 matrices.
class Parameter {
 public:
  Parameter(std::string name, std::vector<Index> shape);
  Parameter(const Parameter&) = delete;
  Parameter& operator=(const Parameter&) = delete;
  Parameter(Parameter&&) = default;
  Parameter& operator=(Parameter&&) = default;

  const std::string& name() const { return name_; }
  const std::vector<Index>& shape() const { return shape_; }

  const ad::Var& var() const { return var_; }
  const Matrix& value() const { return var_.value(); }
  Matrix& mutable_value() { return var_.mutable_value(); }
  const Matrix& grad() const { return var_.node()->grad; }
  Matrix& mutable_grad() { return var_.node()->grad_buffer(); }
  void zero_grad() { mutable_grad().setZero(); }

  /// Replaces the value; DimensionError if the extents differ.
  void assign(const Matrix& value);
  void fill_uniform(Rng& rng, double bound);

 private:
  std::string name_;
  std::vector<Index> shape_;
  ad::Var var_;
};

using ParameterList = std::vector<Parameter*>;

void zero_grads(const ParameterList& params);
Index parameter_count(const ParameterList& params);

}  // namespace raflow

#endif  // RAFLOW_PARAMETER_HPP
