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

#ifndef RAFLOW_DENSE_NET_HPP
#define RAFLOW_DENSE_NET_HPP

#include "raflow/autodiff.hpp"
#include "raflow/parameter.hpp"

#include <string>
#include <vector>

namespace raflow {

/// Fully connected stack: tanh between layers, linear output.
/// widths = {in, hidden..., out}; parameters are "<prefix>.W<i>" / ".b<i>".
class DenseNet {
 public:
  DenseNet(const std::string& prefix, std::vector<Index> widths);

  Index input_dim() const { return widths_.front(); }
  Index output_dim() const { return widths_.back(); }
  const std::vector<Index>& widths() const { return widths_; }

  /// in x B -> out x B.
  ad::Var forward(const ad::Var& x) const;

  /// Weights uniform in +-1/sqrt(fan_in), biases zero. With zero_output the
  /// last layer starts at exactly zero.
  void initialize(Rng& rng, bool zero_output);

  ParameterList parameters();

 private:
  std::vector<Index> widths_;
  std::vector<Parameter> weights_;
  std::vector<Parameter> biases_;
};

}  // namespace raflow

#endif  // RAFLOW_DENSE_NET_HPP
