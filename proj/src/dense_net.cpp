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

#include "raflow/dense_net.hpp"

#include <cmath>

namespace raflow {

DenseNet::DenseNet(const std::string& prefix, std::vector<Index> widths)
    : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ConfigError("DenseNet needs at least input and output widths");
  weights_.reserve(widths_.size() - 1);
  biases_.reserve(widths_.size() - 1);
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i) {
    const std::string idx = std::to_string(i);
    weights_.emplace_back(prefix + ".W" + idx, std::vector<Index>{widths_[i + 1], widths_[i]});
    biases_.emplace_back(prefix + ".b" + idx, std::vector<Index>{widths_[i + 1]});
  }
}

ad::Var DenseNet::forward(const ad::Var& x) const {
  if (x.rows() != input_dim())
    throw DimensionError("DenseNet: input has " + std::to_string(x.rows()) + " rows, expected " +
                         std::to_string(input_dim()));
  ad::Var h = x;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    h = ad::add_columnwise(ad::matmul(weights_[i].var(), h), biases_[i].var());
    if (i + 1 < weights_.size()) h = ad::tanh(h);
  }
  return h;
}

void DenseNet::initialize(Rng& rng, bool zero_output) {
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const bool last = i + 1 == weights_.size();
    if (last && zero_output) {
      weights_[i].mutable_value().setZero();
    } else {
      weights_[i].fill_uniform(rng, 1.0 / std::sqrt(static_cast<double>(widths_[i])));
    }
    biases_[i].mutable_value().setZero();
  }
}

ParameterList DenseNet::parameters() {
  ParameterList out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

}  // namespace raflow
