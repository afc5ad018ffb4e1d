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

#include "raflow/gru.hpp"

#include <cmath>

namespace raflow {
namespace {

std::vector<Index> mat(Index r, Index c) { return {r, c}; }
std::vector<Index> vec(Index n) { return {n}; }

}  // namespace

GruCell::GruCell(const std::string& prefix, Index input_dim, Index hidden_dim)
    : input_dim_(input_dim),
      hidden_dim_(hidden_dim),
      w_y_(prefix + ".W_y", mat(hidden_dim, input_dim)),
      u_y_(prefix + ".U_y", mat(hidden_dim, hidden_dim)),
      b_y_(prefix + ".b_y", vec(hidden_dim)),
      w_r_(prefix + ".W_r", mat(hidden_dim, input_dim)),
      u_r_(prefix + ".U_r", mat(hidden_dim, hidden_dim)),
      b_r_(prefix + ".b_r", vec(hidden_dim)),
      w_h_(prefix + ".W_h", mat(hidden_dim, input_dim)),
      u_h_(prefix + ".U_h", mat(hidden_dim, hidden_dim)),
      b_h_(prefix + ".b_h", vec(hidden_dim)) {}

ad::Var GruCell::update(const ad::Var& h, const ad::Var& x) const {
  if (h.rows() != hidden_dim_ || x.rows() != input_dim_ || h.cols() != x.cols())
    throw DimensionError("gru_update: hidden " + shape_string(h.rows(), h.cols()) + ", input " +
                         shape_string(x.rows(), x.cols()) + " for cell H=" +
                         std::to_string(hidden_dim_) + " I=" + std::to_string(input_dim_));
  using namespace ad;
  const Var y = logistic(add_columnwise(matmul(w_y_.var(), x) + matmul(u_y_.var(), h), b_y_.var()));
  const Var r = logistic(add_columnwise(matmul(w_r_.var(), x) + matmul(u_r_.var(), h), b_r_.var()));
  const Var candidate =
      tanh(add_columnwise(matmul(w_h_.var(), x) + matmul(u_h_.var(), mul(r, h)), b_h_.var()));
  // (1 - y) * h + y * c  ==  h + y * (c - h)
  return h + mul(y, candidate - h);
}

void GruCell::initialize(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim_));
  for (Parameter* p : parameters()) {
    if (p->shape().size() == 2) {
      p->fill_uniform(rng, bound);
    } else {
      p->mutable_value().setZero();
    }
  }
}

ParameterList GruCell::parameters() {
  return {&w_y_, &u_y_, &b_y_, &w_r_, &u_r_, &b_r_, &w_h_, &u_h_, &b_h_};
}

}  // namespace raflow
