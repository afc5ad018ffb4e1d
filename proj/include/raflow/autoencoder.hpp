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

#ifndef RAFLOW_AUTOENCODER_HPP
#define RAFLOW_AUTOENCODER_HPP

#include "raflow/dense_net.hpp"

#include <json.hpp>

namespace raflow {

/// Dense field vectorizer: G*G -> 64 -> 32 and back, tanh between layers.
/// Fields enter as G x G matrices or, batched, as (G*G) x B columns holding
/// the row-major flattening of each field.
class DenseAutoencoder {
 public:
  static constexpr Index kLatentDim = 32;
  static constexpr Index kHiddenWidth = 64;

  explicit DenseAutoencoder(Index grid);

  Index grid() const { return grid_; }
  Index latent_dim() const { return kLatentDim; }

  ad::Var encode(const ad::Var& fields) const;
  ad::Var decode(const ad::Var& latents) const;

  Vector encode(const Matrix& field) const;
  Matrix decode(const Vector& latent) const;

  void initialize(Rng& rng);
  ParameterList parameters();
  nlohmann::json describe() const;

 private:
  Index grid_;
  DenseNet encoder_;
  DenseNet decoder_;
};

/// Row-major flattening of a G x G field into a column.
Vector flatten_field(const Matrix& field);
Matrix unflatten_field(const Vector& column, Index grid);

}  // namespace raflow

#endif  // RAFLOW_AUTOENCODER_HPP
