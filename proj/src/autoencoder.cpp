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

#include "raflow/autoencoder.hpp"

namespace raflow {

DenseAutoencoder::DenseAutoencoder(Index grid)
    : grid_(grid),
      encoder_("encoder", {grid * grid, kHiddenWidth, kLatentDim}),
      decoder_("decoder", {kLatentDim, kHiddenWidth, grid * grid}) {
  if (grid < 1) throw ConfigError("DenseAutoencoder: grid must be positive");
}

ad::Var DenseAutoencoder::encode(const ad::Var& fields) const {
  if (fields.rows() != grid_ * grid_)
    throw DimensionError("encode: expected " + std::to_string(grid_ * grid_) +
                         " cells per field, got " + std::to_string(fields.rows()));
  return encoder_.forward(fields);
}

ad::Var DenseAutoencoder::decode(const ad::Var& latents) const {
  if (latents.rows() != kLatentDim) throw DimensionError("decode: latent must have 32 rows");
  return decoder_.forward(latents);
}

Vector DenseAutoencoder::encode(const Matrix& field) const {
  if (field.rows() != grid_ || field.cols() != grid_)
    throw DimensionError("encode: field " + shape_string(field.rows(), field.cols()) +
                         " vs grid " + shape_string(grid_, grid_));
  ad::NoGradGuard no_grad;
  return encode(ad::constant(flatten_field(field))).value().col(0);
}

Matrix DenseAutoencoder::decode(const Vector& latent) const {
  ad::NoGradGuard no_grad;
  return unflatten_field(decode(ad::constant(latent)).value().col(0), grid_);
}

void DenseAutoencoder::initialize(Rng& rng) {
  encoder_.initialize(rng, false);
  decoder_.initialize(rng, false);
}

ParameterList DenseAutoencoder::parameters() {
  ParameterList out = encoder_.parameters();
  for (Parameter* p : decoder_.parameters()) out.push_back(p);
  return out;
}

nlohmann::json DenseAutoencoder::describe() const {
  // The layer tag leaves room for a convolutional variant under the same format.
  return {{"type", "dense"}, {"grid", grid_}, {"latent", kLatentDim}, {"width", kHiddenWidth}};
}

Vector flatten_field(const Matrix& field) {
  return Eigen::Map<const Vector>(field.data(), field.size());
}

Matrix unflatten_field(const Vector& column, Index grid) {
  if (column.size() != grid * grid) throw DimensionError("unflatten_field: size mismatch");
  return Eigen::Map<const Matrix>(column.data(), grid, grid);
}

}  // namespace raflow
