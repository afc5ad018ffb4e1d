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

#ifndef RAFLOW_FLUID_MODEL_HPP
#define RAFLOW_FLUID_MODEL_HPP

#include "raflow/autoencoder.hpp"
#include "raflow/episode.hpp"
#include "raflow/flow_graph.hpp"

#include <memory>
#include <vector>

namespace raflow {

/// Autoencoder plus a K = 2 RAF graph whose GRUs consume the latent codes of
/// past fields. The flow is a density over the plane; the predicted field
/// distribution is that density evaluated at cell centres and normalized
/// over the grid.
class FluidModel {
 public:
  static constexpr double kExtent = 2.0;  // cell centres span [-2, 2]^2

  FluidModel(Index grid, Index layers, Index hidden, ActivationSpec activation,
             PermutationKind permutation = PermutationKind::kReverse);
  FluidModel(Index grid, std::unique_ptr<FlowGraph> flow);

  Index grid() const { return autoencoder_.grid(); }
  DenseAutoencoder& autoencoder() { return autoencoder_; }
  const DenseAutoencoder& autoencoder() const { return autoencoder_; }
  FlowGraph& flow() { return *flow_; }
  const FlowGraph& flow() const { return *flow_; }

  /// 2 x G^2 plane coordinates of the cell centres, row-major over cells.
  const Matrix& cell_points() const { return points_; }

  void initialize(Rng& rng);
  ParameterList parameters();
  nlohmann::json describe() const;
  static std::unique_ptr<FluidModel> from_descriptor(const nlohmann::json& d);

 private:
  DenseAutoencoder autoencoder_;
  std::unique_ptr<FlowGraph> flow_;
  Matrix points_;
};

/// Per-step KL plus the terms of the composite loss over a batch.
struct FluidLossTerms {
  ad::Var l1;                        // mean over all fields of summed |error|
  ad::Var kl;                        // mean over episodes and steps
  std::vector<double> kl_per_step;   // index t: KL of the prediction of field t + 1
  Index episodes = 0;
};

/// Episodes hold T >= 2 flattened G x G fields. Field t + 1 is predicted
/// from the encodings of fields 0..t; the target distribution uses the mass
/// of field 0 as the normalizer.
FluidLossTerms fluid_losses(FluidModel& model, const std::vector<const Episode*>& episodes);

/// Predicted G x G distribution of the next field given the fields so far
/// (rows of `context`, flattened).
Matrix predict_distribution(FluidModel& model, const Matrix& context);

}  // namespace raflow

#endif  // RAFLOW_FLUID_MODEL_HPP
