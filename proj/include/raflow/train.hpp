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

#ifndef RAFLOW_TRAIN_HPP
#define RAFLOW_TRAIN_HPP

#include "raflow/adam.hpp"
#include "raflow/episode.hpp"
#include "raflow/fluid_model.hpp"
#include "raflow/sequence_model.hpp"
#include "raflow/train_config.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace raflow {

struct EpochRecord {
  Index epoch = 0;  // 1-based; pre-training epochs are logged with their own numbering
  double loss = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  bool aborted = false;
  std::string diagnostic;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// ContractError unless every episode belongs to the configured experiment
/// and shares one dimensionality.
void check_dataset(const TrainConfig& config, const std::vector<Episode>& data);

/// Builds the configured sequence model, fits its standardizer to the data
/// (when enabled) and initializes parameters from the config seed.
std::unique_ptr<SequenceModel> build_sequence_model(const TrainConfig& config,
                                                    const std::vector<Episode>& data);

/// Minibatch NLL training with per-episode state resets. On a non-finite
/// loss or gradient the parameters are restored to the last completed epoch
/// and the result is marked aborted.
TrainResult train_sequence_model(SequenceModel& model, const std::vector<Episode>& data,
                                 const TrainConfig& config, const EpochCallback& on_epoch = {});

std::unique_ptr<FluidModel> build_fluid_model(const TrainConfig& config,
                                              const std::vector<Episode>& data);

/// Autoencoder pre-training on L1 for pretrain_epochs, then joint training on
/// L1 + kl_weight * KL for epochs. Logged epochs run 1..pretrain+epochs.
TrainResult train_fluid_model(FluidModel& model, const std::vector<Episode>& data,
                              const TrainConfig& config, const EpochCallback& on_epoch = {});

struct DensityReport {
  double mean = 0.0;
  double std = 0.0;                  // population std over episodes
  std::vector<double> per_episode;   // average step log density, input order
};

/// Per-episode average of log p(x_{t+1} | x_0..x_t); state reset per episode.
DensityReport evaluate_avg_log_density(SequenceModel& model, const std::vector<Episode>& episodes);

struct KlReport {
  double mean = 0.0;                 // over episodes and steps
  std::vector<double> per_step;      // mean over episodes
  std::vector<double> per_episode;   // mean over steps
};

KlReport evaluate_fluid_kl(FluidModel& model, const std::vector<Episode>& episodes);

/// Mean and population std computed from sorted values.
std::pair<double, double> sorted_mean_std(std::vector<double> values);

}  // namespace raflow

#endif  // RAFLOW_TRAIN_HPP
