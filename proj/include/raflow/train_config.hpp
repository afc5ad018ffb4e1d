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

#ifndef RAFLOW_TRAIN_CONFIG_HPP
#define RAFLOW_TRAIN_CONFIG_HPP

#include "raflow/flow_graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <istream>
#include <string>

namespace raflow {

enum class ExperimentId { kHierarchical, kMaze, kFluid };
enum class ModelKind { kRaf, kRealNvp, kRnnGaussian };

std::string to_string(ExperimentId e);
std::string to_string(ModelKind m);
ExperimentId parse_experiment(const std::string& name);
ModelKind parse_model_kind(const std::string& name);

/// Data dimensionality (K) of each experiment's observations.
Index experiment_dim(ExperimentId e, Index grid = 16);

struct TrainConfig {
  ExperimentId experiment = ExperimentId::kHierarchical;
  ModelKind model = ModelKind::kRaf;
  double learning_rate = 1e-3;
  Index epochs = 100;
  Index batch_episodes = 10;  // 0 = whole dataset per step
  Index layers = 5;
  Index hidden = 16;
  double kl_weight = 1.0;
  std::uint64_t seed = 0;
  Activation activation = Activation::kSoftLeaky;
  double leaky_slope = 0.6;
  PermutationKind permutation = PermutationKind::kReverse;
  Index coupling_width = 32;
  double clip_norm = 10.0;
  Index truncation = 0;  // 0 = full episode
  Index pretrain_epochs = 500;
  bool standardize = true;

  /// Defaults for an experiment / model pair.
  static TrainConfig defaults(ExperimentId experiment, ModelKind model);

  /// ConfigError naming the offending field.
  void validate() const;

  /// Flat "key = value" lines; '#' starts a comment. Keys missing from the
  /// text keep the defaults of the experiment / model named in it. Unknown
  /// keys and malformed values are ConfigErrors.
  static TrainConfig parse(std::istream& in);
  static TrainConfig parse_string(const std::string& text);

  std::string to_text() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

}  // namespace raflow

#endif  // RAFLOW_TRAIN_CONFIG_HPP
