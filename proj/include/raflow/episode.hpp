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

#ifndef RAFLOW_EPISODE_HPP
#define RAFLOW_EPISODE_HPP

#include "raflow/core.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace raflow {

/// One realization of a process: observations in time order, one per row.
struct Episode {
  std::string process;
  std::int64_t id = 0;
  std::uint64_t seed = 0;
  nlohmann::json labels = nlohmann::json::object();
  Matrix samples;  // T x K

  Index length() const { return samples.rows(); }
  Index dim() const { return samples.cols(); }
};

/// Stacks the samples of every episode (rows).
Matrix stack_samples(const std::vector<Episode>& episodes);

}  // namespace raflow

#endif  // RAFLOW_EPISODE_HPP
