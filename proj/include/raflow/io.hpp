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

#ifndef RAFLOW_IO_HPP
#define RAFLOW_IO_HPP

#include "raflow/episode.hpp"
#include "raflow/fluid_model.hpp"
#include "raflow/parameter.hpp"
#include "raflow/sequence_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace raflow {

inline constexpr char kCheckpointMagic[] = "RAFCKPT1";

struct NamedArray {
  std::string name;
  std::vector<Index> shape;  // rank 1 or 2
  Matrix values;             // rank-1 arrays are stored n x 1
};

struct Checkpoint {
  nlohmann::json descriptor;
  std::vector<NamedArray> entries;
};

/// Layout: magic, u64 descriptor length, descriptor JSON, u64 entry count,
/// then per entry u64 name length, name, u64 rank, u64 extents, and the
/// values as little-endian f64 in row-major order.
void write_checkpoint(std::ostream& out, const nlohmann::json& descriptor,
                      const ParameterList& params);
/// IoError on bad magic, truncation or trailing bytes.
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& descriptor,
                     const ParameterList& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies entry values into same-named parameters. ContractError if a
/// parameter is missing, an extent differs, or an entry is left over.
void apply_checkpoint(const Checkpoint& ckpt, const ParameterList& params);

/// A model reconstructed from a checkpoint descriptor; exactly one of the
/// pointers is set.
struct LoadedModel {
  nlohmann::json descriptor;
  std::unique_ptr<SequenceModel> sequence;
  std::unique_ptr<FluidModel> fluid;
};

/// Builds the architecture named by descriptor["model"] and loads its
/// parameters.
LoadedModel instantiate(const Checkpoint& ckpt);
std::unique_ptr<SequenceModel> sequence_model_from_descriptor(const nlohmann::json& model);

nlohmann::json episode_to_json(const Episode& e);
Episode episode_from_json(const nlohmann::json& j);

/// One comment line, then one JSON object per episode.
void write_dataset(std::ostream& out, const std::vector<Episode>& episodes,
                   const std::string& comment);
void save_dataset(const std::filesystem::path& path, const std::vector<Episode>& episodes,
                  const std::string& comment);
/// Skips blank and '#' lines. IoError naming the line on malformed records;
/// DimensionError if sample widths differ across episodes.
std::vector<Episode> read_dataset(std::istream& in);
std::vector<Episode> load_dataset(const std::filesystem::path& path);

}  // namespace raflow

#endif  // RAFLOW_IO_HPP
