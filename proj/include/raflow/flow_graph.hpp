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

#ifndef RAFLOW_FLOW_GRAPH_HPP
#define RAFLOW_FLOW_GRAPH_HPP

#include "raflow/coupling.hpp"
#include "raflow/flow_layer.hpp"
#include "raflow/raf_cell.hpp"
#include "raflow/sequence_model.hpp"

#include <memory>
#include <vector>

namespace raflow {

/// Ordered stack of flow layers over a standard-normal base.
///
///   log p(x) = log N(f(x); 0, I) + sum_layers logdet_l + standardizer logdet
///
/// Each recurrent layer owns a hidden state (zero after reset) that is
/// advanced with every observation. By default every recurrent layer
/// consumes the standardized observation itself; a graph built with
/// condition_on_data = false instead receives an external conditioning
/// vector through observe().
class FlowGraph final : public SequenceModel {
 public:
  FlowGraph(std::string name, Index dim, bool condition_on_data = true);

  std::string name() const override { return name_; }
  Index dim() const override { return dim_; }
  bool condition_on_data() const { return condition_on_data_; }

  /// Takes ownership; the layer's dimension must match the graph.
  FlowLayer& add(std::unique_ptr<FlowLayer> layer);
  std::size_t size() const { return layers_.size(); }
  FlowLayer& layer(std::size_t i) { return *layers_[i]; }
  const FlowLayer& layer(std::size_t i) const { return *layers_[i]; }

  void initialize(Rng& rng) override;
  void reset(Index batch) override;
  void observe(const ad::Var& observation) override;
  ad::Var log_prob(const ad::Var& x) const override;
  Matrix sample(Rng& rng, Index count) const override;
  void detach_state() override;

  /// Data to latent through every layer (standardizer included); logdet is
  /// the summed log|det| without the base density.
  LayerOutput transform(const ad::Var& x) const;
  /// Latent to data; logdet is that of the inverse map.
  InverseOutput invert(const Matrix& z) const;
  /// log_prob with each state column reused for `repeats` consecutive
  /// columns of x (x has batch * repeats columns).
  ad::Var log_prob_repeated(const ad::Var& x, Index repeats) const;

  const std::vector<ad::Var>& hidden_states() const { return hidden_; }
  /// Overrides one layer's hidden state (H x B); for inspection and tests.
  void set_hidden(std::size_t layer, const Matrix& value);

  ParameterList parameters() override;
  nlohmann::json describe() const override;

 private:
  LayerOutput transform_with(const ad::Var& x, const std::vector<ad::Var>& hidden) const;

  std::string name_;
  Index dim_;
  bool condition_on_data_;
  Index batch_ = 1;
  std::vector<std::unique_ptr<FlowLayer>> layers_;
  std::vector<ad::Var> hidden_;
};

enum class PermutationKind { kReverse, kRandom };

PermutationKind parse_permutation_kind(const std::string& name);

struct RafGraphOptions {
  Index dim = 2;
  Index layers = 5;
  Index hidden = 16;
  /// 0 means "condition on the observation itself" (condition_dim = dim).
  Index condition_dim = 0;
  ActivationSpec activation;
  PermutationKind permutation = PermutationKind::kReverse;
  std::uint64_t permutation_seed = 0;
};

/// RAF cells with a permutation between consecutive cells. The configured
/// activation is used on every cell except the last, which is linear.
std::unique_ptr<FlowGraph> make_raf_graph(const RafGraphOptions& options);

/// RealNVP stack: coupling layers with reversal permutations in between.
std::unique_ptr<FlowGraph> make_realnvp_graph(Index dim, Index layers, Index width = 32);

/// Rebuilds the layer structure from describe(); parameters stay zero.
std::unique_ptr<FlowGraph> flow_graph_from_descriptor(const nlohmann::json& descriptor);

/// Per-step conditional log densities of an episode (T x K) under a graph.
inline std::vector<double> graph_log_prob(const Matrix& samples, FlowGraph& graph) {
  return step_log_probs(graph, samples);
}

/// Draw x_next given an observed prefix (rows of `context`); the graph's
/// hidden states are left advanced through the context only.
Vector graph_sample(FlowGraph& graph, Rng& rng, const Matrix& context);

}  // namespace raflow

#endif  // RAFLOW_FLOW_GRAPH_HPP
