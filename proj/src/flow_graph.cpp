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

#include "raflow/flow_graph.hpp"

#include "raflow/gaussian.hpp"

#include <numeric>

namespace raflow {
namespace {

std::string layer_prefix(std::size_t index) { return "layer" + std::to_string(index); }

}  // namespace

FlowGraph::FlowGraph(std::string name, Index dim, bool condition_on_data)
    : name_(std::move(name)), dim_(dim), condition_on_data_(condition_on_data) {
  if (dim < 1) throw ConfigError("FlowGraph: dimension must be positive");
  standardizer_ = Standardizer::identity(dim);
}

FlowLayer& FlowGraph::add(std::unique_ptr<FlowLayer> layer) {
  if (layer->dim() != dim_)
    throw DimensionError("FlowGraph::add: layer dimension " + std::to_string(layer->dim()) +
                         " vs graph " + std::to_string(dim_));
  if (layer->hidden_dim() > 0 && condition_on_data_ && layer->condition_dim() != dim_)
    throw ConfigError("FlowGraph::add: data-conditioned cell must consume K inputs");
  layers_.push_back(std::move(layer));
  hidden_.emplace_back();
  const Index h = layers_.back()->hidden_dim();
  if (h > 0) hidden_.back() = ad::constant(Matrix::Zero(h, batch_));
  return *layers_.back();
}

void FlowGraph::initialize(Rng& rng) {
  for (auto& layer : layers_) {
    if (auto* cell = dynamic_cast<RafCell*>(layer.get())) cell->gru().initialize(rng);
    if (auto* coupling = dynamic_cast<CouplingLayer*>(layer.get())) coupling->initialize(rng);
  }
  reset(batch_);
}

void FlowGraph::reset(Index batch) {
  if (batch < 1) throw ContractError("FlowGraph::reset: batch must be positive");
  batch_ = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Index h = layers_[i]->hidden_dim();
    hidden_[i] = h > 0 ? ad::constant(Matrix::Zero(h, batch)) : ad::Var();
  }
}

void FlowGraph::observe(const ad::Var& observation) {
  if (observation.cols() != batch_)
    throw DimensionError("FlowGraph::observe: " + std::to_string(observation.cols()) +
                         " columns for a batch of " + std::to_string(batch_));
  const ad::Var condition = condition_on_data_ ? standardizer_.apply(observation) : observation;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (layers_[i]->hidden_dim() > 0) hidden_[i] = layers_[i]->advance(hidden_[i], condition);
}

LayerOutput FlowGraph::transform(const ad::Var& x) const { return transform_with(x, hidden_); }

LayerOutput FlowGraph::transform_with(const ad::Var& x, const std::vector<ad::Var>& hidden) const {
  if (x.rows() != dim_) throw DimensionError("FlowGraph: input rows != K");
  ad::Var current = standardizer_.apply(x);
  ad::Var logdet = ad::constant(Matrix::Constant(1, x.cols(), standardizer_.logdet()));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    LayerOutput out = layers_[i]->forward(current, hidden[i]);
    current = out.z;
    logdet = logdet + out.logdet;
  }
  return {current, logdet};
}

ad::Var FlowGraph::log_prob(const ad::Var& x) const {
  const LayerOutput out = transform(x);
  return gaussian_log_prob(out.z) + out.logdet;
}

ad::Var FlowGraph::log_prob_repeated(const ad::Var& x, Index repeats) const {
  if (repeats < 1 || x.cols() != batch_ * repeats)
    throw DimensionError("FlowGraph::log_prob_repeated: expected " +
                         std::to_string(batch_ * repeats) + " columns");
  std::vector<ad::Var> expanded(hidden_.size());
  for (std::size_t i = 0; i < hidden_.size(); ++i)
    if (hidden_[i].defined()) expanded[i] = ad::repeat_columns(hidden_[i], repeats);
  const LayerOutput out = transform_with(x, expanded);
  return gaussian_log_prob(out.z) + out.logdet;
}

InverseOutput FlowGraph::invert(const Matrix& z) const {
  if (z.rows() != dim_) throw DimensionError("FlowGraph: latent rows != K");
  Matrix current = z;
  RowVector logdet = RowVector::Constant(z.cols(), -standardizer_.logdet());
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Matrix hidden = hidden_[i].defined() ? hidden_[i].value() : Matrix();
    InverseOutput out = layers_[i]->inverse(current, hidden);
    current = std::move(out.x);
    logdet += out.logdet;
  }
  return {standardizer_.restore(current), logdet};
}

Matrix FlowGraph::sample(Rng& rng, Index count) const {
  if (batch_ != 1 && batch_ != count)
    throw ContractError("FlowGraph::sample: state batch must be 1 or match the draw count");
  return invert(standard_normal_matrix(rng, dim_, count)).x;
}

void FlowGraph::detach_state() {
  for (auto& h : hidden_)
    if (h.defined()) h = ad::detach(h);
}

void FlowGraph::set_hidden(std::size_t layer, const Matrix& value) {
  if (layers_.at(layer)->hidden_dim() != value.rows())
    throw DimensionError("FlowGraph::set_hidden: wrong hidden size");
  hidden_[layer] = ad::constant(value);
  batch_ = value.cols();
}

ParameterList FlowGraph::parameters() {
  ParameterList out;
  for (auto& layer : layers_)
    for (Parameter* p : layer->parameters()) out.push_back(p);
  return out;
}

nlohmann::json FlowGraph::describe() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : layers_) layers.push_back(layer->describe());
  std::vector<double> shift(standardizer_.shift.data(),
                            standardizer_.shift.data() + standardizer_.shift.size());
  return {{"model", name_},
          {"dim", dim_},
          {"condition_on_data", condition_on_data_},
          {"shift", shift},
          {"scale", standardizer_.scale},
          {"layers", layers}};
}

PermutationKind parse_permutation_kind(const std::string& name) {
  if (name == "reverse") return PermutationKind::kReverse;
  if (name == "random") return PermutationKind::kRandom;
  throw ConfigError("unknown permutation '" + name + "' (expected reverse or random)");
}

std::unique_ptr<FlowGraph> make_raf_graph(const RafGraphOptions& o) {
  if (o.layers < 1) throw ConfigError("make_raf_graph: need at least one layer");
  const Index condition_dim = o.condition_dim == 0 ? o.dim : o.condition_dim;
  auto graph = std::make_unique<FlowGraph>("raf", o.dim, o.condition_dim == 0);
  Rng perm_rng(o.permutation_seed, 0x7065726dULL);
  for (Index l = 0; l < o.layers; ++l) {
    if (l > 0 && o.dim > 1) {
      if (o.permutation == PermutationKind::kReverse) {
        graph->add(std::make_unique<PermutationLayer>(PermutationLayer::reversal(o.dim)));
      } else {
        std::vector<Index> perm(static_cast<std::size_t>(o.dim));
        std::iota(perm.begin(), perm.end(), Index{0});
        for (std::size_t i = perm.size(); i-- > 1;)
          std::swap(perm[i], perm[perm_rng.uniform_index(i + 1)]);
        graph->add(std::make_unique<PermutationLayer>(std::move(perm)));
      }
    }
    ActivationSpec act = o.activation;
    if (l + 1 == o.layers) act.kind = Activation::kIdentity;
    graph->add(std::make_unique<RafCell>(layer_prefix(graph->size()), o.dim, o.hidden,
                                         condition_dim, act));
  }
  return graph;
}

std::unique_ptr<FlowGraph> make_realnvp_graph(Index dim, Index layers, Index width) {
  if (layers < 1) throw ConfigError("make_realnvp_graph: need at least one layer");
  auto graph = std::make_unique<FlowGraph>("realnvp", dim);
  for (Index l = 0; l < layers; ++l) {
    if (l > 0) graph->add(std::make_unique<PermutationLayer>(PermutationLayer::reversal(dim)));
    graph->add(std::make_unique<CouplingLayer>(layer_prefix(graph->size()), dim, dim / 2, width));
  }
  return graph;
}

std::unique_ptr<FlowGraph> flow_graph_from_descriptor(const nlohmann::json& d) {
  auto graph = std::make_unique<FlowGraph>(d.at("model").get<std::string>(),
                                           d.at("dim").get<Index>(),
                                           d.at("condition_on_data").get<bool>());
  for (const auto& layer : d.at("layers")) {
    const std::string type = layer.at("type").get<std::string>();
    const std::string prefix = layer_prefix(graph->size());
    if (type == "raf") {
      ActivationSpec act{parse_activation(layer.at("activation").get<std::string>()),
                         layer.at("slope").get<double>()};
      graph->add(std::make_unique<RafCell>(prefix, layer.at("dim").get<Index>(),
                                           layer.at("hidden").get<Index>(),
                                           layer.at("condition_dim").get<Index>(), act));
    } else if (type == "coupling") {
      graph->add(std::make_unique<CouplingLayer>(prefix, layer.at("dim").get<Index>(),
                                                 layer.at("split").get<Index>(),
                                                 layer.at("width").get<Index>()));
    } else if (type == "permutation") {
      graph->add(std::make_unique<PermutationLayer>(layer.at("perm").get<std::vector<Index>>()));
    } else {
      throw ConfigError("unknown flow layer type '" + type + "'");
    }
  }
  const auto shift = d.at("shift").get<std::vector<double>>();
  graph->set_standardizer({Eigen::Map<const Vector>(shift.data(), static_cast<Index>(shift.size())),
                           d.at("scale").get<double>()});
  return graph;
}

Vector graph_sample(FlowGraph& graph, Rng& rng, const Matrix& context) {
  ad::NoGradGuard no_grad;
  graph.reset(1);
  for (Index t = 0; t < context.rows(); ++t)
    graph.observe(ad::constant(context.row(t).transpose()));
  return graph.sample(rng, 1).col(0);
}

}  // namespace raflow
