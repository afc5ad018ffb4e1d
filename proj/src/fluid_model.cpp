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

#include "raflow/fluid_model.hpp"

#include "raflow/losses.hpp"
#include "raflow/simulators.hpp"

#include <cmath>

namespace raflow {
namespace {

Matrix make_points(Index g) {
  Matrix p(2, g * g);
  const double step = 2.0 * FluidModel::kExtent / static_cast<double>(g);
  for (Index i = 0; i < g; ++i) {
    for (Index j = 0; j < g; ++j) {
      p(0, i * g + j) = -FluidModel::kExtent + (static_cast<double>(j) + 0.5) * step;
      p(1, i * g + j) = FluidModel::kExtent - (static_cast<double>(i) + 0.5) * step;
    }
  }
  return p;
}

std::unique_ptr<FlowGraph> make_fluid_flow(Index layers, Index hidden, ActivationSpec activation,
                                           PermutationKind permutation) {
  RafGraphOptions o;
  o.dim = 2;
  o.layers = layers;
  o.hidden = hidden;
  o.condition_dim = DenseAutoencoder::kLatentDim;
  o.activation = activation;
  o.permutation = permutation;
  return make_raf_graph(o);
}

}  // namespace

FluidModel::FluidModel(Index grid, Index layers, Index hidden, ActivationSpec activation,
                       PermutationKind permutation)
    : FluidModel(grid, make_fluid_flow(layers, hidden, activation, permutation)) {}

FluidModel::FluidModel(Index grid, std::unique_ptr<FlowGraph> flow)
    : autoencoder_(grid), flow_(std::move(flow)), points_(make_points(grid)) {
  if (flow_->dim() != 2 || flow_->condition_on_data())
    throw ConfigError("FluidModel: flow must be a K = 2 graph conditioned on latents");
}

void FluidModel::initialize(Rng& rng) {
  autoencoder_.initialize(rng);
  flow_->initialize(rng);
}

ParameterList FluidModel::parameters() {
  ParameterList out = autoencoder_.parameters();
  for (Parameter* p : flow_->parameters()) out.push_back(p);
  return out;
}

nlohmann::json FluidModel::describe() const {
  return {{"model", "fluid_raf"},
          {"grid", grid()},
          {"extent", kExtent},
          {"autoencoder", autoencoder_.describe()},
          {"flow", flow_->describe()}};
}

std::unique_ptr<FluidModel> FluidModel::from_descriptor(const nlohmann::json& d) {
  if (d.at("model").get<std::string>() != "fluid_raf")
    throw ConfigError("FluidModel: descriptor is not a fluid model");
  return std::make_unique<FluidModel>(d.at("grid").get<Index>(),
                                      flow_graph_from_descriptor(d.at("flow")));
}

FluidLossTerms fluid_losses(FluidModel& model, const std::vector<const Episode*>& episodes) {
  if (episodes.empty()) throw ContractError("fluid_losses: no episodes");
  const Index g = model.grid();
  const Index cells = g * g;
  const Index b = static_cast<Index>(episodes.size());
  const Index steps = episodes.front()->length();
  for (const Episode* e : episodes) {
    if (e->dim() != cells) throw DimensionError("fluid_losses: field size does not match the grid");
    if (e->length() != steps) throw ContractError("fluid_losses: episodes differ in length");
  }
  if (steps < 2) throw ContractError("fluid_losses: need at least two fields per episode");

  std::vector<Matrix> fields(static_cast<std::size_t>(steps), Matrix(cells, b));
  RowVector normalizer(b);
  for (Index j = 0; j < b; ++j) {
    const Matrix& s = episodes[static_cast<std::size_t>(j)]->samples;
    for (Index t = 0; t < steps; ++t) fields[static_cast<std::size_t>(t)].col(j) = s.row(t).transpose();
    normalizer(j) = field_mass({unflatten_field(s.row(0).transpose(), g), 1.0, 0});
  }

  const DenseAutoencoder& ae = model.autoencoder();
  std::vector<ad::Var> all_fields;
  std::vector<ad::Var> latents;
  for (const Matrix& f : fields) {
    all_fields.push_back(ad::constant(f));
    latents.push_back(ae.encode(all_fields.back()));
  }
  const ad::Var stacked_fields = ad::hstack(all_fields);
  const ad::Var recon = ae.decode(ad::hstack(latents));

  FlowGraph& flow = model.flow();
  flow.reset(b);
  Matrix points(2, cells * b);
  for (Index j = 0; j < b; ++j) points.middleCols(j * cells, cells) = model.cell_points();
  const ad::Var x = ad::constant(points);

  FluidLossTerms out;
  out.episodes = b;
  std::vector<ad::Var> kls;
  for (Index t = 0; t + 1 < steps; ++t) {
    flow.observe(latents[static_cast<std::size_t>(t)]);
    const ad::Var log_q = ad::log_softmax_blocks(flow.log_prob_repeated(x, cells), cells);
    Matrix p(1, cells * b);
    for (Index j = 0; j < b; ++j) {
      const FluidField next{unflatten_field(fields[static_cast<std::size_t>(t + 1)].col(j), g), 1.0, 0};
      p.middleCols(j * cells, cells) = flatten_field(field_to_distribution(next, normalizer(j))).transpose();
    }
    const ad::Var kl = kl_discrete(p, log_q, cells);
    out.kl_per_step.push_back(kl.scalar() / static_cast<double>(b));
    kls.push_back(kl);
  }
  out.kl = ad::scale(ad::sum(ad::vstack(kls)),
                     1.0 / static_cast<double>(b * (steps - 1)));
  out.l1 = l1_loss(recon, stacked_fields);
  return out;
}

Matrix predict_distribution(FluidModel& model, const Matrix& context) {
  ad::NoGradGuard no_grad;
  const Index g = model.grid();
  const Index cells = g * g;
  if (context.cols() != cells || context.rows() < 1)
    throw DimensionError("predict_distribution: context must hold flattened G x G fields");
  FlowGraph& flow = model.flow();
  flow.reset(1);
  for (Index t = 0; t < context.rows(); ++t)
    flow.observe(ad::constant(model.autoencoder().encode(unflatten_field(context.row(t).transpose(), g))));
  const ad::Var log_q =
      ad::log_softmax_blocks(flow.log_prob_repeated(ad::constant(model.cell_points()), cells), cells);
  return unflatten_field(log_q.value().row(0).transpose().array().exp().matrix(), g);
}

}  // namespace raflow
