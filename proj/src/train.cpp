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

#include "raflow/train.hpp"

#include "raflow/losses.hpp"
#include "raflow/rnn_gaussian.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace raflow {
namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL;
constexpr std::uint64_t kShuffleStream = 0x73687566ULL;

std::vector<Matrix> snapshot(const ParameterList& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.push_back(p->value());
  return out;
}

void restore(const ParameterList& params, const std::vector<Matrix>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->assign(values[i]);
}

std::vector<std::vector<const Episode*>> minibatches(const std::vector<Episode>& data, Index size,
                                                     std::uint64_t seed, Index epoch) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, kShuffleStream + static_cast<std::uint64_t>(epoch));
  for (std::size_t i = order.size(); i-- > 1;) std::swap(order[i], order[rng.uniform_index(i + 1)]);
  const std::size_t step = size <= 0 ? order.size() : static_cast<std::size_t>(size);
  std::vector<std::vector<const Episode*>> out;
  for (std::size_t s = 0; s < order.size(); s += step) {
    std::vector<const Episode*> batch;
    for (std::size_t i = s; i < std::min(order.size(), s + step); ++i) batch.push_back(&data[order[i]]);
    out.push_back(std::move(batch));
  }
  return out;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// One optimizer step on a scalar loss; returns its value.
double descend(const ad::Var& loss, const ParameterList& params, AdamState& adam,
               const TrainConfig& config) {
  if (!std::isfinite(loss.scalar())) throw NumericError("loss is not finite");
  ad::backward(loss);
  clip_gradient_norm(params, config.clip_norm);
  adam_step(params, adam, config.learning_rate);
  return loss.scalar();
}

}  // namespace

void check_dataset(const TrainConfig& config, const std::vector<Episode>& data) {
  if (data.empty()) throw ContractError("no episodes");
  const std::string expected = to_string(config.experiment);
  const Index dim = data.front().dim();
  for (const auto& e : data) {
    if (e.process != expected)
      throw ContractError("episode " + std::to_string(e.id) + " is from process '" + e.process +
                          "' but the config trains '" + expected + "'");
    if (e.dim() != dim) throw ContractError("episodes differ in dimensionality");
    if (e.length() < 2) throw ContractError("episode " + std::to_string(e.id) + " has fewer than 2 steps");
  }
  if (config.experiment != ExperimentId::kFluid && dim != experiment_dim(config.experiment))
    throw ContractError("data dimensionality " + std::to_string(dim) + " does not match the experiment");
  if (config.experiment == ExperimentId::kFluid) {
    const auto g = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(dim))));
    if (g * g != dim) throw ContractError("fluid samples are not square fields");
  }
}

std::unique_ptr<SequenceModel> build_sequence_model(const TrainConfig& config,
                                                    const std::vector<Episode>& data) {
  check_dataset(config, data);
  const Index dim = data.front().dim();
  std::unique_ptr<SequenceModel> model;
  switch (config.model) {
    case ModelKind::kRaf: {
      RafGraphOptions o;
      o.dim = dim;
      o.layers = config.layers;
      o.hidden = config.hidden;
      o.activation = {config.activation, config.leaky_slope};
      o.permutation = config.permutation;
      o.permutation_seed = config.seed;
      model = make_raf_graph(o);
      break;
    }
    case ModelKind::kRealNvp:
      model = make_realnvp_graph(dim, config.layers, config.coupling_width);
      break;
    case ModelKind::kRnnGaussian:
      model = std::make_unique<RnnGaussian>(dim, config.hidden);
      break;
  }
  if (config.standardize) model->set_standardizer(Standardizer::fit(stack_samples(data)));
  Rng rng(config.seed, kInitStream);
  model->initialize(rng);
  return model;
}

TrainResult train_sequence_model(SequenceModel& model, const std::vector<Episode>& data,
                                 const TrainConfig& config, const EpochCallback& on_epoch) {
  if (data.empty()) throw ContractError("train: no episodes");
  const ParameterList params = model.parameters();
  AdamState adam = AdamState::for_parameters(params);
  TrainResult result;
  for (Index epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<Matrix> last_good = snapshot(params);
    double total = 0.0;
    double count = 0.0;
    try {
      for (const auto& batch : minibatches(data, config.batch_episodes, config.seed, epoch)) {
        const BatchLogDensity d =
            batch_log_density(model, make_sequence_batch(batch), config.truncation);
        descend(ad::scale(d.total, -1.0 / d.count), params, adam, config);
        total += d.total.scalar();
        count += d.count;
      }
    } catch (const NumericError& e) {
      restore(params, last_good);
      zero_grads(params);
      result.aborted = true;
      result.diagnostic = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    result.log.push_back({epoch, -total / count, elapsed(start)});
    if (on_epoch) on_epoch(result.log.back());
  }
  return result;
}

std::unique_ptr<FluidModel> build_fluid_model(const TrainConfig& config,
                                              const std::vector<Episode>& data) {
  check_dataset(config, data);
  const auto g = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(data.front().dim()))));
  auto model = std::make_unique<FluidModel>(g, config.layers, config.hidden,
                                            ActivationSpec{config.activation, config.leaky_slope},
                                            config.permutation);
  Rng rng(config.seed, kInitStream);
  model->initialize(rng);
  return model;
}

TrainResult train_fluid_model(FluidModel& model, const std::vector<Episode>& data,
                              const TrainConfig& config, const EpochCallback& on_epoch) {
  if (data.empty()) throw ContractError("train: no episodes");
  const ParameterList ae_params = model.autoencoder().parameters();
  const ParameterList all_params = model.parameters();
  AdamState ae_adam = AdamState::for_parameters(ae_params);
  AdamState adam = AdamState::for_parameters(all_params);
  TrainResult result;
  const Index total_epochs = config.pretrain_epochs + config.epochs;
  for (Index epoch = 1; epoch <= total_epochs; ++epoch) {
    const bool pretraining = epoch <= config.pretrain_epochs;
    const auto start = std::chrono::steady_clock::now();
    const std::vector<Matrix> last_good = snapshot(all_params);
    double total = 0.0;
    Index batches = 0;
    try {
      for (const auto& batch : minibatches(data, config.batch_episodes, config.seed, epoch)) {
        if (pretraining) {
          std::vector<ad::Var> fields;
          for (const Episode* e : batch) fields.push_back(ad::constant(e->samples.transpose()));
          const ad::Var x = ad::hstack(fields);
          const ad::Var l1 = l1_loss(model.autoencoder().decode(model.autoencoder().encode(x)), x);
          total += descend(l1, ae_params, ae_adam, config);
        } else {
          const FluidLossTerms terms = fluid_losses(model, batch);
          total += descend(composite_loss(terms.l1, terms.kl, config.kl_weight), all_params, adam,
                           config);
        }
        ++batches;
      }
    } catch (const NumericError& e) {
      restore(all_params, last_good);
      zero_grads(all_params);
      result.aborted = true;
      result.diagnostic = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    result.log.push_back({epoch, total / static_cast<double>(batches), elapsed(start)});
    if (on_epoch) on_epoch(result.log.back());
  }
  return result;
}

std::pair<double, double> sorted_mean_std(std::vector<double> values) {
  if (values.empty()) throw ContractError("sorted_mean_std: no values");
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

DensityReport evaluate_avg_log_density(SequenceModel& model, const std::vector<Episode>& episodes) {
  if (episodes.empty()) throw ContractError("no episodes");
  DensityReport report;
  for (const auto& e : episodes) {
    if (e.dim() != model.dim())
      throw DimensionError("episode dimensionality " + std::to_string(e.dim()) +
                           " does not match the model (" + std::to_string(model.dim()) + ")");
    const std::vector<double> steps = step_log_probs(model, e.samples);
    if (steps.empty()) throw ContractError("episode " + std::to_string(e.id) + " has fewer than 2 steps");
    double sum = 0.0;
    for (double v : steps) sum += v;
    report.per_episode.push_back(sum / static_cast<double>(steps.size()));
  }
  std::tie(report.mean, report.std) = sorted_mean_std(report.per_episode);
  return report;
}

KlReport evaluate_fluid_kl(FluidModel& model, const std::vector<Episode>& episodes) {
  if (episodes.empty()) throw ContractError("no episodes");
  ad::NoGradGuard no_grad;
  KlReport report;
  std::vector<std::vector<double>> by_step;
  for (const auto& e : episodes) {
    const FluidLossTerms terms = fluid_losses(model, {&e});
    if (by_step.empty()) by_step.resize(terms.kl_per_step.size());
    if (by_step.size() != terms.kl_per_step.size())
      throw ContractError("evaluate_fluid_kl: episodes differ in length");
    double sum = 0.0;
    for (std::size_t t = 0; t < terms.kl_per_step.size(); ++t) {
      by_step[t].push_back(terms.kl_per_step[t]);
      sum += terms.kl_per_step[t];
    }
    report.per_episode.push_back(sum / static_cast<double>(terms.kl_per_step.size()));
  }
  for (auto& values : by_step) report.per_step.push_back(sorted_mean_std(values).first);
  report.mean = sorted_mean_std(report.per_episode).first;
  return report;
}

}  // namespace raflow
