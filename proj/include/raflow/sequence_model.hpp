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

#ifndef RAFLOW_SEQUENCE_MODEL_HPP
#define RAFLOW_SEQUENCE_MODEL_HPP

#include "raflow/autodiff.hpp"
#include "raflow/parameter.hpp"
#include "raflow/random.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace raflow {

/// Fixed affine map of data units onto a unit-ish range: (x - shift) / scale.
/// The scale is one scalar for all coordinates so isotropy is preserved.
struct Standardizer {
  Vector shift;
  double scale = 1.0;

  static Standardizer identity(Index dim) { return {Vector::Zero(dim), 1.0}; }
  /// Per-coordinate mean and the largest per-coordinate standard deviation
  /// of the rows of `samples`.
  static Standardizer fit(const Matrix& samples);

  ad::Var apply(const ad::Var& x) const;
  Matrix restore(const Matrix& standardized) const;
  /// ln|det| of apply() for one column.
  double logdet() const;
};

/// Conditional density p(x_{t+1} | x_0..x_t) evaluated a batch of
/// sequences at a time.
///
/// Protocol: reset(B); observe(x_0); then for each step evaluate
/// log_prob(x_{t+1}) before observe(x_{t+1}). Columns are sequences.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  virtual std::string name() const = 0;
  virtual Index dim() const = 0;

  virtual void initialize(Rng& rng) = 0;
  /// Zeroes the recurrent state for `batch` parallel sequences.
  virtual void reset(Index batch) = 0;
  /// Advances the recurrent state with K x B observations in data units.
  virtual void observe(const ad::Var& observation) = 0;
  /// 1 x B log densities of K x B candidates under the current state.
  virtual ad::Var log_prob(const ad::Var& x) const = 0;
  /// K x count draws from the current conditional (state must have batch 1).
  virtual Matrix sample(Rng& rng, Index count) const = 0;
  /// Cuts the recorded history of the recurrent state (truncated BPTT).
  virtual void detach_state() = 0;

  virtual ParameterList parameters() = 0;
  virtual nlohmann::json describe() const = 0;

  const Standardizer& standardizer() const { return standardizer_; }
  void set_standardizer(Standardizer s);

 protected:
  Standardizer standardizer_;
};

/// Log densities of samples[t+1] given samples[0..t] for t = 0..T-2, where
/// `samples` is T x K (one observation per row). Resets the model first.
std::vector<double> step_log_probs(SequenceModel& model, const Matrix& samples);

}  // namespace raflow

#endif  // RAFLOW_SEQUENCE_MODEL_HPP
