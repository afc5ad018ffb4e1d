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

#include "raflow/simulators.hpp"

namespace raflow {

Matrix stack_samples(const std::vector<Episode>& episodes) {
  Index rows = 0;
  Index cols = episodes.empty() ? 0 : episodes.front().dim();
  for (const auto& e : episodes) {
    if (e.dim() != cols) throw DimensionError("stack_samples: episodes differ in dimension");
    rows += e.length();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const auto& e : episodes) {
    out.middleRows(at, e.length()) = e.samples;
    at += e.length();
  }
  return out;
}

Vector sample_hierarchical_point(Rng& rng, int mode) {
  const double mu = hierarchical_mode_mean(mode);
  Vector x(2);
  x(1) = rng.normal(mu, 2.0);
  x(0) = rng.normal(hierarchical_x0_mean(mode, x(1)), 1.0);
  return x;
}

Episode sample_hierarchical_episode(Rng& rng, Index n, double p, std::optional<int> forced_mode) {
  if (n < 1) throw ContractError("sample_hierarchical_episode: need at least one sample");
  const int mode = forced_mode ? *forced_mode : rng.bernoulli(p);
  Episode e;
  e.process = "hierarchical";
  e.id = static_cast<std::int64_t>(rng.stream());
  e.seed = rng.seed();
  e.labels = {{"y", mode}};
  e.samples.resize(n, 2);
  for (Index j = 0; j < n; ++j) e.samples.row(j) = sample_hierarchical_point(rng, mode).transpose();
  return e;
}

}  // namespace raflow
