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

#include "raflow/autoencoder.hpp"
#include "raflow/simulators.hpp"

#include <cmath>

namespace raflow {

void FluidParams::validate(double max_abs_excess) const {
  if (grid < 2) throw ConfigError("fluid: grid must be at least 2");
  if (!(kappa >= 0.0) || !(beta >= 0.0) || !(dt > 0.0) || !(cell_size > 0.0))
    throw ConfigError("fluid: kappa, beta >= 0 and dt, cell size > 0 required");
  if (kappa * dt > 0.25 * cell_size * cell_size)
    throw ConfigError("fluid: dt exceeds the diffusion stability bound kappa dt <= h^2 / 4");
  if (beta * max_abs_excess * dt > cell_size)
    throw ConfigError("fluid: dt exceeds the advection CFL bound");
}

FluidField fluid_initial(Rng& rng, const FluidParams& params) {
  params.validate(2.0 * params.amplitude);
  const Index g = params.grid;
  FluidField field{Matrix::Zero(g, g), params.cell_size, 0};
  const double center_col = 0.5 * static_cast<double>(g - 1);
  const double rows[2] = {0.75 * static_cast<double>(g), 0.25 * static_cast<double>(g)};
  const double signs[2] = {+1.0, -1.0};  // hot below, cold above
  for (int blob = 0; blob < 2; ++blob) {
    const double col = center_col + rng.normal(0.0, params.offset_sd);
    for (Index i = 0; i < g; ++i) {
      for (Index j = 0; j < g; ++j) {
        const double di = static_cast<double>(i) - rows[blob];
        const double dj = static_cast<double>(j) - col;
        field.temperature(i, j) += signs[blob] * params.amplitude *
                                   std::exp(-(di * di + dj * dj) / (2.0 * params.radius * params.radius));
      }
    }
  }
  return field;
}

FluidField fluid_step(const FluidField& field, const FluidParams& params) {
  const Matrix& t = field.temperature;
  const Index g = t.rows();
  if (t.cols() != g || g != params.grid) throw DimensionError("fluid_step: grid mismatch");
  require_finite(t, "fluid_step");
  const Matrix excess = (t.array() - t.mean()).matrix();
  params.validate(excess.cwiseAbs().maxCoeff());

  const double h = params.cell_size;
  const Matrix m = t.array().exp().matrix();
  Matrix dm = Matrix::Zero(g, g);

  // Diffusive exchange across interior faces; boundary faces carry no flux.
  const double d = params.kappa * params.dt / (h * h);
  for (Index i = 0; i < g; ++i) {
    for (Index j = 0; j < g; ++j) {
      if (j + 1 < g) {
        const double f = d * (m(i, j) - m(i, j + 1));
        dm(i, j) -= f;
        dm(i, j + 1) += f;
      }
      if (i + 1 < g) {
        const double f = d * (m(i, j) - m(i + 1, j));
        dm(i, j) -= f;
        dm(i + 1, j) += f;
      }
    }
  }

  // Buoyant transport across horizontal faces. Positive velocity is upward,
  // i.e. toward row i - 1; the donor cell is upstream of the face.
  const double c = params.beta * params.dt / h;
  for (Index i = 0; i + 1 < g; ++i) {
    for (Index j = 0; j < g; ++j) {
      const double v = 0.5 * (excess(i, j) + excess(i + 1, j));
      const double up = v > 0 ? c * v * m(i + 1, j) : c * v * m(i, j);  // flow into row i
      dm(i, j) += up;
      dm(i + 1, j) -= up;
    }
  }

  const Matrix next = m + dm;
  if ((next.array() <= 0.0).any()) throw NumericError("fluid_step: non-positive mass");
  return {next.array().log().matrix(), field.cell_size, field.time + 1};
}

double field_mass(const FluidField& field) {
  return field.temperature.array().exp().sum() * field.cell_size * field.cell_size;
}

Matrix field_to_distribution(const FluidField& field, std::optional<double> normalizer) {
  require_finite(field.temperature, "field_to_distribution");
  const double z = normalizer ? *normalizer : field_mass(field);
  if (!(z > 0.0)) throw DomainError("field_to_distribution: normalizer must be positive");
  return (field.temperature.array().exp() * (field.cell_size * field.cell_size / z)).matrix();
}

double hot_centroid_row(const FluidField& field) {
  const Matrix w = (field.temperature.array() - field.temperature.mean()).cwiseMax(0.0).matrix();
  const double total = w.sum();
  if (total <= 0.0) throw DomainError("hot_centroid_row: field has no positive excess");
  double acc = 0.0;
  for (Index i = 0; i < w.rows(); ++i) acc += static_cast<double>(i) * w.row(i).sum();
  return acc / total;
}

Episode simulate_fluid_episode(Rng& rng, const FluidParams& params, Index steps) {
  if (steps < 1) throw ContractError("simulate_fluid_episode: need at least one step");
  Episode e;
  e.process = "fluid";
  e.id = static_cast<std::int64_t>(rng.stream());
  e.seed = rng.seed();
  e.labels = {{"grid", params.grid}};
  e.samples.resize(steps, params.grid * params.grid);
  FluidField field = fluid_initial(rng, params);
  for (Index s = 0; s < steps; ++s) {
    if (s > 0) field = fluid_step(field, params);
    e.samples.row(s) = flatten_field(field.temperature).transpose();
  }
  return e;
}

}  // namespace raflow
