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

// Generators for the three stochastic processes. Every generator is a pure
// function of its Rng, so an episode is reproduced by Rng(seed, episode id).

#ifndef RAFLOW_SIMULATORS_HPP
#define RAFLOW_SIMULATORS_HPP

#include "raflow/episode.hpp"
#include "raflow/random.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace raflow {

// ---------------------------------------------------------------------------
// Hierarchical process: one mode y ~ Bern(p) per episode, mu = 2y - 1, then
//   x1 ~ N(mu, 4),  x0 ~ N(0.25 mu x1^2, 1).
// Samples are stored as (x0, x1).

inline double hierarchical_mode_mean(int mode) { return 2.0 * mode - 1.0; }

/// Mean of x0 given the mode and x1.
inline double hierarchical_x0_mean(int mode, double x1) {
  return 0.25 * hierarchical_mode_mean(mode) * x1 * x1;
}

/// One (x0, x1) draw for a fixed mode.
Vector sample_hierarchical_point(Rng& rng, int mode);

/// `n` samples sharing one mode; labels carry {"y": mode}.
Episode sample_hierarchical_episode(Rng& rng, Index n, double p = 0.5,
                                    std::optional<int> forced_mode = std::nullopt);

// ---------------------------------------------------------------------------
// Maze process: an agent walks axis-aligned corridors on an integer lattice,
// 1 unit with probability 0.8 or 2 units with probability 0.2 per step,
// stopping at any node it would overshoot. At a node it keeps its heading
// with probability 0.5 when the straight corridor exists and otherwise turns
// into a perpendicular corridor, preferring those that reduce the Manhattan
// distance to the goal. It never reverses.

struct LatticePoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

struct MazeSpec {
  std::vector<LatticePoint> nodes;
  std::vector<std::pair<int, int>> edges;  // indices into nodes; axis-aligned
  int start = 0;
  int goal = 0;

  /// n x n grid of corridors with the given spacing; start (0, 0), goal at
  /// the opposite corner.
  static MazeSpec lattice(int n = 5, int spacing = 4);

  /// ConfigError unless connected, axis-aligned, start != goal and every
  /// node other than start/goal has degree >= 2.
  void validate() const;
  std::vector<int> neighbors(int node) const;
  int degree(int node) const { return static_cast<int>(neighbors(node).size()); }
  /// Node index at a lattice point, or -1.
  int node_at(LatticePoint p) const;
  /// True if p lies on some corridor segment.
  bool on_corridor(double x, double y) const;
};

enum class TurnKind { kStraight, kTurn, kForced };

struct HeadingChoice {
  LatticePoint heading;  // unit axis direction
  int next_node;
  TurnKind kind;
  bool straight_available = false;
};

/// Heading decision at `node` for an agent arriving with `incoming`
/// (zero vector at the start node).
HeadingChoice choose_heading(Rng& rng, const MazeSpec& spec, int node, LatticePoint incoming);

/// Position sequence (including the start) until the goal or max_steps
/// moves; labels carry the decisions taken at nodes.
Episode simulate_maze_episode(Rng& rng, const MazeSpec& spec, Index max_steps = 200);

// ---------------------------------------------------------------------------
// Fluid process: exp-temperature mass m = exp(T) on a G x G grid, moved by
//   diffusion   kappa * lap(m)              (5-point, closed boundaries)
//   buoyancy    upward velocity beta * (T - mean T), donor-cell upwind
// in flux form, so sum(exp T) is conserved to rounding.

struct FluidParams {
  Index grid = 16;
  double kappa = 0.15;
  double beta = 0.08;
  double dt = 1.0;
  double cell_size = 1.0;
  double amplitude = 1.0;
  double radius = 2.0;      // cells
  double offset_sd = 2.0;   // cells

  /// ConfigError if kappa dt > 0.25 h^2 or the advection CFL bound fails.
  void validate(double max_abs_excess = 0.0) const;
};

struct FluidField {
  Matrix temperature;  // G x G, row 0 at the top
  double cell_size = 1.0;
  Index time = 0;
};

/// Hot bump below the mid-plane, cold bump above it, each offset
/// horizontally by N(0, offset_sd^2) cells.
FluidField fluid_initial(Rng& rng, const FluidParams& params);
FluidField fluid_step(const FluidField& field, const FluidParams& params);

/// sum exp(T) * cell area.
double field_mass(const FluidField& field);

/// exp(T) * cell area / normalizer. Without a normalizer the field's own
/// mass is used.
Matrix field_to_distribution(const FluidField& field, std::optional<double> normalizer = {});

/// Row centroid of the positive temperature excess over the field mean.
double hot_centroid_row(const FluidField& field);

/// `steps` consecutive fields, flattened row-major, one per sample row.
Episode simulate_fluid_episode(Rng& rng, const FluidParams& params, Index steps = 8);

}  // namespace raflow

#endif  // RAFLOW_SIMULATORS_HPP
