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

#include <algorithm>
#include <cstdlib>
#include <queue>

namespace raflow {
namespace {

int sign(int v) { return (v > 0) - (v < 0); }

int manhattan(LatticePoint a, LatticePoint b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

LatticePoint direction(LatticePoint from, LatticePoint to) {
  return {sign(to.x - from.x), sign(to.y - from.y)};
}

const char* kind_name(TurnKind k) {
  switch (k) {
    case TurnKind::kStraight:
      return "straight";
    case TurnKind::kTurn:
      return "turn";
    case TurnKind::kForced:
      return "forced";
  }
  return "forced";
}

}  // namespace

MazeSpec MazeSpec::lattice(int n, int spacing) {
  if (n < 2 || spacing < 1) throw ConfigError("MazeSpec::lattice: need n >= 2 and spacing >= 1");
  MazeSpec spec;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) spec.nodes.push_back({i * spacing, j * spacing});
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int at = j * n + i;
      if (i + 1 < n) spec.edges.emplace_back(at, at + 1);
      if (j + 1 < n) spec.edges.emplace_back(at, at + n);
    }
  }
  spec.start = 0;
  spec.goal = n * n - 1;
  return spec;
}

std::vector<int> MazeSpec::neighbors(int node) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == node) out.push_back(b);
    if (b == node) out.push_back(a);
  }
  return out;
}

int MazeSpec::node_at(LatticePoint p) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == p) return static_cast<int>(i);
  return -1;
}

bool MazeSpec::on_corridor(double x, double y) const {
  for (const auto& [a, b] : edges) {
    const LatticePoint p = nodes[a];
    const LatticePoint q = nodes[b];
    if (p.x == q.x && x == p.x && y >= std::min(p.y, q.y) && y <= std::max(p.y, q.y)) return true;
    if (p.y == q.y && y == p.y && x >= std::min(p.x, q.x) && x <= std::max(p.x, q.x)) return true;
  }
  return false;
}

void MazeSpec::validate() const {
  const int n = static_cast<int>(nodes.size());
  if (n < 2) throw ConfigError("maze: need at least two nodes");
  if (start < 0 || start >= n || goal < 0 || goal >= n) throw ConfigError("maze: start/goal out of range");
  if (start == goal) throw ConfigError("maze: start and goal coincide");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (nodes[i] == nodes[j]) throw ConfigError("maze: duplicate node");
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n || a == b) throw ConfigError("maze: invalid edge");
    if (nodes[a].x != nodes[b].x && nodes[a].y != nodes[b].y)
      throw ConfigError("maze: corridor is not axis-aligned");
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<int> frontier;
  frontier.push(start);
  seen[static_cast<std::size_t>(start)] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int at = frontier.front();
    frontier.pop();
    for (int next : neighbors(at)) {
      if (!seen[static_cast<std::size_t>(next)]) {
        seen[static_cast<std::size_t>(next)] = true;
        ++reached;
        frontier.push(next);
      }
    }
  }
  if (reached != n) throw ConfigError("maze: corridor graph is disconnected");
  for (int i = 0; i < n; ++i)
    if (i != start && i != goal && degree(i) < 2)
      throw ConfigError("maze: dead-end node would force a reversal");
}

HeadingChoice choose_heading(Rng& rng, const MazeSpec& spec, int node, LatticePoint incoming) {
  const LatticePoint here = spec.nodes[static_cast<std::size_t>(node)];
  const LatticePoint goal = spec.nodes[static_cast<std::size_t>(spec.goal)];
  const LatticePoint reverse{-incoming.x, -incoming.y};
  const bool moving = incoming.x != 0 || incoming.y != 0;

  int straight = -1;
  std::vector<int> perpendicular;
  for (int next : spec.neighbors(node)) {
    const LatticePoint d = direction(here, spec.nodes[static_cast<std::size_t>(next)]);
    if (moving && d == reverse) continue;
    if (moving && d == incoming) {
      straight = next;
    } else {
      perpendicular.push_back(next);
    }
  }
  if (straight < 0 && perpendicular.empty())
    throw ConfigError("maze: no non-reversing corridor at node " + std::to_string(node));

  auto pick = [&](int next, TurnKind kind) {
    return HeadingChoice{direction(here, spec.nodes[static_cast<std::size_t>(next)]), next, kind,
                         straight >= 0};
  };
  if (straight >= 0 && perpendicular.empty()) return pick(straight, TurnKind::kForced);
  if (straight >= 0 && rng.bernoulli(0.5) == 1) return pick(straight, TurnKind::kStraight);

  std::vector<int> toward;
  for (int next : perpendicular)
    if (manhattan(spec.nodes[static_cast<std::size_t>(next)], goal) < manhattan(here, goal))
      toward.push_back(next);
  const std::vector<int>& pool = toward.empty() ? perpendicular : toward;
  const int chosen = pool[rng.uniform_index(pool.size())];
  const bool free_choice = straight >= 0 || perpendicular.size() > 1;
  return pick(chosen, free_choice ? TurnKind::kTurn : TurnKind::kForced);
}

Episode simulate_maze_episode(Rng& rng, const MazeSpec& spec, Index max_steps) {
  spec.validate();
  if (max_steps < 1) throw ContractError("simulate_maze_episode: max_steps must be positive");
  Episode e;
  e.process = "maze";
  e.id = static_cast<std::int64_t>(rng.stream());
  e.seed = rng.seed();
  nlohmann::json events = nlohmann::json::array();

  LatticePoint pos = spec.nodes[static_cast<std::size_t>(spec.start)];
  std::vector<LatticePoint> path{pos};
  HeadingChoice choice = choose_heading(rng, spec, spec.start, {0, 0});
  auto record = [&](Index step, int node, const HeadingChoice& c) {
    events.push_back({{"step", step},
                      {"node", {spec.nodes[static_cast<std::size_t>(node)].x,
                                spec.nodes[static_cast<std::size_t>(node)].y}},
                      {"degree", spec.degree(node)},
                      {"decision", kind_name(c.kind)},
                      {"straight_available", c.straight_available}});
  };
  record(0, spec.start, choice);

  for (Index step = 1; step <= max_steps; ++step) {
    const int length = rng.bernoulli(0.2) == 1 ? 2 : 1;
    const LatticePoint target = spec.nodes[static_cast<std::size_t>(choice.next_node)];
    const int move = std::min(length, manhattan(pos, target));
    pos = {pos.x + choice.heading.x * move, pos.y + choice.heading.y * move};
    path.push_back(pos);
    if (pos == target) {
      if (choice.next_node == spec.goal) break;
      const int node = choice.next_node;
      choice = choose_heading(rng, spec, node, choice.heading);
      record(step, node, choice);
    }
  }

  e.samples.resize(static_cast<Index>(path.size()), 2);
  for (std::size_t t = 0; t < path.size(); ++t)
    e.samples.row(static_cast<Index>(t)) << path[t].x, path[t].y;
  e.labels = {{"events", events},
              {"reached_goal", path.back() == spec.nodes[static_cast<std::size_t>(spec.goal)]}};
  return e;
}

}  // namespace raflow
