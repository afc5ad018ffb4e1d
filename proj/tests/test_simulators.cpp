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

#include <doctest.h>

#include <cmath>

using namespace raflow;

namespace {

// Least-squares slope of y on x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

MazeSpec straight_corridor(int length) {
  MazeSpec spec;
  spec.nodes = {{0, 0}, {length, 0}};
  spec.edges = {{0, 1}};
  spec.start = 0;
  spec.goal = 1;
  return spec;
}

// A T junction: approach from the west along y = 0, straight continues east,
// one branch goes north.
MazeSpec t_junction() {
  MazeSpec spec;
  spec.nodes = {{0, 0}, {4, 0}, {8, 0}, {4, 4}};
  spec.edges = {{0, 1}, {1, 2}, {1, 3}};
  spec.start = 0;
  spec.goal = 2;
  return spec;
}

FluidField uniform_field(Index g, double value) { return {Matrix::Constant(g, g, value), 1.0, 0}; }

}  // namespace

TEST_CASE("hierarchical examples") {
  CHECK(hierarchical_x0_mean(1, 2.0) == 1.0);
  CHECK(hierarchical_mode_mean(0) == -1.0);
  Rng rng(1, 0);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) sum += sample_hierarchical_point(rng, 0)(1);
  CHECK(sum / 20000.0 == doctest::Approx(-1.0).epsilon(0.05));
  const Episode e = sample_hierarchical_episode(rng, 7, 0.5, 1);
  CHECK(e.process == "hierarchical");
  CHECK(e.length() == 7);
  CHECK(e.dim() == 2);
  CHECK(e.labels["y"] == 1);
  CHECK_THROWS_AS(sample_hierarchical_episode(rng, 0), ContractError);
}

TEST_CASE("hierarchical moments") {
  int ones = 0;
  for (std::uint64_t id = 0; id < 10000; ++id) {
    Rng rng(2, id);
    ones += sample_hierarchical_episode(rng, 1).labels["y"].get<int>();
  }
  CHECK(std::abs(ones / 10000.0 - 0.5) < 0.015);

  for (int mode : {0, 1}) {
    Rng rng(3, static_cast<std::uint64_t>(mode));
    std::vector<double> x1sq, x0;
    double s = 0.0, ss = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const Vector p = sample_hierarchical_point(rng, mode);
      s += p(1);
      ss += p(1) * p(1);
      x1sq.push_back(p(1) * p(1));
      x0.push_back(p(0));
    }
    const double var = ss / n - (s / n) * (s / n);
    CHECK(std::abs(var - 4.0) < 0.2);
    const double expected = 0.25 * hierarchical_mode_mean(mode);
    CHECK(std::abs(slope(x1sq, x0) - expected) < 0.05 * std::abs(expected));
  }
}

TEST_CASE("generators are reproducible per seed and episode id") {
  Rng a(9, 4), b(9, 4), c(9, 5);
  const Episode ea = sample_hierarchical_episode(a, 50);
  const Episode eb = sample_hierarchical_episode(b, 50);
  const Episode ec = sample_hierarchical_episode(c, 50);
  CHECK(ea.samples == eb.samples);
  CHECK(ea.samples != ec.samples);
  const MazeSpec spec = MazeSpec::lattice();
  Rng m1(9, 4), m2(9, 4);
  CHECK(simulate_maze_episode(m1, spec).samples == simulate_maze_episode(m2, spec).samples);
  Rng f1(9, 4), f2(9, 4);
  CHECK(simulate_fluid_episode(f1, FluidParams{}).samples == simulate_fluid_episode(f2, FluidParams{}).samples);
}

TEST_CASE("maze spec validation") {
  const MazeSpec lattice = MazeSpec::lattice();
  CHECK_NOTHROW(lattice.validate());
  CHECK(lattice.nodes.size() == 25);
  CHECK(lattice.degree(lattice.node_at({8, 8})) == 4);
  CHECK(lattice.degree(lattice.node_at({0, 8})) == 3);
  CHECK(lattice.node_at({1, 1}) == -1);
  CHECK(lattice.on_corridor(1.0, 0.0));
  CHECK_FALSE(lattice.on_corridor(1.0, 1.0));

  MazeSpec split = t_junction();
  split.nodes.push_back({20, 20});
  CHECK_THROWS_AS(split.validate(), ConfigError);
  MazeSpec diagonal = straight_corridor(4);
  diagonal.nodes[1] = {4, 4};
  CHECK_THROWS_AS(diagonal.validate(), ConfigError);
  MazeSpec same = straight_corridor(4);
  same.goal = 0;
  CHECK_THROWS_AS(same.validate(), ConfigError);
  Rng rng(1, 0);
  CHECK_THROWS_AS(simulate_maze_episode(rng, split), ConfigError);
}

TEST_CASE("maze step lengths on a straight corridor") {
  Rng rng(4, 0);
  const Episode e = simulate_maze_episode(rng, straight_corridor(100000), 10000);
  REQUIRE(e.length() == 10001);
  const Vector dx = (e.samples.bottomRows(10000).col(0) - e.samples.topRows(10000).col(0));
  CHECK(std::abs(dx.mean() - 1.2) < 0.02);
  CHECK((e.samples.col(1).array() == 0.0).all());
  CHECK(((dx.array() == 1.0) || (dx.array() == 2.0)).all());
}

TEST_CASE("maze intersection decisions") {
  const MazeSpec spec = t_junction();
  const int junction = spec.node_at({4, 0});
  Rng rng(5, 0);
  int straight = 0;
  for (int i = 0; i < 10000; ++i) {
    const HeadingChoice c = choose_heading(rng, spec, junction, {1, 0});
    CHECK(c.straight_available);
    if (c.kind == TurnKind::kStraight) {
      ++straight;
      CHECK(c.next_node == spec.node_at({8, 0}));
    } else {
      CHECK(c.next_node == spec.node_at({4, 4}));
    }
  }
  CHECK(std::abs(straight / 10000.0 - 0.5) < 0.015);

  // Degree-2 pass-through: straight is the only non-reversing option.
  const MazeSpec line = MazeSpec{{{0, 0}, {4, 0}, {8, 0}}, {{0, 1}, {1, 2}}, 0, 2};
  for (int i = 0; i < 100; ++i) {
    const HeadingChoice c = choose_heading(rng, line, 1, {1, 0});
    CHECK(c.kind == TurnKind::kForced);
    CHECK(c.heading == LatticePoint{1, 0});
  }

  // Coming from the branch, the two perpendicular options prefer the goal.
  for (int i = 0; i < 100; ++i) {
    const HeadingChoice c = choose_heading(rng, spec, junction, {0, -1});
    CHECK(c.next_node == spec.goal);
    CHECK_FALSE(c.straight_available);
  }
}

TEST_CASE("maze walks stay on corridors with axis-aligned steps") {
  const MazeSpec spec = MazeSpec::lattice();
  int continue_count = 0;
  int coin_count = 0;
  for (std::uint64_t id = 0; id < 300; ++id) {
    Rng rng(6, id);
    const Episode e = simulate_maze_episode(rng, spec, 200);
    CHECK(e.length() <= 201);
    for (Index t = 0; t < e.length(); ++t) REQUIRE(spec.on_corridor(e.samples(t, 0), e.samples(t, 1)));
    for (Index t = 0; t + 1 < e.length(); ++t) {
      const double dx = std::abs(e.samples(t + 1, 0) - e.samples(t, 0));
      const double dy = std::abs(e.samples(t + 1, 1) - e.samples(t, 1));
      REQUIRE(((dx == 0.0) != (dy == 0.0)));
      REQUIRE(dx + dy <= 2.0);
    }
    if (e.labels["reached_goal"].get<bool>()) {
      CHECK(e.samples(e.length() - 1, 0) == 16.0);
      CHECK(e.samples(e.length() - 1, 1) == 16.0);
    }
    for (const auto& ev : e.labels["events"]) {
      const std::string d = ev["decision"];
      if (!ev["straight_available"].get<bool>() || d == "forced") continue;
      ++coin_count;
      continue_count += d == "straight";
    }
  }
  REQUIRE(coin_count > 1000);
  CHECK(std::abs(static_cast<double>(continue_count) / coin_count - 0.5) < 0.05);
}

TEST_CASE("fluid step examples") {
  FluidParams params;
  const FluidField flat = uniform_field(16, 0.3);
  const FluidField next = fluid_step(flat, params);
  CHECK((next.temperature - flat.temperature).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(next.time == 1);

  // Single hot cell, pure diffusion: hand-evaluated 5-point stencil on mass.
  params.beta = 0.0;
  FluidField hot = uniform_field(16, 0.0);
  hot.temperature(7, 8) = 1.0;
  const FluidField spread = fluid_step(hot, params);
  const double e = std::exp(1.0);
  const double d = params.kappa;
  CHECK(std::exp(spread.temperature(7, 8)) == doctest::Approx(e + d * (4.0 - 4.0 * e)).epsilon(1e-13));
  for (auto [i, j] : {std::pair{6, 8}, {8, 8}, {7, 7}, {7, 9}})
    CHECK(std::exp(spread.temperature(i, j)) == doctest::Approx(1.0 + d * (e - 1.0)).epsilon(1e-13));
  CHECK(spread.temperature(5, 8) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(field_mass(spread) / field_mass(hot) - 1.0) < 1e-12);

  params.kappa = 0.3;
  CHECK_THROWS_AS(fluid_step(hot, params), ConfigError);
  CHECK_THROWS_AS(fluid_step(uniform_field(8, 0.0), FluidParams{}), DimensionError);
}

TEST_CASE("hot blob rises") {
  FluidParams params;
  params.kappa = 0.05;
  FluidField field = uniform_field(16, 0.0);
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j)
      field.temperature(i, j) = std::exp(-(std::pow(i - 11.0, 2) + std::pow(j - 7.5, 2)) / 8.0);
  double row = hot_centroid_row(field);
  for (int s = 0; s < 10; ++s) {
    field = fluid_step(field, params);
    const double r = hot_centroid_row(field);
    CHECK(r < row);
    row = r;
  }
}

TEST_CASE("fluid episodes conserve mass and respect the envelope") {
  FluidParams params;
  for (std::uint64_t id = 0; id < 20; ++id) {
    Rng rng(7, id);
    FluidField field = fluid_initial(rng, params);
    const double lo = field.temperature.minCoeff();
    const double hi = field.temperature.maxCoeff();
    double mass = field_mass(field);
    for (int s = 0; s < 50; ++s) {
      field = fluid_step(field, params);
      const double m = field_mass(field);
      CHECK(std::abs(m / mass - 1.0) < 1e-6);
      mass = m;
      CHECK(field.temperature.minCoeff() >= lo - 1e-12);
      CHECK(field.temperature.maxCoeff() <= hi + 1e-12);
    }
  }
  Rng rng(8, 0);
  const Episode e = simulate_fluid_episode(rng, params);
  CHECK(e.length() == 8);
  CHECK(e.dim() == 256);
  CHECK(e.process == "fluid");
}

TEST_CASE("field_to_distribution") {
  const Matrix u = field_to_distribution(uniform_field(4, 0.0));
  CHECK((u.array() - 1.0 / 16.0).abs().maxCoeff() < 1e-15);
  FluidField two = uniform_field(4, -800.0);
  two.temperature(0, 0) = std::log(3.0);
  two.temperature(2, 1) = 0.0;
  const Matrix p = field_to_distribution(two);
  CHECK(p(0, 0) / p(2, 1) == doctest::Approx(3.0).epsilon(1e-14));
  Rng rng(9, 0);
  FluidParams params;
  FluidField field = fluid_initial(rng, params);
  const double z0 = field_mass(field);
  CHECK(std::abs(field_to_distribution(field).sum() - 1.0) < 1e-12);
  for (int s = 0; s < 7; ++s) {
    field = fluid_step(field, params);
    // The episode normalizer is fixed at t = 0.
    CHECK(std::abs(field_to_distribution(field, z0).sum() - 1.0) < 1e-6);
  }
  CHECK_THROWS_AS(field_to_distribution(field, 0.0), DomainError);
}
