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
#include "raflow/io.hpp"
#include "raflow/rnn_gaussian.hpp"
#include "raflow/simulators.hpp"
#include "raflow/train_config.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace raflow;
using raflow::testing::random_matrix;

namespace {

std::vector<Matrix> values(const ParameterList& params) {
  std::vector<Matrix> out;
  for (const Parameter* p : params) out.push_back(p->value());
  return out;
}

std::string serialize(const nlohmann::json& descriptor, const ParameterList& params) {
  std::ostringstream out;
  write_checkpoint(out, descriptor, params);
  return out.str();
}

Checkpoint parse(const std::string& bytes) {
  std::istringstream in(bytes);
  return read_checkpoint(in);
}

std::unique_ptr<SequenceModel> trained_like(ModelKind kind, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::unique_ptr<SequenceModel> model;
  if (kind == ModelKind::kRaf) {
    RafGraphOptions o;
    o.dim = 2;
    o.layers = 3;
    o.hidden = 7;
    o.permutation = PermutationKind::kRandom;
    o.permutation_seed = seed;
    o.activation = {Activation::kSoftLeaky, 0.6};
    model = make_raf_graph(o);
  } else if (kind == ModelKind::kRealNvp) {
    model = make_realnvp_graph(2, 3, 8);
  } else {
    model = std::make_unique<RnnGaussian>(2, 6);
  }
  model->set_standardizer(Standardizer::fit(random_matrix(rng, 30, 2, 3.0)));
  for (Parameter* p : model->parameters()) p->fill_uniform(rng, 0.7);
  return model;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit-exact") {
  for (ModelKind kind : {ModelKind::kRaf, ModelKind::kRealNvp, ModelKind::kRnnGaussian}) {
    auto model = trained_like(kind, 3);
    const nlohmann::json descriptor = {{"model", model->describe()}, {"note", "x"}};
    const std::string bytes = serialize(descriptor, model->parameters());
    CHECK(bytes.compare(0, 8, "RAFCKPT1") == 0);
    const Checkpoint ckpt = parse(bytes);
    CHECK(ckpt.descriptor == descriptor);
    LoadedModel loaded = instantiate(ckpt);
    REQUIRE(loaded.sequence);
    CHECK(values(loaded.sequence->parameters()) == values(model->parameters()));
    CHECK(loaded.sequence->describe() == model->describe());
    CHECK(loaded.sequence->standardizer().shift == model->standardizer().shift);
    CHECK(loaded.sequence->standardizer().scale == model->standardizer().scale);
    Rng sample_rng(4, 0);
    const Matrix samples = random_matrix(sample_rng, 6, 2);
    CHECK(step_log_probs(*loaded.sequence, samples) == step_log_probs(*model, samples));
    CHECK(serialize(descriptor, loaded.sequence->parameters()) == bytes);
  }
}

TEST_CASE("fluid checkpoint round trip") {
  FluidModel model(4, 2, 6, {Activation::kSoftLeaky, 0.6}, PermutationKind::kReverse);
  Rng rng(5, 0);
  model.initialize(rng);
  for (Parameter* p : model.parameters()) p->fill_uniform(rng, 0.3);
  const nlohmann::json descriptor = {{"model", model.describe()}};
  const Checkpoint ckpt = parse(serialize(descriptor, model.parameters()));
  LoadedModel loaded = instantiate(ckpt);
  REQUIRE(loaded.fluid);
  CHECK(values(loaded.fluid->parameters()) == values(model.parameters()));
  const Matrix context = random_matrix(rng, 3, 16);
  CHECK(predict_distribution(*loaded.fluid, context) == predict_distribution(model, context));
}

TEST_CASE("checkpoint entries carry names and shapes") {
  Parameter w("layer.W", {2, 3}), b("layer.b", {2});
  w.mutable_value() << 1, 2, 3, 4, 5, 6;
  b.mutable_value() << -0.0, 1e-300;
  const Checkpoint ckpt = parse(serialize({{"k", 1}}, {&w, &b}));
  REQUIRE(ckpt.entries.size() == 2);
  CHECK(ckpt.entries[0].name == "layer.W");
  CHECK(ckpt.entries[0].shape == std::vector<Index>{2, 3});
  CHECK(ckpt.entries[1].shape == std::vector<Index>{2});
  CHECK(ckpt.entries[0].values == w.value());
  CHECK(std::signbit(ckpt.entries[1].values(0, 0)));
  CHECK(ckpt.entries[1].values(1, 0) == 1e-300);
}

TEST_CASE("corrupt checkpoints are rejected") {
  auto model = trained_like(ModelKind::kRaf, 6);
  const std::string bytes = serialize({{"model", model->describe()}}, model->parameters());

  std::string bad = bytes;
  bad[3] = 'X';
  CHECK_THROWS_AS(parse(bad), IoError);
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{12}, bytes.size() / 2, bytes.size() - 1})
    CHECK_THROWS_AS(parse(bytes.substr(0, cut)), IoError);
  CHECK_THROWS_AS(parse(bytes + "z"), IoError);
  try {
    parse(bytes.substr(0, bytes.size() - 3));
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }
}

TEST_CASE("apply_checkpoint never leaves a partial model") {
  auto source = trained_like(ModelKind::kRnnGaussian, 7);
  auto target = trained_like(ModelKind::kRnnGaussian, 8);
  Checkpoint ckpt = parse(serialize({{"model", source->describe()}}, source->parameters()));
  const std::vector<Matrix> before = values(target->parameters());

  Checkpoint wrong_shape = ckpt;
  wrong_shape.entries.back().shape = {5};
  wrong_shape.entries.back().values = Matrix::Zero(5, 1);
  CHECK_THROWS_AS(apply_checkpoint(wrong_shape, target->parameters()), ContractError);
  CHECK(values(target->parameters()) == before);

  Checkpoint wrong_name = ckpt;
  wrong_name.entries.back().name = "nope";
  CHECK_THROWS_AS(apply_checkpoint(wrong_name, target->parameters()), ContractError);
  CHECK(values(target->parameters()) == before);

  Checkpoint missing = ckpt;
  missing.entries.pop_back();
  CHECK_THROWS_AS(apply_checkpoint(missing, target->parameters()), ContractError);
  CHECK(values(target->parameters()) == before);

  apply_checkpoint(ckpt, target->parameters());
  CHECK(values(target->parameters()) == values(source->parameters()));

  Checkpoint unknown = ckpt;
  unknown.descriptor["model"]["model"] = "transformer";
  CHECK_THROWS_AS(instantiate(unknown), ConfigError);
}

TEST_CASE("checkpoint files") {
  const auto dir = std::filesystem::temp_directory_path() / "raflow_test_io";
  std::filesystem::create_directories(dir);
  auto model = trained_like(ModelKind::kRealNvp, 9);
  save_checkpoint(dir / "m.ckpt", {{"model", model->describe()}}, model->parameters());
  const LoadedModel loaded = instantiate(load_checkpoint(dir / "m.ckpt"));
  CHECK(values(loaded.sequence->parameters()) == values(model->parameters()));
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), IoError);
  CHECK_THROWS_AS(save_checkpoint(dir / "no" / "such" / "dir.ckpt", {}, model->parameters()), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset round trip") {
  std::vector<Episode> eps;
  for (std::uint64_t i = 0; i < 3; ++i) {
    Rng h(1, i), m(2, i);
    eps.push_back(sample_hierarchical_episode(h, 5));
  }
  eps[1].samples(0, 0) = 0.1 + 0.2;  // needs 17 digits
  std::ostringstream out;
  write_dataset(out, eps, "hierarchical episodes");
  const std::string text = out.str();
  CHECK(text.rfind("# hierarchical episodes\n", 0) == 0);
  std::istringstream in(text);
  const std::vector<Episode> back = read_dataset(in);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].process == eps[i].process);
    CHECK(back[i].id == eps[i].id);
    CHECK(back[i].seed == eps[i].seed);
    CHECK(back[i].labels == eps[i].labels);
    CHECK(back[i].samples == eps[i].samples);
  }
  std::ostringstream again;
  write_dataset(again, back, "hierarchical episodes");
  CHECK(again.str() == text);

  Rng rng(3, 0);
  const Episode maze = simulate_maze_episode(rng, MazeSpec::lattice());
  CHECK(episode_from_json(episode_to_json(maze)).labels == maze.labels);
}

TEST_CASE("dataset parsing errors") {
  std::ostringstream empty;
  write_dataset(empty, {}, "nothing");
  std::istringstream e(empty.str());
  CHECK(read_dataset(e).empty());

  std::istringstream garbage("# c\n{\"process\": \"maze\"\n");
  try {
    read_dataset(garbage);
    FAIL("expected IoError");
  } catch (const IoError& err) {
    CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  }
  std::istringstream mixed(
      "{\"process\":\"x\",\"id\":0,\"seed\":0,\"labels\":{},\"samples\":[[1,2]]}\n"
      "{\"process\":\"x\",\"id\":1,\"seed\":0,\"labels\":{},\"samples\":[[1,2,3]]}\n");
  CHECK_THROWS_AS(read_dataset(mixed), DimensionError);
  std::istringstream ragged("{\"process\":\"x\",\"id\":0,\"seed\":0,\"labels\":{},\"samples\":[[1,2],[3]]}\n");
  CHECK_THROWS(read_dataset(ragged));
  CHECK_THROWS_AS(load_dataset("/nonexistent/raflow.jsonl"), IoError);
}
