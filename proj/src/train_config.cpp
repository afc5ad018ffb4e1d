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

#include "raflow/train_config.hpp"

#include <charconv>
#include <map>
#include <sstream>

namespace raflow {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + text + "'");
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::string to_string(ExperimentId e) {
  switch (e) {
    case ExperimentId::kHierarchical:
      return "hierarchical";
    case ExperimentId::kMaze:
      return "maze";
    case ExperimentId::kFluid:
      return "fluid";
  }
  return "hierarchical";
}

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::kRaf:
      return "raf";
    case ModelKind::kRealNvp:
      return "realnvp";
    case ModelKind::kRnnGaussian:
      return "rnn_gaussian";
  }
  return "raf";
}

ExperimentId parse_experiment(const std::string& name) {
  if (name == "hierarchical") return ExperimentId::kHierarchical;
  if (name == "maze") return ExperimentId::kMaze;
  if (name == "fluid") return ExperimentId::kFluid;
  throw ConfigError("unknown experiment '" + name + "' (expected hierarchical, maze or fluid)");
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "raf") return ModelKind::kRaf;
  if (name == "realnvp") return ModelKind::kRealNvp;
  if (name == "rnn_gaussian") return ModelKind::kRnnGaussian;
  throw ConfigError("unknown model '" + name + "' (expected raf, realnvp or rnn_gaussian)");
}

Index experiment_dim(ExperimentId e, Index grid) {
  switch (e) {
    case ExperimentId::kHierarchical:
    case ExperimentId::kMaze:
      return 2;
    case ExperimentId::kFluid:
      return grid * grid;
  }
  return 2;
}

TrainConfig TrainConfig::defaults(ExperimentId experiment, ModelKind model) {
  TrainConfig c;
  c.experiment = experiment;
  c.model = model;
  switch (experiment) {
    case ExperimentId::kHierarchical:
      c.layers = 5;
      c.hidden = 16;
      c.epochs = 250;
      c.batch_episodes = 10;
      break;
    case ExperimentId::kMaze:
      c.layers = 8;
      c.hidden = 64;
      c.epochs = 200;
      c.batch_episodes = 10;
      break;
    case ExperimentId::kFluid:
      c.layers = 4;
      c.hidden = 32;
      c.epochs = 150;
      c.batch_episodes = 10;
      c.pretrain_epochs = 500;
      break;
  }
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(kl_weight >= 0.0)) throw ConfigError("kl_weight must be >= 0");
  if (batch_episodes < 0) throw ConfigError("batch_episodes must be >= 0");
  if (layers < 1) throw ConfigError("layers must be >= 1");
  if (hidden < 1) throw ConfigError("hidden must be >= 1");
  if (!(leaky_slope > 0.0)) throw ConfigError("leaky_slope must be > 0");
  if (activation == Activation::kSoftLeaky && leaky_slope > 1.0)
    throw ConfigError("leaky_slope must be <= 1 for softleaky");
  if (!(clip_norm >= 0.0)) throw ConfigError("clip_norm must be >= 0");
  if (truncation < 0) throw ConfigError("truncation must be >= 0");
  if (pretrain_epochs < 0) throw ConfigError("pretrain_epochs must be >= 0");
  if (coupling_width < 1) throw ConfigError("coupling_width must be >= 1");
  if (experiment == ExperimentId::kFluid && model != ModelKind::kRaf)
    throw ConfigError("the fluid experiment trains the raf model only");
  if (experiment != ExperimentId::kFluid && model == ModelKind::kRaf &&
      hidden < required_hidden(experiment_dim(experiment)))
    throw ConfigError("hidden must be >= " + std::to_string(required_hidden(experiment_dim(experiment))) +
                      " for a K = " + std::to_string(experiment_dim(experiment)) + " RAF");
}

TrainConfig TrainConfig::parse(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, int> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    if (seen[key]++ > 0) throw ConfigError("config key '" + key + "' given twice");
    entries.emplace_back(std::move(key), std::move(value));
  }

  ExperimentId experiment = ExperimentId::kHierarchical;
  ModelKind model = ModelKind::kRaf;
  for (const auto& [k, v] : entries) {
    if (k == "experiment") experiment = parse_experiment(v);
    if (k == "model") model = parse_model_kind(v);
  }
  TrainConfig c = defaults(experiment, model);
  for (const auto& [k, v] : entries) {
    if (k == "experiment" || k == "model") continue;
    if (k == "learning_rate") c.learning_rate = parse_number<double>(k, v);
    else if (k == "epochs") c.epochs = parse_number<Index>(k, v);
    else if (k == "batch_episodes") c.batch_episodes = parse_number<Index>(k, v);
    else if (k == "layers") c.layers = parse_number<Index>(k, v);
    else if (k == "hidden") c.hidden = parse_number<Index>(k, v);
    else if (k == "kl_weight") c.kl_weight = parse_number<double>(k, v);
    else if (k == "seed") c.seed = parse_number<std::uint64_t>(k, v);
    else if (k == "activation") c.activation = parse_activation(v);
    else if (k == "leaky_slope") c.leaky_slope = parse_number<double>(k, v);
    else if (k == "permutation") c.permutation = parse_permutation_kind(v);
    else if (k == "coupling_width") c.coupling_width = parse_number<Index>(k, v);
    else if (k == "clip_norm") c.clip_norm = parse_number<double>(k, v);
    else if (k == "truncation") c.truncation = parse_number<Index>(k, v);
    else if (k == "pretrain_epochs") c.pretrain_epochs = parse_number<Index>(k, v);
    else if (k == "standardize") c.standardize = parse_bool(k, v);
    else throw ConfigError("unknown config key '" + k + "'");
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

std::string TrainConfig::to_text() const {
  std::ostringstream out;
  out << "experiment = " << to_string(experiment) << '\n'
      << "model = " << to_string(model) << '\n'
      << "learning_rate = " << format_double(learning_rate) << '\n'
      << "epochs = " << epochs << '\n'
      << "batch_episodes = " << batch_episodes << '\n'
      << "layers = " << layers << '\n'
      << "hidden = " << hidden << '\n'
      << "kl_weight = " << format_double(kl_weight) << '\n'
      << "seed = " << seed << '\n'
      << "activation = " << to_string(activation) << '\n'
      << "leaky_slope = " << format_double(leaky_slope) << '\n'
      << "permutation = " << (permutation == PermutationKind::kReverse ? "reverse" : "random") << '\n'
      << "coupling_width = " << coupling_width << '\n'
      << "clip_norm = " << format_double(clip_norm) << '\n'
      << "truncation = " << truncation << '\n'
      << "pretrain_epochs = " << pretrain_epochs << '\n'
      << "standardize = " << (standardize ? "true" : "false") << '\n';
  return out.str();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"experiment", to_string(experiment)},
          {"model", to_string(model)},
          {"learning_rate", learning_rate},
          {"epochs", epochs},
          {"batch_episodes", batch_episodes},
          {"layers", layers},
          {"hidden", hidden},
          {"kl_weight", kl_weight},
          {"seed", seed},
          {"activation", to_string(activation)},
          {"leaky_slope", leaky_slope},
          {"permutation", permutation == PermutationKind::kReverse ? "reverse" : "random"},
          {"coupling_width", coupling_width},
          {"clip_norm", clip_norm},
          {"truncation", truncation},
          {"pretrain_epochs", pretrain_epochs},
          {"standardize", standardize}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c = defaults(parse_experiment(j.at("experiment").get<std::string>()),
                           parse_model_kind(j.at("model").get<std::string>()));
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<Index>();
  c.batch_episodes = j.at("batch_episodes").get<Index>();
  c.layers = j.at("layers").get<Index>();
  c.hidden = j.at("hidden").get<Index>();
  c.kl_weight = j.at("kl_weight").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.activation = parse_activation(j.at("activation").get<std::string>());
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.permutation = parse_permutation_kind(j.at("permutation").get<std::string>());
  c.coupling_width = j.at("coupling_width").get<Index>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.truncation = j.at("truncation").get<Index>();
  c.pretrain_epochs = j.at("pretrain_epochs").get<Index>();
  c.standardize = j.at("standardize").get<bool>();
  return c;
}

}  // namespace raflow
