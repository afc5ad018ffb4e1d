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

#include "cli.hpp"

#include "raflow/io.hpp"
#include "raflow/simulators.hpp"
#include "raflow/train.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>

namespace raflow::cli {
namespace {

struct UsageError : Error {
  using Error::Error;
};

std::string format_double(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::uint64_t env_seed() {
  const char* s = std::getenv("RAFLOW_SEED");
  if (s == nullptr || *s == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw UsageError("RAFLOW_SEED is not an unsigned integer: " + std::string(s));
  return v;
}

std::string read_text(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw UsageError(std::string(what) + " not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

// generate

struct GenerateArgs {
  std::string process;
  Index episodes = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<Index> length;
  Index grid = 16;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const std::uint64_t seed = a.seed ? *a.seed : env_seed();
  if (a.episodes < 0) throw UsageError("--episodes must be >= 0");
  std::vector<Episode> episodes;
  episodes.reserve(static_cast<std::size_t>(a.episodes));
  Index length = 0;
  if (a.process == "hierarchical") {
    length = a.length.value_or(100);
    for (Index i = 0; i < a.episodes; ++i) {
      Rng rng(seed, static_cast<std::uint64_t>(i));
      episodes.push_back(sample_hierarchical_episode(rng, length));
    }
  } else if (a.process == "maze") {
    length = a.length.value_or(200);
    const MazeSpec spec = MazeSpec::lattice();
    for (Index i = 0; i < a.episodes; ++i) {
      Rng rng(seed, static_cast<std::uint64_t>(i));
      episodes.push_back(simulate_maze_episode(rng, spec, length));
    }
  } else if (a.process == "fluid") {
    length = a.length.value_or(8);
    FluidParams params;
    params.grid = a.grid;
    for (Index i = 0; i < a.episodes; ++i) {
      Rng rng(seed, static_cast<std::uint64_t>(i));
      episodes.push_back(simulate_fluid_episode(rng, params, length));
    }
  } else {
    throw UsageError("unknown process '" + a.process + "' (expected hierarchical, maze or fluid)");
  }
  std::ofstream file = open_out(a.out);
  write_dataset(file, episodes,
                "raflow dataset process=" + a.process + " episodes=" + std::to_string(a.episodes) +
                    " seed=" + std::to_string(seed) + " length=" + std::to_string(length));
  finish(file, a.out);
  out << "wrote " << a.episodes << " " << a.process << " episodes to " << a.out << '\n';
  return kExitOk;
}

// train

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string metrics;
  bool verbose = false;
};

bool names_seed(const std::string& text) {
  static const std::regex seed_line(R"((^|\n)[ \t]*seed[ \t]*=)");
  return std::regex_search(text, seed_line);
}

std::vector<Episode> load_episodes(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw UsageError("data file not found: " + path);
  return load_dataset(path);
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const std::string text = read_text(a.config, "config file");
  TrainConfig config = TrainConfig::parse_string(text);
  if (a.seed) {
    config.seed = *a.seed;
  } else if (!names_seed(text)) {
    config.seed = env_seed();
  }
  const std::vector<Episode> data = load_episodes(a.data);
  check_dataset(config, data);

  const std::string metrics_path = a.metrics.empty() ? a.out + ".metrics.csv" : a.metrics;
  std::ofstream metrics = open_out(metrics_path);
  metrics << "epoch,loss,wall_seconds\n";
  auto on_epoch = [&](const EpochRecord& r) {
    metrics << r.epoch << ',' << format_double(r.loss) << ',' << format_double(r.seconds, "%.6f") << '\n';
    if (a.verbose) out << "epoch " << r.epoch << " loss " << format_double(r.loss, "%.6f") << '\n';
  };

  nlohmann::json descriptor = {{"format", 1}, {"config", config.to_json()}};
  TrainResult result;
  ParameterList params;
  std::unique_ptr<SequenceModel> sequence;
  std::unique_ptr<FluidModel> fluid;
  if (config.experiment == ExperimentId::kFluid) {
    fluid = build_fluid_model(config, data);
    result = train_fluid_model(*fluid, data, config, on_epoch);
    descriptor["model"] = fluid->describe();
    params = fluid->parameters();
    if (!result.aborted) descriptor["final_mean_kl"] = evaluate_fluid_kl(*fluid, data).mean;
  } else {
    sequence = build_sequence_model(config, data);
    result = train_sequence_model(*sequence, data, config, on_epoch);
    descriptor["model"] = sequence->describe();
    params = sequence->parameters();
    if (!result.aborted)
      descriptor["final_mean_log_density"] = evaluate_avg_log_density(*sequence, data).mean;
  }
  finish(metrics, metrics_path);
  descriptor["epochs_completed"] = result.log.size();
  descriptor["aborted"] = result.aborted;
  if (result.aborted) descriptor["diagnostic"] = result.diagnostic;
  save_checkpoint(a.out, descriptor, params);
  if (result.aborted) {
    err << "training aborted (" << result.diagnostic << "); last good checkpoint written to " << a.out << '\n';
    return kExitNumeric;
  }
  out << "trained " << to_string(config.model) << " on " << data.size() << " episodes for "
      << result.log.size() << " epochs; final loss "
      << format_double(result.log.empty() ? 0.0 : result.log.back().loss, "%.6f") << "; checkpoint "
      << a.out << '\n';
  return kExitOk;
}

// eval

struct EvalArgs {
  std::vector<std::string> ckpts;
  std::string data;
  std::string report;
};

nlohmann::json sorted_list(const std::vector<double>& v) { return nlohmann::json(v); }

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const std::vector<Episode> data = load_episodes(a.data);
  if (data.empty()) throw UsageError("no episodes in " + a.data);
  const Index dim = data.front().dim();
  for (const auto& e : data)
    if (e.length() < 2) throw UsageError("episode " + std::to_string(e.id) + " has fewer than 2 steps");
  nlohmann::json rows = nlohmann::json::array();
  for (const std::string& path : a.ckpts) {
    LoadedModel m = instantiate(load_checkpoint(path));
    nlohmann::json row = {{"checkpoint", path}};
    if (m.fluid) {
      const Index cells = m.fluid->autoencoder().grid() * m.fluid->autoencoder().grid();
      if (cells != dim)
        throw UsageError(path + ": model expects " + std::to_string(cells) + "-dimensional fields, data has " +
                         std::to_string(dim));
      const KlReport r = evaluate_fluid_kl(*m.fluid, data);
      const auto [mean, sd] = sorted_mean_std(r.per_episode);
      row["model"] = "fluid_raf";
      row["metric"] = "kl";
      row["mean"] = r.mean;
      row["std"] = sd;
      row["per_step"] = sorted_list(r.per_step);
      row["per_episode"] = sorted_list(r.per_episode);
    } else {
      if (m.sequence->dim() != dim)
        throw UsageError(path + ": model dimension " + std::to_string(m.sequence->dim()) +
                         " does not match data dimension " + std::to_string(dim));
      const DensityReport r = evaluate_avg_log_density(*m.sequence, data);
      row["model"] = m.sequence->name();
      row["metric"] = "avg_log_density";
      row["mean"] = r.mean;
      row["std"] = r.std;
      row["per_episode"] = sorted_list(r.per_episode);
    }
    rows.push_back(std::move(row));
  }
  const nlohmann::json report = {{"data", a.data}, {"episodes", data.size()}, {"models", rows}};
  const std::string text = report.dump(2) + "\n";
  if (a.report.empty()) {
    out << text;
  } else {
    std::ofstream file = open_out(a.report);
    file << text;
    finish(file, a.report);
    for (const auto& row : rows)
      out << row["model"].get<std::string>() << ' ' << row["metric"].get<std::string>() << ' '
          << format_double(row["mean"].get<double>(), "%.6f") << " +- "
          << format_double(row["std"].get<double>(), "%.6f") << '\n';
  }
  return kExitOk;
}

// sample

struct SampleArgs {
  std::string ckpt;
  Index episodes = 10;
  Index steps = 1000;
  Index burnin = 10;
  std::optional<std::uint64_t> seed;
  std::string out;
};

std::unique_ptr<SequenceModel> load_sequence(const std::string& path, nlohmann::json* descriptor) {
  LoadedModel m = instantiate(load_checkpoint(path));
  if (!m.sequence) throw UsageError(path + " holds a fluid model; this command needs a sequence model");
  if (descriptor != nullptr) *descriptor = m.descriptor;
  return std::move(m.sequence);
}

int cmd_sample(const SampleArgs& a, std::ostream& out, std::ostream& err) {
  if (a.steps < 1) throw UsageError("--steps must be >= 1");
  if (a.burnin < 0 || a.burnin >= a.steps) throw UsageError("--burnin must satisfy 0 <= B < T");
  if (a.episodes < 0) throw UsageError("--episodes must be >= 0");
  const std::uint64_t seed = a.seed ? *a.seed : env_seed();
  nlohmann::json descriptor;
  auto model = load_sequence(a.ckpt, &descriptor);
  std::string process = "generated";
  if (descriptor.contains("config")) process = descriptor["config"].value("experiment", process);

  std::vector<Episode> episodes;
  for (Index i = 0; i < a.episodes; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    Episode e;
    e.process = process;
    e.id = i;
    e.seed = seed;
    e.labels = {{"burnin", a.burnin}, {"model", model->name()}};
    e.samples.resize(a.steps, model->dim());
    model->reset(1);
    ad::NoGradGuard no_grad;
    for (Index t = 0; t < a.steps; ++t) {
      try {
        const Matrix x = model->sample(rng, 1);
        e.samples.row(t) = x.col(0).transpose();
        model->observe(ad::constant(x));
      } catch (const Error& ex) {
        err << "sampling failed in episode " << i << " at step " << t << ": " << ex.what() << '\n';
        return kExitNumeric;
      }
    }
    episodes.push_back(std::move(e));
  }
  std::ofstream file = open_out(a.out);
  write_dataset(file, episodes,
                "raflow samples from " + a.ckpt + " episodes=" + std::to_string(a.episodes) +
                    " steps=" + std::to_string(a.steps) + " burnin=" + std::to_string(a.burnin) +
                    " seed=" + std::to_string(seed));
  finish(file, a.out);
  out << "wrote " << a.episodes << " sampled episodes to " << a.out << '\n';
  return kExitOk;
}

// density-grid

struct GridArgs {
  std::string ckpt;
  std::string context;
  Index episode = 0;
  std::optional<Index> prefix;
  double xmin = -5.0, xmax = 5.0, ymin = -5.0, ymax = 5.0;
  Index resolution = 101;
  std::string out;
};

int cmd_density_grid(const GridArgs& a, std::ostream& out) {
  if (a.resolution < 2) throw UsageError("--resolution must be >= 2");
  if (!(a.xmax > a.xmin) || !(a.ymax > a.ymin)) throw UsageError("grid bounds must satisfy min < max");
  auto model = load_sequence(a.ckpt, nullptr);
  if (model->dim() != 2) throw UsageError("density-grid needs a 2-dimensional model");
  Matrix context(0, 2);
  if (!a.context.empty()) {
    const std::vector<Episode> eps = load_episodes(a.context);
    if (a.episode < 0 || a.episode >= static_cast<Index>(eps.size()))
      throw UsageError("--episode " + std::to_string(a.episode) + " is out of range");
    const Episode& e = eps[static_cast<std::size_t>(a.episode)];
    if (e.dim() != 2) throw UsageError("context episode is not 2-dimensional");
    const Index n = a.prefix ? *a.prefix : e.length();
    if (n < 0 || n > e.length()) throw UsageError("--prefix exceeds the context episode length");
    context = e.samples.topRows(n);
  }
  const Index r = a.resolution;
  auto coord = [](double lo, double hi, Index i, Index n) {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  ad::NoGradGuard no_grad;
  model->reset(r);
  for (Index t = 0; t < context.rows(); ++t)
    model->observe(ad::constant(context.row(t).transpose().replicate(1, r)));

  std::ofstream file = open_out(a.out);
  file << "y\\x";
  for (Index j = 0; j < r; ++j) file << ',' << format_double(coord(a.xmin, a.xmax, j, r));
  file << '\n';
  Matrix points(2, r);
  for (Index j = 0; j < r; ++j) points(0, j) = coord(a.xmin, a.xmax, j, r);
  for (Index i = 0; i < r; ++i) {
    const double y = coord(a.ymin, a.ymax, i, r);
    points.row(1).setConstant(y);
    const Matrix lp = model->log_prob(ad::constant(points)).value();
    file << format_double(y);
    for (Index j = 0; j < r; ++j) file << ',' << format_double(lp(0, j));
    file << '\n';
  }
  finish(file, a.out);
  out << "wrote " << r << "x" << r << " log-density grid to " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"raflow: recurrent autoregressive flows"};
  app.require_subcommand(1);

  GenerateArgs gen;
  std::uint64_t gen_seed = 0;
  auto* g = app.add_subcommand("generate", "Simulate episodes of a stochastic process");
  g->add_option("--process", gen.process, "hierarchical | maze | fluid")->required();
  g->add_option("--episodes", gen.episodes, "Number of episodes")->required();
  auto* g_seed = g->add_option("--seed", gen_seed, "Seed (default: RAFLOW_SEED, then 0)");
  g->add_option("--out", gen.out, "Output dataset path")->required();
  Index gen_length = 0;
  auto* g_len = g->add_option("--length", gen_length,
                              "Samples per episode (hierarchical 100, maze max steps 200, fluid steps 8)");
  g->add_option("--grid", gen.grid, "Fluid grid size");

  TrainArgs tr;
  std::uint64_t tr_seed = 0;
  auto* t = app.add_subcommand("train", "Train a model on a dataset");
  t->add_option("--config", tr.config, "Config file")->required();
  t->add_option("--data", tr.data, "Dataset file")->required();
  t->add_option("--out", tr.out, "Checkpoint path")->required();
  auto* t_seed = t->add_option("--seed", tr_seed, "Override the config seed");
  t->add_option("--metrics", tr.metrics, "Metrics log path (default: <out>.metrics.csv)");
  t->add_flag("--verbose", tr.verbose, "Print every epoch");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate checkpoints on a dataset");
  e->add_option("--ckpt", ev.ckpts, "Checkpoint (repeatable)")->required();
  e->add_option("--data", ev.data, "Dataset file")->required();
  e->add_option("--report", ev.report, "JSON report path (default: stdout)");

  SampleArgs sa;
  std::uint64_t sa_seed = 0;
  auto* s = app.add_subcommand("sample", "Generate episodes from a trained model");
  s->add_option("--ckpt", sa.ckpt, "Checkpoint")->required();
  s->add_option("--episodes", sa.episodes, "Number of episodes");
  s->add_option("--steps", sa.steps, "Steps per episode");
  s->add_option("--burnin", sa.burnin, "Leading steps flagged as burn-in");
  auto* s_seed = s->add_option("--seed", sa_seed, "Seed (default: RAFLOW_SEED, then 0)");
  s->add_option("--out", sa.out, "Output dataset path")->required();

  GridArgs gr;
  Index gr_prefix = 0;
  auto* d = app.add_subcommand("density-grid", "Export log p(x_next | context) on a 2-D grid");
  d->add_option("--ckpt", gr.ckpt, "Checkpoint")->required();
  d->add_option("--context", gr.context, "Dataset holding the context episode");
  d->add_option("--episode", gr.episode, "Context episode index");
  auto* d_prefix = d->add_option("--prefix", gr_prefix, "Number of context steps (default: all)");
  d->add_option("--xmin", gr.xmin);
  d->add_option("--xmax", gr.xmax);
  d->add_option("--ymin", gr.ymin);
  d->add_option("--ymax", gr.ymax);
  d->add_option("--resolution", gr.resolution, "Points per axis");
  d->add_option("--out", gr.out, "Output CSV path")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*g) {
      if (*g_seed) gen.seed = gen_seed;
      if (*g_len) gen.length = gen_length;
      return cmd_generate(gen, out);
    }
    if (*t) {
      if (*t_seed) tr.seed = tr_seed;
      return cmd_train(tr, out, err);
    }
    if (*e) return cmd_eval(ev, out);
    if (*s) {
      if (*s_seed) sa.seed = sa_seed;
      return cmd_sample(sa, out, err);
    }
    if (*d) {
      if (*d_prefix) gr.prefix = gr_prefix;
      return cmd_density_grid(gr, out);
    }
  } catch (const IoError& ex) {
    err << "I/O error: " << ex.what() << '\n';
    return kExitIo;
  } catch (const NumericError& ex) {
    err << "numeric error: " << ex.what() << '\n';
    return kExitNumeric;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace raflow::cli
