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

#include "raflow/io.hpp"

#include "raflow/flow_graph.hpp"
#include "raflow/rnn_gaussian.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace raflow {
namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(bytes, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw IoError(std::string("checkpoint truncated while reading ") + what);
  }
  std::uint64_t u64(const char* what) {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string string(std::uint64_t n, const char* what) {
    if (n > (std::uint64_t{1} << 32)) throw IoError(std::string("checkpoint ") + what + " length is implausible");
    std::string s(static_cast<std::size_t>(n), '\0');
    bytes(s.data(), s.size(), what);
    return s;
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const nlohmann::json& descriptor,
                      const ParameterList& params) {
  out.write(kCheckpointMagic, 8);
  const std::string text = descriptor.dump();
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_u64(out, params.size());
  for (const Parameter* p : params) {
    put_u64(out, p->name().size());
    out.write(p->name().data(), static_cast<std::streamsize>(p->name().size()));
    put_u64(out, p->shape().size());
    for (Index e : p->shape()) put_u64(out, static_cast<std::uint64_t>(e));
    const Matrix& v = p->value();  // row-major storage
    for (Index i = 0; i < v.size(); ++i) put_f64(out, v.data()[i]);
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.bytes(magic, 8, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0) throw IoError("not a raflow checkpoint (bad magic)");
  Checkpoint ckpt;
  const std::string text = r.string(r.u64("descriptor length"), "descriptor");
  try {
    ckpt.descriptor = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint descriptor is not valid JSON: ") + e.what());
  }
  const std::uint64_t count = r.u64("entry count");
  if (count > 100000) throw IoError("checkpoint entry count is implausible");
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedArray a;
    a.name = r.string(r.u64("entry name length"), "entry name");
    const std::uint64_t rank = r.u64("entry rank");
    if (rank < 1 || rank > 2) throw IoError("checkpoint entry '" + a.name + "' has unsupported rank");
    std::uint64_t total = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      const std::uint64_t e = r.u64("entry extent");
      if (e > (std::uint64_t{1} << 28)) throw IoError("checkpoint entry '" + a.name + "' extent is implausible");
      a.shape.push_back(static_cast<Index>(e));
      total *= e;
    }
    if (total > (std::uint64_t{1} << 28)) throw IoError("checkpoint entry '" + a.name + "' is implausibly large");
    a.values.resize(a.shape[0], rank == 2 ? a.shape[1] : 1);
    for (Index i = 0; i < a.values.size(); ++i) a.values.data()[i] = r.f64("entry payload");
    ckpt.entries.push_back(std::move(a));
  }
  if (!r.at_end()) throw IoError("checkpoint has trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& descriptor,
                     const ParameterList& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, descriptor, params);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

void apply_checkpoint(const Checkpoint& ckpt, const ParameterList& params) {
  std::map<std::string, const NamedArray*> by_name;
  for (const auto& e : ckpt.entries)
    if (!by_name.emplace(e.name, &e).second) throw ContractError("checkpoint repeats entry '" + e.name + "'");
  if (by_name.size() != params.size())
    throw ContractError("checkpoint holds " + std::to_string(by_name.size()) + " arrays, model expects " +
                        std::to_string(params.size()));
  for (const Parameter* p : params) {
    const auto it = by_name.find(p->name());
    if (it == by_name.end()) throw ContractError("checkpoint lacks parameter '" + p->name() + "'");
    if (it->second->shape != p->shape())
      throw ContractError("checkpoint parameter '" + p->name() + "' has the wrong shape");
  }
  // Validated in full before anything is written.
  for (Parameter* p : params) p->assign(by_name.at(p->name())->values);
}

std::unique_ptr<SequenceModel> sequence_model_from_descriptor(const nlohmann::json& d) {
  const std::string kind = d.at("model").get<std::string>();
  if (kind == "raf" || kind == "realnvp") return flow_graph_from_descriptor(d);
  if (kind == "rnn_gaussian") {
    auto model = std::make_unique<RnnGaussian>(d.at("dim").get<Index>(), d.at("hidden").get<Index>());
    const auto shift = d.at("shift").get<std::vector<double>>();
    model->set_standardizer({Eigen::Map<const Vector>(shift.data(), static_cast<Index>(shift.size())),
                             d.at("scale").get<double>()});
    return model;
  }
  throw ConfigError("unknown model '" + kind + "' in checkpoint");
}

LoadedModel instantiate(const Checkpoint& ckpt) {
  LoadedModel out;
  out.descriptor = ckpt.descriptor;
  try {
    const nlohmann::json& model = ckpt.descriptor.at("model");
    if (model.at("model").get<std::string>() == "fluid_raf") {
      out.fluid = FluidModel::from_descriptor(model);
      apply_checkpoint(ckpt, out.fluid->parameters());
    } else {
      out.sequence = sequence_model_from_descriptor(model);
      apply_checkpoint(ckpt, out.sequence->parameters());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint descriptor: ") + e.what());
  }
  return out;
}

nlohmann::json episode_to_json(const Episode& e) {
  nlohmann::json samples = nlohmann::json::array();
  for (Index t = 0; t < e.samples.rows(); ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (Index k = 0; k < e.samples.cols(); ++k) row.push_back(e.samples(t, k));
    samples.push_back(std::move(row));
  }
  return {{"process", e.process}, {"id", e.id}, {"seed", e.seed}, {"labels", e.labels}, {"samples", samples}};
}

Episode episode_from_json(const nlohmann::json& j) {
  Episode e;
  e.process = j.at("process").get<std::string>();
  e.id = j.at("id").get<std::int64_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.labels = j.contains("labels") ? j.at("labels") : nlohmann::json::object();
  const auto& samples = j.at("samples");
  if (!samples.is_array()) throw IoError("episode samples must be an array");
  const Index t = static_cast<Index>(samples.size());
  const Index k = t > 0 ? static_cast<Index>(samples.at(0).size()) : 0;
  e.samples.resize(t, k);
  for (Index i = 0; i < t; ++i) {
    const auto& row = samples.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != k)
      throw DimensionError("episode " + std::to_string(e.id) + ": ragged samples");
    for (Index c = 0; c < k; ++c) e.samples(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return e;
}

void write_dataset(std::ostream& out, const std::vector<Episode>& episodes, const std::string& comment) {
  out << "# " << comment << '\n';
  for (const auto& e : episodes) out << episode_to_json(e).dump() << '\n';
}

void save_dataset(const std::filesystem::path& path, const std::vector<Episode>& episodes,
                  const std::string& comment) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_dataset(out, episodes, comment);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<Episode> read_dataset(std::istream& in) {
  std::vector<Episode> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(episode_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
    if (out.size() > 1 && out.back().dim() != out.front().dim())
      throw DimensionError("dataset line " + std::to_string(line_no) +
                           ": sample dimensionality differs from earlier episodes");
  }
  return out;
}

std::vector<Episode> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return read_dataset(in);
}

}  // namespace raflow
