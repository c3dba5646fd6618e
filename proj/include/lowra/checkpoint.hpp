// lowra/checkpoint.hpp

// Copyright 2026  The lowra authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOWRA_CHECKPOINT_HPP
#define LOWRA_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lowra/cpc.hpp"
#include "lowra/error.hpp"
#include "lowra/probe.hpp"
#include "lowra/tensor.hpp"

namespace lowra {

// Binary container: magic "CPCA", u32 format version, u32 metadata
// length + UTF-8 JSON, u32 tensor count, then per tensor a u32 name
// length, the name, u32 rank, u32 dims, and row-major little-endian
// 32-bit floats.  No timestamps anywhere: the same model saves to the
// same bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'C', 'P', 'C', 'A'};

struct CheckpointData {
  std::string metadata_json;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

namespace detail {

inline void put_u32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v & 0xff),
      static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff),
      static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f32(std::ofstream& out, float f) {
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

inline std::uint32_t take_u32(std::ifstream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    fail(ErrorCode::Truncated, "checkpoint ends inside " + what);
  return static_cast<std::uint32_t>(b[0]) |
         static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 |
         static_cast<std::uint32_t>(b[3]) << 24;
}

inline float take_f32(std::ifstream& in, const std::string& what) {
  return std::bit_cast<float>(take_u32(in, what));
}

}  // namespace detail

inline void save_checkpoint(const CheckpointData& data,
                            const std::filesystem::path& path) {
  std::set<std::string> seen;
  for (const auto& [name, t] : data.tensors)
    if (!seen.insert(name).second)
      fail(ErrorCode::DuplicateId, "duplicate tensor name '" + name + "'");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kCheckpointMagic, 4);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(data.metadata_json.size()));
  out.write(data.metadata_json.data(),
            static_cast<std::streamsize>(data.metadata_json.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(data.tensors.size()));
  for (const auto& [name, t] : data.tensors) {
    detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape)
      detail::put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.data) detail::put_f32(out, static_cast<float>(v));
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

inline CheckpointData load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  char magic[4];
  if (!in.read(magic, 4))
    fail(ErrorCode::Truncated, path.string() + " is shorter than its magic");
  if (std::string(magic, 4) != std::string(kCheckpointMagic, 4))
    fail(ErrorCode::ParseError, path.string() + " is not a checkpoint");
  const auto version = detail::take_u32(in, "version");
  if (version != kCheckpointVersion)
    fail(ErrorCode::ParseError,
         "unsupported checkpoint version " + std::to_string(version));
  CheckpointData data;
  const auto meta_len = detail::take_u32(in, "metadata length");
  data.metadata_json.resize(meta_len);
  if (meta_len > 0 &&
      !in.read(data.metadata_json.data(), static_cast<std::streamsize>(meta_len)))
    fail(ErrorCode::Truncated, "checkpoint ends inside metadata");
  const auto n_tensors = detail::take_u32(in, "tensor count");
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const auto name_len = detail::take_u32(in, "tensor name length");
    std::string name(name_len, '\0');
    if (name_len > 0 &&
        !in.read(name.data(), static_cast<std::streamsize>(name_len)))
      fail(ErrorCode::Truncated, "checkpoint ends inside a tensor name");
    if (!seen.insert(name).second)
      fail(ErrorCode::ParseError, "duplicate tensor name '" + name + "'");
    const auto rank = detail::take_u32(in, "tensor rank");
    std::vector<std::size_t> shape;
    for (std::uint32_t d = 0; d < rank; ++d)
      shape.push_back(detail::take_u32(in, "tensor dims"));
    Tensor t(shape);
    for (auto& v : t.data)
      v = static_cast<double>(detail::take_f32(in, "tensor data"));
    data.tensors.emplace_back(std::move(name), std::move(t));
  }
  return data;
}

// 64-bit FNV-1a over the file bytes; used to show a file did or did
// not change across a pipeline stage
inline std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::uint64_t h = 14695981039346656037ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// ---- model-specific wrappers ----

inline void save_cpc_checkpoint(const CpcModel& model,
                                const std::filesystem::path& path) {
  nlohmann::json meta;
  meta["kind"] = "cpc";
  auto& c = meta["config"];
  c["enc_channels"] = model.config.enc_channels;
  c["enc_kernels"] = model.config.enc_kernels;
  c["enc_strides"] = model.config.enc_strides;
  c["latent_dim"] = model.config.latent_dim;
  c["context_dim"] = model.config.context_dim;
  c["num_steps"] = model.config.num_steps;
  c["n_negatives"] = model.config.n_negatives;
  c["epochs"] = model.config.epochs;
  c["batch_utts"] = model.config.batch_utts;
  c["window_samples"] = model.config.window_samples;
  c["lr"] = model.config.lr;
  c["seed"] = model.config.seed;
  CheckpointData data;
  data.metadata_json = meta.dump();
  for (const auto& [name, t] : model.named_params())
    data.tensors.emplace_back(name, *t);
  save_checkpoint(data, path);
}

inline CpcModel load_cpc_checkpoint(const std::filesystem::path& path) {
  const auto data = load_checkpoint(path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(data.metadata_json);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError,
         path.string() + ": bad metadata: " + e.what());
  }
  if (meta.value("kind", "") != "cpc")
    fail(ErrorCode::ParseError, path.string() + " is not a cpc checkpoint");
  CpcConfig cfg;
  try {
    const auto& c = meta.at("config");
    cfg.enc_channels = c.at("enc_channels").get<std::vector<std::size_t>>();
    cfg.enc_kernels = c.at("enc_kernels").get<std::vector<std::size_t>>();
    cfg.enc_strides = c.at("enc_strides").get<std::vector<std::size_t>>();
    cfg.latent_dim = c.at("latent_dim").get<std::size_t>();
    cfg.context_dim = c.at("context_dim").get<std::size_t>();
    cfg.num_steps = c.at("num_steps").get<std::size_t>();
    cfg.n_negatives = c.at("n_negatives").get<std::size_t>();
    cfg.epochs = c.at("epochs").get<std::size_t>();
    cfg.batch_utts = c.at("batch_utts").get<std::size_t>();
    cfg.window_samples = c.at("window_samples").get<std::size_t>();
    cfg.lr = c.at("lr").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError,
         path.string() + ": bad config metadata: " + e.what());
  }
  CpcModel model = CpcModel::init(cfg);
  auto named = model.named_params();
  if (named.size() != data.tensors.size())
    fail(ErrorCode::ParseError,
         path.string() + ": expected " + std::to_string(named.size()) +
             " tensors, found " + std::to_string(data.tensors.size()));
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& [name, t] = data.tensors[i];
    if (name != named[i].first)
      fail(ErrorCode::ParseError,
           path.string() + ": tensor '" + name + "' where '" +
               named[i].first + "' was expected");
    if (t.shape != named[i].second->shape)
      fail(ErrorCode::ParseError,
           path.string() + ": tensor '" + name + "' has shape " +
               t.shape_str() + ", expected " + named[i].second->shape_str());
    *named[i].second = t;
  }
  return model;
}

inline void save_probe_checkpoint(const ProbeModel& probe, FeatureKind kind,
                                  const std::filesystem::path& path) {
  nlohmann::json meta;
  meta["kind"] = "probe";
  meta["feature_kind"] = kind == FeatureKind::mfcc ? "mfcc" : "cpc_context";
  meta["stack_width"] = probe.stack_width;
  meta["symbol_table"] = probe.symbol_table;
  CheckpointData data;
  data.metadata_json = meta.dump();
  data.tensors.emplace_back("weight", probe.weight);
  data.tensors.emplace_back("bias", probe.bias);
  save_checkpoint(data, path);
}

struct LoadedProbe {
  ProbeModel probe;
  FeatureKind feature_kind = FeatureKind::mfcc;
};

inline LoadedProbe load_probe_checkpoint(const std::filesystem::path& path) {
  const auto data = load_checkpoint(path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(data.metadata_json);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError,
         path.string() + ": bad metadata: " + e.what());
  }
  if (meta.value("kind", "") != "probe")
    fail(ErrorCode::ParseError, path.string() + " is not a probe checkpoint");
  LoadedProbe out;
  try {
    const auto fk = meta.at("feature_kind").get<std::string>();
    if (fk == "mfcc")
      out.feature_kind = FeatureKind::mfcc;
    else if (fk == "cpc_context")
      out.feature_kind = FeatureKind::cpc_context;
    else
      fail(ErrorCode::ParseError, "unknown feature kind '" + fk + "'");
    out.probe.stack_width = meta.at("stack_width").get<std::size_t>();
    out.probe.symbol_table =
        meta.at("symbol_table").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError,
         path.string() + ": bad probe metadata: " + e.what());
  }
  if (data.tensors.size() != 2 || data.tensors[0].first != "weight" ||
      data.tensors[1].first != "bias")
    fail(ErrorCode::ParseError,
         path.string() + ": probe checkpoints carry weight and bias");
  out.probe.weight = data.tensors[0].second;
  out.probe.bias = data.tensors[1].second;
  if (out.probe.bias.numel() != out.probe.symbol_table.size() ||
      out.probe.weight.rank() != 2 ||
      out.probe.weight.shape[1] != out.probe.symbol_table.size())
    fail(ErrorCode::ParseError,
         path.string() + ": probe tensor shapes disagree with the table");
  return out;
}

}  // namespace lowra

#endif  // LOWRA_CHECKPOINT_HPP
