// lowra/features.hpp

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

#ifndef LOWRA_FEATURES_HPP
#define LOWRA_FEATURES_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "lowra/error.hpp"
#include "lowra/tensor.hpp"

namespace lowra {

enum class FeatureOrigin { mfcc, cpc_latent, cpc_context };

struct FeatureSequence {
  Tensor frames;           // (T x D)
  double frame_hop_ms = 0;
  FeatureOrigin origin = FeatureOrigin::mfcc;

  std::size_t t_len() const { return frames.rows(); }
  std::size_t dim() const { return frames.cols(); }
};

// Debug dump: "FEAT" + u32 T + u32 D, then T*D little-endian f32
// values in row-major order.
inline void write_features(const FeatureSequence& f,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out.write("FEAT", 4);
  const auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  put_u32(static_cast<std::uint32_t>(f.t_len()));
  put_u32(static_cast<std::uint32_t>(f.dim()));
  for (double x : f.frames.data) {
    const float v = static_cast<float>(x);
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(bits);
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

inline FeatureSequence read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "FEAT", 4) != 0)
    fail(ErrorCode::ParseError, path.string() + ": bad feature magic");
  const auto get_u32 = [&]() -> std::uint32_t {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) fail(ErrorCode::Truncated, path.string() + ": truncated");
    return static_cast<std::uint32_t>(b[0]) | (b[1] << 8) | (b[2] << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  };
  const std::uint32_t t = get_u32();
  const std::uint32_t d = get_u32();
  FeatureSequence f;
  f.frames = Tensor({t, d});
  for (std::size_t i = 0; i < f.frames.numel(); ++i) {
    const std::uint32_t bits = get_u32();
    float v;
    std::memcpy(&v, &bits, 4);
    f.frames.data[i] = v;
  }
  return f;
}

}  // namespace lowra

#endif  // LOWRA_FEATURES_HPP
