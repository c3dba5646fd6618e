// lowra/wav.hpp

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

#ifndef LOWRA_WAV_HPP
#define LOWRA_WAV_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lowra/error.hpp"

namespace lowra {

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  std::uint32_t sample_rate_hz = 0;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u16le(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

// RIFF/WAVE PCM16 mono decoder.  Unknown chunks are skipped; the fmt
// chunk must precede data.  Samples map to doubles as s / 32768.
inline Waveform decode_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
  if (in.bad()) fail(ErrorCode::IoError, "read failed: " + path.string());

  const auto need = [&](std::size_t off, std::size_t n) {
    if (off + n > bytes.size())
      fail(ErrorCode::Truncated, path.string() + ": truncated at byte " +
                                     std::to_string(off));
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail(ErrorCode::NotWav, path.string() + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const char* tag = reinterpret_cast<const char*>(&bytes[off]);
    const std::uint32_t chunk_len = detail::read_u32le(&bytes[off + 4]);
    const std::size_t body = off + 8;
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      need(body, chunk_len);
      if (chunk_len < 16)
        fail(ErrorCode::UnsupportedFormat, path.string() + ": short fmt chunk");
      const std::uint16_t audio_format = detail::read_u16le(&bytes[body]);
      channels = detail::read_u16le(&bytes[body + 2]);
      sample_rate = detail::read_u32le(&bytes[body + 4]);
      bits = detail::read_u16le(&bytes[body + 14]);
      if (audio_format != 1)
        fail(ErrorCode::UnsupportedFormat,
             path.string() + ": not PCM (format " +
                 std::to_string(audio_format) + ")");
      if (channels != 1)
        fail(ErrorCode::UnsupportedFormat,
             path.string() + ": " + std::to_string(channels) +
                 " channels, expected mono");
      if (bits != 16)
        fail(ErrorCode::UnsupportedFormat,
             path.string() + ": " + std::to_string(bits) +
                 "-bit samples, expected 16");
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt)
        fail(ErrorCode::UnsupportedFormat,
             path.string() + ": data chunk before fmt");
      need(body, chunk_len);
      Waveform w;
      w.sample_rate_hz = sample_rate;
      const std::size_t n = chunk_len / 2;
      w.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint16_t u = detail::read_u16le(&bytes[body + 2 * i]);
        w.samples[i] = static_cast<std::int16_t>(u) / 32768.0;
      }
      return w;
    }
    off = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  fail(ErrorCode::Truncated, path.string() + ": no data chunk");
}

// Writes PCM16 mono; values are clamped to [-1, 1] and rounded.
inline void encode_wav(const Waveform& w, const std::filesystem::path& path) {
  std::string out;
  const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_len = n * 2;
  out.reserve(44 + data_len);
  out += "RIFF";
  detail::put_u32le(out, 36 + data_len);
  out += "WAVEfmt ";
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);  // PCM
  detail::put_u16le(out, 1);  // mono
  detail::put_u32le(out, w.sample_rate_hz);
  detail::put_u32le(out, w.sample_rate_hz * 2);
  detail::put_u16le(out, 2);
  detail::put_u16le(out, 16);
  out += "data";
  detail::put_u32le(out, data_len);
  for (double x : w.samples) {
    const double c = std::clamp(x, -1.0, 1.0);
    const long q = std::lround(c * 32768.0);
    detail::put_u16le(out, static_cast<std::uint16_t>(
                               static_cast<std::int16_t>(
                                   std::clamp(q, -32768L, 32767L))));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace lowra

#endif  // LOWRA_WAV_HPP
