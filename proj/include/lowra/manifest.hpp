// lowra/manifest.hpp

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

#ifndef LOWRA_MANIFEST_HPP
#define LOWRA_MANIFEST_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lowra/error.hpp"
#include "lowra/rng.hpp"

namespace lowra {

// CTC blank; reserved, never a transcript symbol.
inline constexpr const char* kBlankSymbol = "<blank>";

struct Utterance {
  std::string id;
  std::string audio_path;  // relative to the manifest directory
  std::vector<std::string> transcript;
};

struct Manifest {
  std::filesystem::path root_dir;
  std::vector<Utterance> utterances;
  std::vector<std::string> inventory;  // sorted unique symbols

  std::filesystem::path resolve(const Utterance& u) const {
    return root_dir / u.audio_path;
  }
};

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// TSV, one utterance per line: id <TAB> audio_path <TAB> transcript,
// transcript being space-separated phoneme symbols.  No header.
inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  Manifest m;
  m.root_dir = path.parent_path();
  std::set<std::string> ids;
  std::set<std::string> symbols;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = [&] {
      return path.string() + ":" + std::to_string(lineno);
    };
    auto fields = split_on(line, '\t');
    if (fields.size() != 3)
      fail(ErrorCode::ParseError, where() + ": expected 3 tab-separated fields, got " +
                                      std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty())
      fail(ErrorCode::ParseError, where() + ": empty id or path");
    if (!ids.insert(fields[0]).second)
      fail(ErrorCode::DuplicateId, where() + ": duplicate id " + fields[0]);
    Utterance u;
    u.id = std::move(fields[0]);
    u.audio_path = std::move(fields[1]);
    std::istringstream ts(fields[2]);
    std::string sym;
    while (ts >> sym) {
      if (sym == kBlankSymbol)
        fail(ErrorCode::ParseError,
             where() + ": reserved symbol " + std::string(kBlankSymbol) +
                 " in transcript");
      symbols.insert(sym);
      u.transcript.push_back(std::move(sym));
    }
    if (u.transcript.empty())
      fail(ErrorCode::EmptyTranscript, where() + ": empty transcript for " + u.id);
    m.utterances.push_back(std::move(u));
  }
  if (in.bad()) fail(ErrorCode::IoError, "read failed: " + path.string());
  m.inventory.assign(symbols.begin(), symbols.end());
  return m;
}

inline void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& u : m.utterances) {
    out << u.id << '\t' << u.audio_path << '\t';
    for (std::size_t i = 0; i < u.transcript.size(); ++i)
      out << (i ? " " : "") << u.transcript[i];
    out << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

// Seeded utterance-level split: floor(n * train_frac) train,
// floor(n * dev_frac) dev, remainder test.  All three parts keep the
// parent's full inventory so downstream symbol tables stay aligned.
inline std::array<Manifest, 3> split_manifest(const Manifest& m,
                                              double train_frac,
                                              double dev_frac,
                                              std::uint64_t seed) {
  if (train_frac <= 0 || dev_frac <= 0 || train_frac + dev_frac >= 1.0)
    fail(ErrorCode::ConfigError, "split fractions out of range");
  const std::size_t n = m.utterances.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * train_frac));
  const auto n_dev = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * dev_frac));
  std::array<Manifest, 3> parts;
  for (auto& p : parts) {
    p.root_dir = m.root_dir;
    p.inventory = m.inventory;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Utterance& u = m.utterances[order[i]];
    if (i < n_train)
      parts[0].utterances.push_back(u);
    else if (i < n_train + n_dev)
      parts[1].utterances.push_back(u);
    else
      parts[2].utterances.push_back(u);
  }
  for (const auto& p : parts)
    if (p.utterances.empty())
      fail(ErrorCode::EmptySplit, "split produced an empty part");
  return parts;
}

}  // namespace lowra

#endif  // LOWRA_MANIFEST_HPP
