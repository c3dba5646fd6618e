// lowra/synth.hpp

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

#ifndef LOWRA_SYNTH_HPP
#define LOWRA_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "lowra/error.hpp"
#include "lowra/manifest.hpp"
#include "lowra/rng.hpp"
#include "lowra/wav.hpp"

namespace lowra {

// Synthetic tone corpus: phone i is a sine at 300*(i+1) Hz, so the
// transcript is ground truth by construction and the tones stay
// separable after mel smoothing.
struct SynthSpec {
  std::size_t n_phones = 3;
  std::size_t n_utterances = 100;
  std::pair<std::size_t, std::size_t> phones_per_utt{4, 8};
  std::pair<std::size_t, std::size_t> phone_dur_ms{80, 120};
  std::uint32_t sample_rate_hz = 16000;
  double noise_std = 0.0;
  std::size_t n_speakers = 1;
  std::uint64_t seed = 0;

  void validate() const {
    std::string err;
    if (n_phones < 2) err += "n_phones must be >= 2; ";
    if (n_utterances < 1) err += "n_utterances must be >= 1; ";
    if (phones_per_utt.first < 1 || phones_per_utt.first > phones_per_utt.second)
      err += "phones_per_utt range invalid; ";
    if (phone_dur_ms.first < 1 || phone_dur_ms.first > phone_dur_ms.second)
      err += "phone_dur_ms range invalid; ";
    if (sample_rate_hz == 0) err += "sample_rate_hz must be positive; ";
    if (noise_std < 0) err += "noise_std must be non-negative; ";
    if (n_speakers < 1) err += "n_speakers must be >= 1; ";
    if (!err.empty()) fail(ErrorCode::ConfigError, "synth spec: " + err);
  }
};

inline double phone_frequency_hz(std::size_t phone_idx) {
  return 300.0 * static_cast<double>(phone_idx + 1);
}

inline std::string phone_symbol(std::size_t phone_idx) {
  return "p" + std::to_string(phone_idx);
}

// Pure tone for one phone segment; detune multiplies the frequency.
inline std::vector<double> render_phone_tone(std::size_t phone_idx,
                                             std::size_t n_samples,
                                             double detune,
                                             std::uint32_t sample_rate_hz) {
  const double f = phone_frequency_hz(phone_idx) * detune;
  const double w = 2.0 * std::numbers::pi * f / sample_rate_hz;
  std::vector<double> out(n_samples);
  for (std::size_t t = 0; t < n_samples; ++t)
    out[t] = 0.5 * std::sin(w * static_cast<double>(t));
  return out;
}

// Renders the corpus under out_dir (WAVs in wav/, manifest.tsv beside
// them).  Identical spec+seed gives byte-identical output; a single
// speaker renders the canonical voice with detune exactly 1.
inline Manifest synth_corpus(const SynthSpec& spec,
                             const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + (out_dir / "wav").string());

  Rng rng(spec.seed);
  std::vector<double> detune(spec.n_speakers, 1.0);
  if (spec.n_speakers > 1)
    for (auto& d : detune) d = rng.uniform(0.95, 1.05);

  Manifest m;
  m.root_dir = out_dir;
  for (std::size_t u = 0; u < spec.n_utterances; ++u) {
    const auto speaker = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(spec.n_speakers) - 1));
    const auto n_ph = static_cast<std::size_t>(rng.uniform_int(
        static_cast<std::int64_t>(spec.phones_per_utt.first),
        static_cast<std::int64_t>(spec.phones_per_utt.second)));
    Utterance utt;
    char idbuf[16];
    std::snprintf(idbuf, sizeof idbuf, "u%05zu", u);
    utt.id = idbuf;
    utt.audio_path = std::string("wav/") + idbuf + ".wav";

    Waveform w;
    w.sample_rate_hz = spec.sample_rate_hz;
    for (std::size_t p = 0; p < n_ph; ++p) {
      const auto phone = static_cast<std::size_t>(rng.uniform_int(
          0, static_cast<std::int64_t>(spec.n_phones) - 1));
      const auto dur_ms = static_cast<std::size_t>(rng.uniform_int(
          static_cast<std::int64_t>(spec.phone_dur_ms.first),
          static_cast<std::int64_t>(spec.phone_dur_ms.second)));
      const std::size_t n = dur_ms * spec.sample_rate_hz / 1000;
      auto seg = render_phone_tone(phone, n, detune[speaker],
                                   spec.sample_rate_hz);
      if (spec.noise_std > 0)
        for (auto& x : seg) x += rng.normal(0.0, spec.noise_std);
      for (auto& x : seg) x = std::clamp(x, -1.0, 1.0);
      w.samples.insert(w.samples.end(), seg.begin(), seg.end());
      utt.transcript.push_back(phone_symbol(phone));
    }
    encode_wav(w, m.resolve(utt));
    m.utterances.push_back(std::move(utt));
  }
  std::set<std::string> symbols;
  for (const auto& u : m.utterances)
    symbols.insert(u.transcript.begin(), u.transcript.end());
  m.inventory.assign(symbols.begin(), symbols.end());
  save_manifest(m, out_dir / "manifest.tsv");
  return m;
}

}  // namespace lowra

#endif  // LOWRA_SYNTH_HPP
