// lowra/mfcc.hpp

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

#ifndef LOWRA_MFCC_HPP
#define LOWRA_MFCC_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lowra/error.hpp"
#include "lowra/features.hpp"
#include "lowra/fft.hpp"
#include "lowra/tensor.hpp"
#include "lowra/wav.hpp"

namespace lowra {

struct MfccConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t n_fft = 512;
  std::size_t n_mels = 40;
  std::size_t n_ceps = 13;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;  // 0 means sample_rate / 2
  double log_floor = 1e-10;

  double effective_fmax(std::uint32_t sample_rate_hz) const {
    return fmax_hz > 0 ? fmax_hz : sample_rate_hz / 2.0;
  }

  std::size_t frame_len(std::uint32_t sample_rate_hz) const {
    return static_cast<std::size_t>(
        std::llround(frame_ms * sample_rate_hz / 1000.0));
  }

  std::size_t hop_len(std::uint32_t sample_rate_hz) const {
    return static_cast<std::size_t>(
        std::llround(hop_ms * sample_rate_hz / 1000.0));
  }

  void validate(std::uint32_t sample_rate_hz) const {
    std::string err;
    if (frame_ms <= 0 || hop_ms <= 0) err += "frame_ms and hop_ms must be positive; ";
    if (!is_power_of_two(n_fft)) err += "n_fft must be a power of two; ";
    if (n_ceps > n_mels) err += "n_ceps must be <= n_mels; ";
    if (n_mels == 0 || n_ceps == 0) err += "n_mels and n_ceps must be positive; ";
    const double fmax = effective_fmax(sample_rate_hz);
    if (!(fmin_hz < fmax) || fmax > sample_rate_hz / 2.0)
      err += "need fmin < fmax <= sample_rate/2; ";
    if (n_fft < frame_len(sample_rate_hz)) err += "n_fft shorter than frame; ";
    if (log_floor <= 0) err += "log_floor must be positive; ";
    if (!err.empty()) fail(ErrorCode::ConfigError, "mfcc config: " + err);
  }
};

inline double hz_to_mel(double f) {
  return 2595.0 * std::log10(1.0 + f / 700.0);
}

inline double mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

// Triangular filters, peak 1, 50% overlap on the mel scale.
struct MelFilterbank {
  Tensor weights;                 // (n_mels x n_bins)
  std::vector<double> center_hz;  // one per filter

  static MelFilterbank create(std::size_t n_mels, std::size_t n_fft,
                              std::uint32_t sample_rate_hz, double fmin_hz,
                              double fmax_hz) {
    const std::size_t n_bins = n_fft / 2 + 1;
    const double mel_lo = hz_to_mel(fmin_hz);
    const double mel_hi = hz_to_mel(fmax_hz);
    std::vector<double> edge_hz(n_mels + 2);
    for (std::size_t j = 0; j < edge_hz.size(); ++j)
      edge_hz[j] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * j / (n_mels + 1.0));
    MelFilterbank fb;
    fb.weights = Tensor({n_mels, n_bins});
    fb.center_hz.assign(edge_hz.begin() + 1, edge_hz.end() - 1);
    for (std::size_t j = 0; j < n_mels; ++j) {
      const double lo = edge_hz[j], c = edge_hz[j + 1], hi = edge_hz[j + 2];
      for (std::size_t k = 0; k < n_bins; ++k) {
        const double f =
            static_cast<double>(k) * sample_rate_hz / static_cast<double>(n_fft);
        double w = 0.0;
        if (f > lo && f < hi)
          w = f <= c ? (f - lo) / (c - lo) : (hi - f) / (hi - c);
        fb.weights.at(j, k) = w;
      }
    }
    return fb;
  }

  std::vector<double> apply(const std::vector<double>& power) const {
    const std::size_t n_mels = weights.shape[0], n_bins = weights.shape[1];
    std::vector<double> e(n_mels, 0.0);
    for (std::size_t j = 0; j < n_mels; ++j) {
      const double* w = weights.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) acc += w[k] * power[k];
      e[j] = acc;
    }
    return e;
  }
};

// Orthonormal DCT-II matrix (n_out x n_in).
inline Tensor dct_ii_matrix(std::size_t n_out, std::size_t n_in) {
  Tensor m({n_out, n_in});
  const double norm0 = std::sqrt(1.0 / static_cast<double>(n_in));
  const double norm = std::sqrt(2.0 / static_cast<double>(n_in));
  for (std::size_t k = 0; k < n_out; ++k)
    for (std::size_t n = 0; n < n_in; ++n)
      m.at(k, n) = (k == 0 ? norm0 : norm) *
                   std::cos(std::numbers::pi * (n + 0.5) * k / n_in);
  return m;
}

inline std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

// Contiguous frame copies; count = 1 + floor((len - frame_len)/hop), no padding.
inline std::vector<std::vector<double>> frame_signal(const Waveform& w,
                                                     double frame_ms,
                                                     double hop_ms) {
  const auto frame_len = static_cast<std::size_t>(
      std::llround(frame_ms * w.sample_rate_hz / 1000.0));
  const auto hop = static_cast<std::size_t>(
      std::llround(hop_ms * w.sample_rate_hz / 1000.0));
  if (w.samples.size() < frame_len)
    fail(ErrorCode::TooShort,
         "waveform of " + std::to_string(w.samples.size()) +
             " samples shorter than one frame (" + std::to_string(frame_len) +
             ")");
  const std::size_t t = 1 + (w.samples.size() - frame_len) / hop;
  std::vector<std::vector<double>> frames(t);
  for (std::size_t i = 0; i < t; ++i)
    frames[i].assign(w.samples.begin() + i * hop,
                     w.samples.begin() + i * hop + frame_len);
  return frames;
}

inline FeatureSequence mfcc(const Waveform& w, const MfccConfig& cfg) {
  cfg.validate(w.sample_rate_hz);
  auto frames = frame_signal(w, cfg.frame_ms, cfg.hop_ms);
  const auto window = hamming_window(frames[0].size());
  const auto fb = MelFilterbank::create(cfg.n_mels, cfg.n_fft, w.sample_rate_hz,
                                        cfg.fmin_hz,
                                        cfg.effective_fmax(w.sample_rate_hz));
  const Tensor dct = dct_ii_matrix(cfg.n_ceps, cfg.n_mels);

  FeatureSequence out;
  out.frames = Tensor({frames.size(), cfg.n_ceps});
  out.frame_hop_ms = cfg.hop_ms;
  out.origin = FeatureOrigin::mfcc;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    auto& fr = frames[t];
    for (std::size_t i = 0; i < fr.size(); ++i) fr[i] *= window[i];
    const auto power = power_spectrum(fr, cfg.n_fft);
    auto mel = fb.apply(power);
    for (auto& e : mel) e = std::log(std::max(e, cfg.log_floor));
    double* orow = out.frames.row(t);
    for (std::size_t k = 0; k < cfg.n_ceps; ++k) {
      const double* drow = dct.row(k);
      double acc = 0.0;
      for (std::size_t j = 0; j < cfg.n_mels; ++j) acc += drow[j] * mel[j];
      orow[k] = acc;
    }
  }
  return out;
}

}  // namespace lowra

#endif  // LOWRA_MFCC_HPP
