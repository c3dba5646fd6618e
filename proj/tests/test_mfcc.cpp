#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "lowra/error.hpp"
#include "lowra/mfcc.hpp"
#include "lowra/rng.hpp"

using lowra::MfccConfig;
using lowra::Waveform;

namespace {

Waveform sine(double freq, double seconds, double amp = 0.5,
              std::uint32_t sr = 16000) {
  Waveform w;
  w.sample_rate_hz = sr;
  const std::size_t n = static_cast<std::size_t>(seconds * sr);
  for (std::size_t t = 0; t < n; ++t)
    w.samples.push_back(amp *
                        std::sin(2.0 * std::numbers::pi * freq * t / sr));
  return w;
}

Waveform noise(double seconds, double amp, std::uint64_t seed) {
  lowra::Rng rng(seed);
  Waveform w;
  w.sample_rate_hz = 16000;
  const std::size_t n = static_cast<std::size_t>(seconds * 16000);
  for (std::size_t t = 0; t < n; ++t)
    w.samples.push_back(amp * rng.uniform(-1.0, 1.0));
  return w;
}

}  // namespace

TEST_CASE("frame counts follow the no-padding formula") {
  Waveform w;
  w.sample_rate_hz = 16000;

  w.samples.assign(400, 0.1);
  REQUIRE(lowra::frame_signal(w, 25, 10).size() == 1);

  w.samples.assign(720, 0.1);
  REQUIRE(lowra::frame_signal(w, 25, 10).size() == 3);

  w.samples.assign(399, 0.1);
  try {
    lowra::frame_signal(w, 25, 10);
    FAIL("expected TooShort");
  } catch (const lowra::Error& e) {
    REQUIRE(e.code() == lowra::ErrorCode::TooShort);
  }
}

TEST_CASE("one second at 16 kHz gives 98 x 13 features") {
  const auto w = sine(440.0, 1.0);
  const auto f = lowra::mfcc(w, MfccConfig{});
  REQUIRE(f.t_len() == 98);
  REQUIRE(f.dim() == 13);
  REQUIRE(f.frame_hop_ms == 10.0);
  REQUIRE(f.origin == lowra::FeatureOrigin::mfcc);
}

TEST_CASE("silence hits the log floor in every frame") {
  Waveform w;
  w.sample_rate_hz = 16000;
  w.samples.assign(16000, 0.0);
  const MfccConfig cfg;
  const auto f = lowra::mfcc(w, cfg);

  // expected: orthonormal DCT-II of the constant vector ln(1e-10),
  // computed here from the closed form
  const double c = std::log(cfg.log_floor);
  std::vector<double> expected(cfg.n_ceps, 0.0);
  expected[0] = c * std::sqrt(static_cast<double>(cfg.n_mels));
  for (std::size_t t = 0; t < f.t_len(); ++t)
    for (std::size_t k = 0; k < cfg.n_ceps; ++k)
      REQUIRE(std::abs(f.frames.at(t, k) - expected[k]) < 1e-9);
}

TEST_CASE("mel filter with peak nearest 1 kHz dominates for a 1 kHz tone") {
  const MfccConfig cfg;
  const auto w = sine(1000.0, 0.5);
  const auto fb = lowra::MelFilterbank::create(cfg.n_mels, cfg.n_fft, 16000,
                                               0.0, 8000.0);

  // centers recomputed here straight from the mel formula
  const auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  const auto unmel = [](double m) {
    return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
  };
  const double hi = mel(8000.0);
  std::size_t nearest = 0;
  double best = 1e18;
  for (std::size_t j = 0; j < cfg.n_mels; ++j) {
    const double center = unmel(hi * (j + 1) / (cfg.n_mels + 1.0));
    REQUIRE(std::abs(center - fb.center_hz[j]) < 1e-6);
    if (std::abs(center - 1000.0) < best) {
      best = std::abs(center - 1000.0);
      nearest = j;
    }
  }

  const auto window = lowra::hamming_window(400);
  const auto frames = lowra::frame_signal(w, cfg.frame_ms, cfg.hop_ms);
  for (auto frame : frames) {
    for (std::size_t i = 0; i < frame.size(); ++i) frame[i] *= window[i];
    const auto energies = fb.apply(lowra::power_spectrum(frame, cfg.n_fft));
    std::size_t argmax = 0;
    for (std::size_t j = 1; j < energies.size(); ++j)
      if (energies[j] > energies[argmax]) argmax = j;
    REQUIRE(argmax == nearest);
  }
}

TEST_CASE("square DCT-II is orthonormal") {
  const std::size_t n = 40;
  const auto d = lowra::dct_ii_matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) dot += d.at(i, k) * d.at(j, k);
      REQUIRE(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-9);
    }
}

TEST_CASE("mel filters are non-negative, unimodal, and cover the band") {
  const auto fb = lowra::MelFilterbank::create(40, 512, 16000, 0.0, 8000.0);
  const std::size_t n_bins = fb.weights.shape[1];
  for (std::size_t j = 0; j < 40; ++j) {
    bool fell = false;
    double prev = 0.0;
    double peak = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double v = fb.weights.at(j, k);
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0 + 1e-12);
      peak = std::max(peak, v);
      if (v < prev - 1e-12) fell = true;
      if (fell) REQUIRE(v <= prev + 1e-12);  // never rises after falling
      prev = v;
    }
    REQUIRE(peak > 0.0);
  }
  // every bin strictly inside (fmin, fmax) touched by some filter
  for (std::size_t k = 1; k < n_bins; ++k) {
    const double f = k * 16000.0 / 512.0;
    if (f <= 0.0 || f >= 8000.0) continue;
    double cover = 0.0;
    for (std::size_t j = 0; j < 40; ++j) cover += fb.weights.at(j, k);
    REQUIRE(cover > 0.0);
  }
}

TEST_CASE("amplitude scaling shifts only coefficient zero") {
  // broadband input keeps all mel energies above the floor
  const auto w = noise(0.3, 0.2, 9);
  auto w2 = w;
  for (auto& s : w2.samples) s *= 2.0;

  const MfccConfig cfg;
  const auto a = lowra::mfcc(w, cfg);
  const auto b = lowra::mfcc(w2, cfg);
  const double expected_shift =
      2.0 * std::log(2.0) * std::sqrt(1.0 / cfg.n_mels) * cfg.n_mels;
  for (std::size_t t = 0; t < a.t_len(); ++t) {
    REQUIRE(std::abs((b.frames.at(t, 0) - a.frames.at(t, 0)) -
                     expected_shift) < 1e-6);
    for (std::size_t k = 1; k < cfg.n_ceps; ++k)
      REQUIRE(std::abs(b.frames.at(t, k) - a.frames.at(t, k)) < 1e-6);
  }

  // scaling cannot move the spectral argmax
  const auto frames = lowra::frame_signal(w, cfg.frame_ms, cfg.hop_ms);
  const auto window = lowra::hamming_window(400);
  auto fr = frames[0];
  for (std::size_t i = 0; i < fr.size(); ++i) fr[i] *= window[i];
  auto fr2 = fr;
  for (auto& s : fr2) s *= 2.0;
  const auto p1 = lowra::power_spectrum(fr, cfg.n_fft);
  const auto p2 = lowra::power_spectrum(fr2, cfg.n_fft);
  const auto argmax = [](const std::vector<double>& v) {
    std::size_t a = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[a]) a = i;
    return a;
  };
  REQUIRE(argmax(p1) == argmax(p2));
}

TEST_CASE("mfcc is bit-deterministic") {
  const auto w = sine(700.0, 0.4);
  const auto a = lowra::mfcc(w, MfccConfig{});
  const auto b = lowra::mfcc(w, MfccConfig{});
  REQUIRE(a.frames.data == b.frames.data);
}

TEST_CASE("bad configs are rejected with every violation reported") {
  const auto w = sine(440.0, 0.1);
  MfccConfig cfg;
  cfg.n_fft = 300;   // not a power of two, also shorter than the frame
  cfg.n_ceps = 50;   // exceeds n_mels
  try {
    lowra::mfcc(w, cfg);
    FAIL("expected ConfigError");
  } catch (const lowra::Error& e) {
    REQUIRE(e.code() == lowra::ErrorCode::ConfigError);
    const std::string what = e.what();
    REQUIRE(what.find("power of two") != std::string::npos);
    REQUIRE(what.find("n_ceps") != std::string::npos);
    REQUIRE(what.find("shorter than frame") != std::string::npos);
  }
}
