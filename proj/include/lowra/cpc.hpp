// lowra/cpc.hpp

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

#ifndef LOWRA_CPC_HPP
#define LOWRA_CPC_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "lowra/autodiff.hpp"
#include "lowra/error.hpp"
#include "lowra/features.hpp"
#include "lowra/gru.hpp"
#include "lowra/manifest.hpp"
#include "lowra/optim.hpp"
#include "lowra/rng.hpp"
#include "lowra/tensor.hpp"
#include "lowra/wav.hpp"

namespace lowra {

// Contrastive predictive coding over raw waveform: strided conv
// encoder to latents z_t, single GRU to contexts c_t, and K bilinear
// heads scoring z_{t+k} against negatives from the same sequence.
struct CpcConfig {
  std::vector<std::size_t> enc_channels{64, 64, 64};
  std::vector<std::size_t> enc_kernels{10, 8, 4};
  std::vector<std::size_t> enc_strides{5, 4, 2};
  std::size_t latent_dim = 64;
  std::size_t context_dim = 128;
  std::size_t num_steps = 12;  // K
  std::size_t n_negatives = 10;
  std::size_t epochs = 200;
  std::size_t batch_utts = 8;
  std::size_t window_samples = 8000;
  double lr = 1e-3;
  std::uint64_t seed = 0;

  std::size_t n_layers() const { return enc_channels.size(); }

  std::size_t total_stride() const {
    std::size_t s = 1;
    for (std::size_t v : enc_strides) s *= v;
    return s;
  }

  // smallest input yielding one latent step
  std::size_t receptive_field() const {
    std::size_t r = 1;
    for (std::size_t i = n_layers(); i-- > 0;)
      r = enc_kernels[i] + enc_strides[i] * (r - 1);
    return r;
  }

  std::size_t encoded_len(std::size_t input_len) const {
    std::size_t len = input_len;
    for (std::size_t i = 0; i < n_layers(); ++i) {
      if (len < enc_kernels[i])
        fail(ErrorCode::TooShort,
             "input of " + std::to_string(input_len) +
                 " samples shorter than the encoder receptive field (" +
                 std::to_string(receptive_field()) + ")");
      len = conv1d_out_len(len, enc_kernels[i], enc_strides[i]);
    }
    return len;
  }

  void validate() const {
    std::string err;
    if (enc_channels.empty()) err += "encoder needs at least one layer; ";
    if (enc_kernels.size() != enc_channels.size() ||
        enc_strides.size() != enc_channels.size())
      err += "enc_channels/enc_kernels/enc_strides lengths differ; ";
    for (std::size_t v : enc_channels)
      if (v == 0) err += "enc_channels entries must be positive; ";
    for (std::size_t v : enc_kernels)
      if (v == 0) err += "enc_kernels entries must be positive; ";
    for (std::size_t v : enc_strides)
      if (v == 0) err += "enc_strides entries must be positive; ";
    if (!enc_channels.empty() && enc_channels.back() != latent_dim)
      err += "last enc_channels entry must equal latent_dim; ";
    if (latent_dim == 0 || context_dim == 0)
      err += "latent_dim and context_dim must be positive; ";
    if (num_steps < 1) err += "K must be >= 1; ";
    if (n_negatives < 1) err += "n_negatives must be >= 1; ";
    if (batch_utts < 1) err += "batch_utts must be >= 1; ";
    if (lr <= 0) err += "lr must be positive; ";
    if (err.empty()) {
      std::size_t t = 0;
      bool too_short = false;
      try {
        t = encoded_len(window_samples);
      } catch (const Error&) {
        too_short = true;
      }
      if (too_short || t < num_steps + 1 || t < n_negatives + 1)
        err += "window_samples must encode to at least K+1 and "
               "n_negatives+1 latent steps; ";
    }
    if (!err.empty()) fail(ErrorCode::ConfigError, "cpc config: " + err);
  }
};

struct CpcModel {
  CpcConfig config;
  std::vector<Tensor> enc_w;  // (c_out x c_in x k) per layer
  std::vector<Tensor> enc_b;  // (c_out) per layer
  Tensor gru_wz, gru_wr, gru_wh;  // (latent x context)
  Tensor gru_uz, gru_ur, gru_uh;  // (context x context)
  Tensor gru_bz, gru_br, gru_bh;  // (context)
  std::vector<Tensor> heads;      // K of (context x latent)

  // Conv and GRU weights uniform +-1/sqrt(fan_in), biases and heads
  // zero.  Zero heads make every initial InfoNCE score exactly zero,
  // so the initial loss is K*ln(n_negatives+1) by construction.
  static CpcModel init(const CpcConfig& cfg) {
    cfg.validate();
    CpcModel m;
    m.config = cfg;
    Rng rng(cfg.seed);
    std::size_t c_in = 1;
    for (std::size_t i = 0; i < cfg.n_layers(); ++i) {
      const std::size_t c_out = cfg.enc_channels[i], k = cfg.enc_kernels[i];
      const double a = 1.0 / std::sqrt(static_cast<double>(c_in * k));
      m.enc_w.push_back(Tensor::uniform({c_out, c_in, k}, a, rng));
      m.enc_b.push_back(Tensor::zeros({c_out}));
      c_in = c_out;
    }
    const std::size_t d = cfg.latent_dim, h = cfg.context_dim;
    const double aw = 1.0 / std::sqrt(static_cast<double>(d));
    const double au = 1.0 / std::sqrt(static_cast<double>(h));
    m.gru_wz = Tensor::uniform({d, h}, aw, rng);
    m.gru_wr = Tensor::uniform({d, h}, aw, rng);
    m.gru_wh = Tensor::uniform({d, h}, aw, rng);
    m.gru_uz = Tensor::uniform({h, h}, au, rng);
    m.gru_ur = Tensor::uniform({h, h}, au, rng);
    m.gru_uh = Tensor::uniform({h, h}, au, rng);
    m.gru_bz = Tensor::zeros({h});
    m.gru_br = Tensor::zeros({h});
    m.gru_bh = Tensor::zeros({h});
    for (std::size_t k = 0; k < cfg.num_steps; ++k)
      m.heads.push_back(Tensor::zeros({h, d}));
    return m;
  }

  // stable ordering shared by the optimizer and the checkpoint format
  std::vector<std::pair<std::string, Tensor*>> named_params() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (std::size_t i = 0; i < enc_w.size(); ++i) {
      out.emplace_back("enc." + std::to_string(i) + ".weight", &enc_w[i]);
      out.emplace_back("enc." + std::to_string(i) + ".bias", &enc_b[i]);
    }
    out.emplace_back("gru.wz", &gru_wz);
    out.emplace_back("gru.wr", &gru_wr);
    out.emplace_back("gru.wh", &gru_wh);
    out.emplace_back("gru.uz", &gru_uz);
    out.emplace_back("gru.ur", &gru_ur);
    out.emplace_back("gru.uh", &gru_uh);
    out.emplace_back("gru.bz", &gru_bz);
    out.emplace_back("gru.br", &gru_br);
    out.emplace_back("gru.bh", &gru_bh);
    for (std::size_t k = 0; k < heads.size(); ++k)
      out.emplace_back("head." + std::to_string(k), &heads[k]);
    return out;
  }

  std::vector<std::pair<std::string, const Tensor*>> named_params() const {
    auto mut = const_cast<CpcModel*>(this)->named_params();
    return {mut.begin(), mut.end()};
  }

  GruWeights gru_weights() const {
    return GruWeights{&gru_wz, &gru_wr, &gru_wh, &gru_uz, &gru_ur,
                      &gru_uh, &gru_bz, &gru_br, &gru_bh};
  }
};

// ---- inference paths (plain kernels; bit-identical to the graph ops) ----

inline Tensor encode_samples(const CpcModel& m, const double* samples,
                             std::size_t len) {
  Tensor x({1, len});
  std::copy(samples, samples + len, x.data.begin());
  for (std::size_t i = 0; i < m.enc_w.size(); ++i) {
    x = conv1d(x, m.enc_w[i], m.enc_b[i], m.config.enc_strides[i]);
    for (auto& v : x.data) v = std::tanh(v);
  }
  return transpose(x);  // (T x latent)
}

inline FeatureSequence encode(const CpcModel& m, const Waveform& w) {
  if (w.samples.size() < m.config.receptive_field())
    fail(ErrorCode::TooShort,
         "waveform of " + std::to_string(w.samples.size()) +
             " samples shorter than the encoder receptive field (" +
             std::to_string(m.config.receptive_field()) + ")");
  FeatureSequence f;
  f.frames = encode_samples(m, w.samples.data(), w.samples.size());
  f.frame_hop_ms = 1000.0 * m.config.total_stride() / w.sample_rate_hz;
  f.origin = FeatureOrigin::cpc_latent;
  return f;
}

inline FeatureSequence contextualize(const CpcModel& m,
                                     const FeatureSequence& latents) {
  FeatureSequence f;
  f.frames = gru_forward(latents.frames, m.gru_weights());
  f.frame_hop_ms = latents.frame_hop_ms;
  f.origin = FeatureOrigin::cpc_context;
  return f;
}

// ---- graph builders ----

struct CpcParamIds {
  std::vector<NodeId> enc_w, enc_b;
  GruParamIds gru;
  std::vector<NodeId> heads;
};

// registration order matches CpcModel::named_params
inline CpcParamIds register_cpc_params(Graph& g, const CpcModel& m) {
  CpcParamIds ids;
  for (std::size_t i = 0; i < m.enc_w.size(); ++i) {
    ids.enc_w.push_back(g.param(m.enc_w[i]));
    ids.enc_b.push_back(g.param(m.enc_b[i]));
  }
  ids.gru = {g.param(m.gru_wz), g.param(m.gru_wr), g.param(m.gru_wh),
             g.param(m.gru_uz), g.param(m.gru_ur), g.param(m.gru_uh),
             g.param(m.gru_bz), g.param(m.gru_br), g.param(m.gru_bh)};
  for (const auto& h : m.heads) ids.heads.push_back(g.param(h));
  return ids;
}

inline NodeId build_latents(Graph& g, const CpcParamIds& ids, NodeId x,
                            const CpcConfig& cfg) {
  NodeId h = x;
  for (std::size_t i = 0; i < ids.enc_w.size(); ++i)
    h = g.tanh(g.conv1d(h, ids.enc_w[i], ids.enc_b[i], cfg.enc_strides[i]));
  return g.transpose(h);  // (T x latent)
}

struct InfoNceStep {
  NodeId loss;
  double accuracy;  // fraction of anchors whose positive beats all negatives
};

// One InfoNCE term: anchors t = 0..T-k-1 score W_k c_t against
// z_{t+k} (index 0 of the softmax) and n_negatives latents drawn
// without replacement from the whole sequence excluding t+k, one
// draw per anchor in increasing t order.
inline InfoNceStep info_nce_step(Graph& g, NodeId contexts, NodeId latents,
                                 NodeId head, std::size_t k,
                                 std::size_t n_negatives, Rng& rng) {
  const std::size_t t_len = g.value(latents).shape[0];
  if (t_len <= k)
    fail(ErrorCode::SequenceTooShort,
         "info_nce: " + std::to_string(t_len) +
             " latent steps cannot host step k=" + std::to_string(k));
  if (t_len < n_negatives + 1)
    fail(ErrorCode::SequenceTooShort,
         "info_nce: " + std::to_string(t_len) +
             " latent steps cannot supply " + std::to_string(n_negatives) +
             " negatives");
  const std::size_t n_anchor = t_len - k;

  std::vector<std::vector<std::size_t>> neg_cols(
      n_negatives, std::vector<std::size_t>(n_anchor));
  for (std::size_t t = 0; t < n_anchor; ++t) {
    const auto idx = rng.sample_without_replacement(t_len, n_negatives, t + k);
    for (std::size_t n = 0; n < n_negatives; ++n) neg_cols[n][t] = idx[n];
  }

  const NodeId preds =
      g.matmul(g.slice_rows(contexts, 0, n_anchor), head);  // (n_anchor x D)
  std::vector<NodeId> cols;
  cols.push_back(g.rowwise_dot(preds, g.slice_rows(latents, k, t_len)));
  for (std::size_t n = 0; n < n_negatives; ++n)
    cols.push_back(g.rowwise_dot(preds, g.gather_rows(latents, neg_cols[n])));
  const NodeId scores = g.concat_cols(cols);
  const NodeId logp = g.log_softmax(scores);
  const NodeId loss = g.scale(g.mean(g.select_col(logp, 0)), -1.0);

  const Tensor& sv = g.value(scores);
  std::size_t wins = 0;
  for (std::size_t t = 0; t < n_anchor; ++t) {
    bool win = true;
    for (std::size_t n = 1; n <= n_negatives; ++n)
      win = win && sv.at(t, 0) > sv.at(t, n);
    wins += win;
  }
  return {loss, static_cast<double>(wins) / static_cast<double>(n_anchor)};
}

struct StepLosses {
  std::vector<double> per_step;    // l_1..l_K
  double total = 0.0;              // sum over k
  std::vector<double> accuracies;  // per step
};

struct WindowLoss {
  NodeId total;
  std::vector<double> step_values;
  std::vector<double> step_accs;
};

inline WindowLoss build_window_loss(Graph& g, const CpcParamIds& ids,
                                    const double* samples, std::size_t len,
                                    const CpcConfig& cfg, Rng& rng) {
  Tensor x({1, len});
  std::copy(samples, samples + len, x.data.begin());
  const NodeId latents = build_latents(g, ids, g.leaf(std::move(x)), cfg);
  const NodeId contexts = lowra::gru(g, latents, ids.gru);
  WindowLoss out;
  NodeId total = 0;
  for (std::size_t k = 1; k <= cfg.num_steps; ++k) {
    const auto step = info_nce_step(g, contexts, latents, ids.heads[k - 1], k,
                                    cfg.n_negatives, rng);
    out.step_values.push_back(g.value(step.loss).data[0]);
    out.step_accs.push_back(step.accuracy);
    total = k == 1 ? step.loss : g.add(total, step.loss);
  }
  out.total = total;
  return out;
}

// ---- training ----

struct PretrainResult {
  CpcModel model;
  std::vector<StepLosses> curve;  // one entry per epoch
  std::size_t skipped_short = 0;
};

namespace detail {

struct LoadedCorpus {
  std::vector<std::vector<double>> samples;
  std::size_t skipped = 0;
};

inline LoadedCorpus load_training_audio(const Manifest& manifest,
                                        std::size_t window_samples) {
  LoadedCorpus c;
  for (const auto& u : manifest.utterances) {
    auto w = decode_wav(manifest.resolve(u));
    if (w.samples.size() < window_samples) {
      std::cerr << "warning: skipping " << u.id << " ("
                << w.samples.size() << " samples < window "
                << window_samples << ")\n";
      ++c.skipped;
      continue;
    }
    c.samples.push_back(std::move(w.samples));
  }
  if (c.samples.empty())
    fail(ErrorCode::TooShort, "no utterance reaches window_samples");
  return c;
}

}  // namespace detail

// Seeded loop: per epoch, shuffle utterances, crop one random window
// per utterance, batch, backprop sum_k l_k, Adam step.  Deterministic
// given (model, manifest, config).
inline PretrainResult pretrain(const CpcModel& init_model,
                               const Manifest& manifest,
                               const CpcConfig& cfg) {
  cfg.validate();
  PretrainResult res;
  res.model = init_model;
  res.model.config = cfg;
  auto corpus = detail::load_training_audio(manifest, cfg.window_samples);
  res.skipped_short = corpus.skipped;

  auto named = res.model.named_params();
  std::vector<Tensor*> params;
  for (auto& [name, t] : named) params.push_back(t);
  AdamState adam;
  adam.lr = cfg.lr;
  Rng rng(cfg.seed);

  std::vector<std::size_t> order(corpus.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t k_steps = cfg.num_steps;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    StepLosses ep;
    ep.per_step.assign(k_steps, 0.0);
    ep.accuracies.assign(k_steps, 0.0);
    std::size_t n_windows = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_utts) {
      const std::size_t batch =
          std::min(cfg.batch_utts, order.size() - start);
      Graph g;
      const CpcParamIds ids = register_cpc_params(g, res.model);
      NodeId batch_total = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        const auto& wav = corpus.samples[order[start + b]];
        const auto crop = static_cast<std::size_t>(rng.uniform_int(
            0, static_cast<std::int64_t>(wav.size() - cfg.window_samples)));
        const auto wl = build_window_loss(g, ids, wav.data() + crop,
                                          cfg.window_samples, cfg, rng);
        batch_total = b == 0 ? wl.total : g.add(batch_total, wl.total);
        for (std::size_t k = 0; k < k_steps; ++k) {
          ep.per_step[k] += wl.step_values[k];
          ep.accuracies[k] += wl.step_accs[k];
        }
        ++n_windows;
      }
      g.backward(g.scale(batch_total, 1.0 / static_cast<double>(batch)));
      adam_step(params, g.param_gradients(), adam);
    }
    for (std::size_t k = 0; k < k_steps; ++k) {
      ep.per_step[k] /= static_cast<double>(n_windows);
      ep.accuracies[k] /= static_cast<double>(n_windows);
      ep.total += ep.per_step[k];
    }
    res.curve.push_back(std::move(ep));
  }
  return res;
}

// identical loop, picking up from the given weights
inline PretrainResult finetune_backbone(const CpcModel& model,
                                        const Manifest& manifest,
                                        const CpcConfig& cfg) {
  return pretrain(model, manifest, cfg);
}

// forward-only pass over the corpus with the same seeded crop and
// negative draws as a training epoch, without the shuffle
inline StepLosses evaluate_cpc_loss(const CpcModel& model,
                                    const Manifest& manifest,
                                    const CpcConfig& cfg) {
  cfg.validate();
  auto corpus = detail::load_training_audio(manifest, cfg.window_samples);
  Rng rng(cfg.seed);
  StepLosses out;
  out.per_step.assign(cfg.num_steps, 0.0);
  out.accuracies.assign(cfg.num_steps, 0.0);
  std::size_t n_windows = 0;
  for (const auto& wav : corpus.samples) {
    Graph g;
    const CpcParamIds ids = register_cpc_params(g, model);
    const auto crop = static_cast<std::size_t>(rng.uniform_int(
        0, static_cast<std::int64_t>(wav.size() - cfg.window_samples)));
    const auto wl = build_window_loss(g, ids, wav.data() + crop,
                                      cfg.window_samples, cfg, rng);
    for (std::size_t k = 0; k < cfg.num_steps; ++k) {
      out.per_step[k] += wl.step_values[k];
      out.accuracies[k] += wl.step_accs[k];
    }
    ++n_windows;
  }
  for (std::size_t k = 0; k < cfg.num_steps; ++k) {
    out.per_step[k] /= static_cast<double>(n_windows);
    out.accuracies[k] /= static_cast<double>(n_windows);
    out.total += out.per_step[k];
  }
  return out;
}

// CSV: epoch, l_1..l_K, total, acc_1..acc_K; one row per epoch
inline void write_loss_curve(const std::vector<StepLosses>& curve,
                             std::size_t k_steps,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << "epoch";
  for (std::size_t k = 1; k <= k_steps; ++k) out << ",l_" << k;
  out << ",total";
  for (std::size_t k = 1; k <= k_steps; ++k) out << ",acc_" << k;
  out << "\n";
  char buf[32];
  for (std::size_t e = 0; e < curve.size(); ++e) {
    out << (e + 1);
    const auto put = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.10g", v);
      out << ',' << buf;
    };
    for (double v : curve[e].per_step) put(v);
    put(curve[e].total);
    for (double v : curve[e].accuracies) put(v);
    out << "\n";
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace lowra

#endif  // LOWRA_CPC_HPP
