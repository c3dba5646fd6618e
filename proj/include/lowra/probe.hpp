// lowra/probe.hpp

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

#ifndef LOWRA_PROBE_HPP
#define LOWRA_PROBE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lowra/autodiff.hpp"
#include "lowra/cpc.hpp"
#include "lowra/ctc.hpp"
#include "lowra/error.hpp"
#include "lowra/features.hpp"
#include "lowra/manifest.hpp"
#include "lowra/mfcc.hpp"
#include "lowra/optim.hpp"
#include "lowra/rng.hpp"
#include "lowra/tensor.hpp"
#include "lowra/wav.hpp"

namespace lowra {

enum class FeatureKind { mfcc, cpc_context };

enum class RegimeKind { frozen, finetune };

struct TrainRegime {
  RegimeKind kind = RegimeKind::frozen;
  std::size_t epochs = 30;
  double lr = 1e-3;
  std::size_t stack_width = 8;
  std::uint64_t seed = 0;

  void validate() const {
    std::string err;
    if (lr <= 0) err += "lr must be positive; ";
    if (stack_width < 1) err += "stack_width must be >= 1; ";
    if (!err.empty()) fail(ErrorCode::ConfigError, "train regime: " + err);
  }
};

// Linear CTC head over stacked feature frames.  Class 0 is the blank;
// classes 1..V follow the manifest inventory order.
struct ProbeModel {
  Tensor weight;  // (stack_width * D_in) x (|inventory| + 1)
  Tensor bias;    // (|inventory| + 1)
  std::vector<std::string> symbol_table;
  std::size_t stack_width = 8;

  static ProbeModel init(std::size_t d_in_stacked,
                         const std::vector<std::string>& inventory,
                         std::size_t stack_width) {
    ProbeModel p;
    p.stack_width = stack_width;
    p.symbol_table.push_back(kBlankSymbol);
    p.symbol_table.insert(p.symbol_table.end(), inventory.begin(),
                          inventory.end());
    p.weight = Tensor::zeros({d_in_stacked, p.symbol_table.size()});
    p.bias = Tensor::zeros({p.symbol_table.size()});
    return p;
  }

  std::size_t n_classes() const { return symbol_table.size(); }
  std::size_t d_in() const { return weight.shape[0]; }
};

// Non-overlapping concatenation of width consecutive frames; the
// trailing remainder is dropped.
inline FeatureSequence stack_frames(const FeatureSequence& f,
                                    std::size_t width = 8) {
  if (width < 1) fail(ErrorCode::ConfigError, "stack width must be >= 1");
  const std::size_t t_in = f.t_len(), d = f.dim();
  if (t_in < width)
    fail(ErrorCode::TooShort,
         "cannot stack " + std::to_string(width) + " frames out of " +
             std::to_string(t_in));
  const std::size_t t_out = t_in / width;
  FeatureSequence out;
  out.frames = Tensor({t_out, width * d});
  // row-major input: width consecutive rows are already contiguous
  std::copy(f.frames.data.begin(),
            f.frames.data.begin() +
                static_cast<std::ptrdiff_t>(t_out * width * d),
            out.frames.data.begin());
  out.frame_hop_ms = f.frame_hop_ms * static_cast<double>(width);
  out.origin = f.origin;
  return out;
}

// Per-frame argmax (ties toward the lowest index), collapse adjacent
// repeats, drop blanks.
inline std::vector<int> greedy_ids(const Tensor& log_probs) {
  if (log_probs.rank() != 2)
    fail(ErrorCode::ShapeMismatch, "greedy_decode expects a T x V matrix");
  std::vector<int> out;
  int prev = -1;
  for (std::size_t t = 0; t < log_probs.rows(); ++t) {
    const double* row = log_probs.row(t);
    std::size_t best = 0;
    for (std::size_t v = 1; v < log_probs.cols(); ++v)
      if (row[v] > row[best]) best = v;
    const int id = static_cast<int>(best);
    if (id != prev && id != kCtcBlank) out.push_back(id);
    prev = id;
  }
  return out;
}

inline std::vector<std::string> greedy_decode(
    const Tensor& log_probs, const std::vector<std::string>& symbol_table) {
  std::vector<std::string> out;
  for (int id : greedy_ids(log_probs)) {
    if (static_cast<std::size_t>(id) >= symbol_table.size())
      fail(ErrorCode::ShapeMismatch, "decoded id outside the symbol table");
    out.push_back(symbol_table[static_cast<std::size_t>(id)]);
  }
  return out;
}

inline std::vector<int> targets_from(
    const std::vector<std::string>& transcript,
    const std::vector<std::string>& symbol_table) {
  std::unordered_map<std::string, int> lookup;
  for (std::size_t i = 1; i < symbol_table.size(); ++i)
    lookup.emplace(symbol_table[i], static_cast<int>(i));
  std::vector<int> out;
  out.reserve(transcript.size());
  for (const auto& s : transcript) {
    const auto it = lookup.find(s);
    if (it == lookup.end())
      fail(ErrorCode::ConfigError,
           "transcript symbol '" + s + "' missing from the inventory");
    out.push_back(it->second);
  }
  return out;
}

inline FeatureSequence compute_features(const CpcModel* backbone,
                                        FeatureKind kind, const Waveform& w,
                                        const MfccConfig& mfcc_cfg) {
  if (kind == FeatureKind::mfcc) return mfcc(w, mfcc_cfg);
  if (backbone == nullptr)
    fail(ErrorCode::ConfigError, "cpc_context features need a backbone");
  return contextualize(*backbone, encode(*backbone, w));
}

struct ProbeTrainResult {
  ProbeModel probe;
  CpcModel backbone;  // moved by training only in the finetune regime
  std::vector<double> epoch_losses;  // mean CTC nll per epoch
  std::size_t skipped_infeasible = 0;
};

// Supervised CTC training of the linear head: per epoch, shuffle the
// utterances, and for each one stack features, apply the head, take
// log-softmax, and make one Adam step on the CTC loss.  The learning
// rate cosine-decays from regime.lr to zero across the schedule.
// Frozen keeps the backbone out of the graph entirely; finetune
// backprops through conv, GRU and stacking down to the waveform.
inline ProbeTrainResult train_probe(const CpcModel* backbone,
                                    FeatureKind kind, const Manifest& manifest,
                                    const TrainRegime& regime,
                                    const MfccConfig& mfcc_cfg = {}) {
  regime.validate();
  const bool finetune = regime.kind == RegimeKind::finetune;
  if (finetune && kind != FeatureKind::cpc_context)
    fail(ErrorCode::ConfigError,
         "the finetune regime needs cpc_context features");
  if (kind == FeatureKind::cpc_context && backbone == nullptr)
    fail(ErrorCode::ConfigError, "cpc_context features need a backbone");

  ProbeTrainResult res;
  if (backbone != nullptr) res.backbone = *backbone;

  struct Item {
    Tensor stacked;            // frozen path: precomputed input rows
    std::vector<double> wave;  // finetune path: raw samples
    std::vector<int> targets;
  };
  std::vector<Item> items;
  const std::vector<std::string> symbols = [&] {
    std::vector<std::string> s{kBlankSymbol};
    s.insert(s.end(), manifest.inventory.begin(), manifest.inventory.end());
    return s;
  }();

  std::size_t d_in_stacked = 0;
  for (const auto& u : manifest.utterances) {
    const auto w = decode_wav(manifest.resolve(u));
    auto targets = targets_from(u.transcript, symbols);
    const std::size_t need = min_ctc_len(targets);
    try {
      const auto stacked = stack_frames(
          compute_features(backbone, kind, w, mfcc_cfg), regime.stack_width);
      d_in_stacked = stacked.dim();
      if (stacked.t_len() < need) {
        ++res.skipped_infeasible;
        continue;
      }
      Item item;
      item.targets = std::move(targets);
      if (finetune)
        item.wave = w.samples;
      else
        item.stacked = stacked.frames;
      items.push_back(std::move(item));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TooShort) {
        ++res.skipped_infeasible;
        continue;
      }
      throw;
    }
  }
  if (items.empty())
    fail(ErrorCode::AllUtterancesInfeasible,
         "every utterance is too short for its transcript");

  res.probe =
      ProbeModel::init(d_in_stacked, manifest.inventory, regime.stack_width);

  std::vector<Tensor*> params{&res.probe.weight, &res.probe.bias};
  auto backbone_named = res.backbone.named_params();
  if (finetune)
    for (auto& [name, t] : backbone_named) params.push_back(t);
  AdamState adam;
  adam.lr = regime.lr;
  Rng rng(regime.seed);

  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < regime.epochs; ++epoch) {
    // cosine decay from regime.lr to zero across the epoch schedule
    adam.lr = regime.lr * 0.5 *
              (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) /
                              static_cast<double>(regime.epochs)));
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (const std::size_t i : order) {
      Graph g;
      const NodeId w_id = g.param(res.probe.weight);
      const NodeId b_id = g.param(res.probe.bias);
      NodeId stacked;
      CpcParamIds backbone_ids;
      if (finetune) {
        backbone_ids = register_cpc_params(g, res.backbone);
        Tensor x({1, items[i].wave.size()}, items[i].wave);
        const NodeId latents =
            build_latents(g, backbone_ids, g.leaf(std::move(x)),
                          res.backbone.config);
        const NodeId contexts = lowra::gru(g, latents, backbone_ids.gru);
        const std::size_t t_in = g.value(contexts).shape[0];
        const std::size_t t_out = t_in / regime.stack_width;
        stacked = g.reshape(
            g.slice_rows(contexts, 0, t_out * regime.stack_width),
            {t_out, regime.stack_width * g.value(contexts).shape[1]});
      } else {
        stacked = g.leaf(items[i].stacked);
      }
      const NodeId logits = g.add_rowvec(g.matmul(stacked, w_id), b_id);
      const NodeId logp = g.log_softmax(logits);
      const NodeId loss = ctc_loss(g, logp, items[i].targets);
      loss_sum += g.value(loss).data[0];
      g.backward(loss);
      adam_step(params, g.param_gradients(), adam);
    }
    res.epoch_losses.push_back(loss_sum / static_cast<double>(items.size()));
  }
  return res;
}

// features -> stack -> linear -> log-softmax -> greedy decode
inline std::vector<std::string> transcribe(const CpcModel* backbone,
                                           const ProbeModel& probe,
                                           FeatureKind kind, const Waveform& w,
                                           const MfccConfig& mfcc_cfg = {}) {
  const auto stacked =
      stack_frames(compute_features(backbone, kind, w, mfcc_cfg),
                   probe.stack_width);
  if (stacked.dim() != probe.d_in())
    fail(ErrorCode::ShapeMismatch,
         "stacked feature dim " + std::to_string(stacked.dim()) +
             " does not match the probe input dim " +
             std::to_string(probe.d_in()));
  Tensor logits = matmul(stacked.frames, probe.weight);
  for (std::size_t t = 0; t < logits.rows(); ++t)
    for (std::size_t v = 0; v < logits.cols(); ++v)
      logits.at(t, v) += probe.bias.data[v];
  // rowwise log-softmax, stable
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    double* row = logits.row(t);
    double mx = row[0];
    for (std::size_t v = 1; v < logits.cols(); ++v) mx = std::max(mx, row[v]);
    double z = 0.0;
    for (std::size_t v = 0; v < logits.cols(); ++v) z += std::exp(row[v] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t v = 0; v < logits.cols(); ++v) row[v] -= lse;
  }
  return greedy_decode(logits, probe.symbol_table);
}

}  // namespace lowra

#endif  // LOWRA_PROBE_HPP
