#ifndef LOWRA_COMMANDS_HPP
#define LOWRA_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lowra/checkpoint.hpp"
#include "lowra/config.hpp"
#include "lowra/cpc.hpp"
#include "lowra/ctc.hpp"
#include "lowra/eval.hpp"
#include "lowra/gradcheck.hpp"
#include "lowra/manifest.hpp"
#include "lowra/mfcc.hpp"
#include "lowra/probe.hpp"
#include "lowra/synth.hpp"
#include "lowra/wav.hpp"

// One function per CLI subcommand, kept out of main() so tests and the
// acceptance harness can drive the exact code paths the binary runs.

namespace lowra {

namespace detail {

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string());
}

}  // namespace detail

// ---- synth: corpus + three split manifests on disk ----

struct SynthOutputs {
  Manifest full, train, dev, test;
};

inline SynthOutputs cmd_synth(const RunConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir = cfg.corpus_dir;
  auto full = synth_corpus(cfg.synth, dir);
  auto parts = split_manifest(full, cfg.train_frac, cfg.dev_frac, cfg.split_seed);
  save_manifest(full, dir / "all.tsv");
  save_manifest(parts[0], cfg.train_manifest());
  save_manifest(parts[1], cfg.dev_manifest());
  save_manifest(parts[2], cfg.test_manifest());
  return {std::move(full), std::move(parts[0]), std::move(parts[1]),
          std::move(parts[2])};
}

// ---- pretrain: backbone checkpoint + per-epoch loss curve ----

struct PretrainOutputs {
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;
  PretrainResult result;
};

inline PretrainOutputs cmd_pretrain(
    const RunConfig& cfg, const std::filesystem::path& init_ckpt = {}) {
  cfg.validate();
  const auto train = load_manifest(cfg.train_manifest());

  CpcModel init_model = CpcModel::init(cfg.cpc);
  CpcConfig train_cfg = cfg.cpc;
  if (!init_ckpt.empty()) {
    // resume: architecture comes from the checkpoint, training knobs
    // from the current config
    init_model = load_cpc_checkpoint(init_ckpt);
    train_cfg = init_model.config;
    train_cfg.epochs = cfg.cpc.epochs;
    train_cfg.batch_utts = cfg.cpc.batch_utts;
    train_cfg.window_samples = cfg.cpc.window_samples;
    train_cfg.n_negatives = cfg.cpc.n_negatives;
    train_cfg.lr = cfg.cpc.lr;
    train_cfg.seed = cfg.cpc.seed;
  }

  auto result = init_ckpt.empty()
                    ? pretrain(init_model, train, train_cfg)
                    : finetune_backbone(init_model, train, train_cfg);

  const std::filesystem::path out = cfg.out_dir;
  detail::ensure_dir(out);
  PretrainOutputs o;
  o.checkpoint = out / "cpc.ckpt";
  o.loss_csv = out / "pretrain_loss.csv";
  save_cpc_checkpoint(result.model, o.checkpoint);
  write_loss_curve(result.curve, train_cfg.num_steps, o.loss_csv);
  write_resolved_config(cfg, out / "config.resolved");
  o.result = std::move(result);
  return o;
}

// ---- scoring shared by probe/eval ----

// Transcribes every utterance and scores against the manifest
// transcripts.  An utterance too short to featurize yields an empty
// hypothesis and is scored as deletions rather than crashing the run.
inline EvalResult score_probe(const CpcModel* backbone, const ProbeModel& probe,
                              FeatureKind kind, const Manifest& manifest,
                              const MfccConfig& mfcc_cfg, std::string model_name,
                              std::string pretrain_desc, bool frozen,
                              std::string budget, std::string corpus) {
  std::vector<std::vector<std::string>> refs, hyps;
  for (const auto& u : manifest.utterances) {
    const auto w = decode_wav(manifest.resolve(u));
    std::vector<std::string> hyp;
    try {
      hyp = transcribe(backbone, probe, kind, w, mfcc_cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooShort) throw;
    }
    refs.push_back(u.transcript);
    hyps.push_back(std::move(hyp));
  }
  const auto p = per(refs, hyps);
  EvalResult r;
  r.model_name = std::move(model_name);
  r.pretrain_desc = std::move(pretrain_desc);
  r.frozen = frozen;
  r.train_budget_desc = std::move(budget);
  r.corpus = std::move(corpus);
  r.per = p.per;
  r.n_ref_phones = p.n_ref_phones;
  r.n_edits = p.n_edits;
  return r;
}

inline std::string corpus_label(const RunConfig& cfg) {
  const auto name = std::filesystem::path(cfg.corpus_dir).filename().string();
  return name.empty() ? cfg.corpus_dir : name;
}

// ---- probe: train a CTC head, evaluate on the test split ----

struct ProbeOutputs {
  std::filesystem::path probe_ckpt;
  std::filesystem::path finetuned_backbone;  // empty in the frozen regime
  std::filesystem::path eval_csv;
  EvalResult eval;
  ProbeTrainResult train;
};

inline ProbeOutputs cmd_probe(const RunConfig& cfg,
                              const std::filesystem::path& backbone_ckpt = {}) {
  cfg.validate();
  const bool use_cpc = cfg.features == FeatureKind::cpc_context;
  if (use_cpc && backbone_ckpt.empty())
    fail(ErrorCode::ConfigError,
         "cpc_context features need --init pointing at a backbone checkpoint");

  std::optional<CpcModel> backbone;
  if (use_cpc) backbone = load_cpc_checkpoint(backbone_ckpt);

  const auto train_m = load_manifest(cfg.train_manifest());
  auto trained = train_probe(use_cpc ? &*backbone : nullptr, cfg.features,
                             train_m, cfg.regime, cfg.mfcc);

  const std::filesystem::path out = cfg.out_dir;
  detail::ensure_dir(out);
  ProbeOutputs o;
  o.probe_ckpt = out / "probe.ckpt";
  save_probe_checkpoint(trained.probe, cfg.features, o.probe_ckpt);
  if (use_cpc && cfg.regime.kind == RegimeKind::finetune) {
    o.finetuned_backbone = out / "cpc_finetuned.ckpt";
    save_cpc_checkpoint(trained.backbone, o.finetuned_backbone);
  }

  const auto test_m = load_manifest(cfg.test_manifest());
  const CpcModel* eval_backbone = use_cpc ? &trained.backbone : nullptr;
  o.eval = score_probe(
      eval_backbone, trained.probe, cfg.features, test_m, cfg.mfcc,
      cfg.experiment,
      use_cpc ? backbone_ckpt.stem().string() : std::string("No"),
      cfg.regime.kind == RegimeKind::frozen,
      std::to_string(train_m.utterances.size()) + " utts", corpus_label(cfg));
  o.eval_csv = out / "eval.csv";
  append_eval_row(o.eval, o.eval_csv);
  write_resolved_config(cfg, out / "config.resolved");
  o.train = std::move(trained);
  return o;
}

// ---- transcribe: one wav through a saved probe ----

inline std::vector<std::string> cmd_transcribe(
    const std::filesystem::path& probe_ckpt,
    const std::filesystem::path& backbone_ckpt,
    const std::filesystem::path& wav_path, const MfccConfig& mfcc_cfg = {}) {
  const auto lp = load_probe_checkpoint(probe_ckpt);
  std::optional<CpcModel> backbone;
  if (lp.feature_kind == FeatureKind::cpc_context) {
    if (backbone_ckpt.empty())
      fail(ErrorCode::ConfigError,
           "probe was trained on cpc_context features; pass --init with the "
           "backbone checkpoint");
    backbone = load_cpc_checkpoint(backbone_ckpt);
  }
  const auto w = decode_wav(wav_path);
  return transcribe(backbone ? &*backbone : nullptr, lp.probe, lp.feature_kind,
                    w, mfcc_cfg);
}

// ---- eval: re-score a saved probe on the test split ----

inline EvalResult cmd_eval(const RunConfig& cfg,
                           const std::filesystem::path& probe_ckpt,
                           const std::filesystem::path& backbone_ckpt = {}) {
  const auto lp = load_probe_checkpoint(probe_ckpt);
  std::optional<CpcModel> backbone;
  if (lp.feature_kind == FeatureKind::cpc_context) {
    if (backbone_ckpt.empty())
      fail(ErrorCode::ConfigError,
           "probe was trained on cpc_context features; pass --init with the "
           "backbone checkpoint");
    backbone = load_cpc_checkpoint(backbone_ckpt);
  }
  const auto test_m = load_manifest(cfg.test_manifest());
  auto r = score_probe(
      backbone ? &*backbone : nullptr, lp.probe, lp.feature_kind, test_m,
      cfg.mfcc, cfg.experiment,
      backbone ? backbone_ckpt.stem().string() : std::string("No"),
      cfg.regime.kind == RegimeKind::frozen, "-", corpus_label(cfg));
  detail::ensure_dir(cfg.out_dir);
  append_eval_row(r, std::filesystem::path(cfg.out_dir) / "eval.csv");
  return r;
}

// ---- report: CSVs in, markdown out ----

inline std::string cmd_report(const std::vector<std::filesystem::path>& csvs,
                              ReportLayout layout) {
  std::vector<EvalResult> rows;
  for (const auto& p : csvs) {
    auto part = read_eval_csv(p);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return render_report(rows, layout).markdown;
}

// ---- gradcheck: finite differences against the tape ----

struct GradcheckSuite {
  std::string name;
  GradCheckResult result;
};

namespace detail {

// A multiplicative corruption applied only to the first (analytic)
// build makes the tape gradient disagree with every finite-difference
// probe; exercises the failure path end to end.
struct FaultInjector {
  bool armed = false;
  std::size_t calls = 0;
  NodeId apply(Graph& g, NodeId loss) {
    const bool corrupt = armed && calls == 0;
    ++calls;
    return corrupt ? g.scale(loss, 1.05) : loss;
  }
};

inline GradCheckResult merge_checks(const std::vector<GradCheckResult>& rs) {
  GradCheckResult m;
  for (const auto& r : rs) {
    m.n_checked += r.n_checked;
    m.pass = m.pass && r.pass;
    if (r.max_rel_err >= m.max_rel_err) {
      m.max_rel_err = r.max_rel_err;
      m.worst = r.worst;
    }
  }
  return m;
}

inline GradCheckResult gradcheck_primitives(bool inject_fault) {
  std::vector<GradCheckResult> parts;
  Rng rng(1002);

  {
    // conv stack: conv1d -> tanh -> mean
    FaultInjector fault{inject_fault};
    std::vector<Tensor> params = {Tensor::uniform({3, 2, 5}, 0.8, rng),
                                  Tensor::uniform({3}, 0.5, rng),
                                  Tensor::uniform({2, 40}, 0.9, rng)};
    parts.push_back(check_gradients(
        params, [&](Graph& g, const std::vector<NodeId>& ids) {
          return fault.apply(
              g, g.mean(g.tanh(g.conv1d(ids[2], ids[0], ids[1], 2))));
        }));
  }
  {
    // dense path: matmul -> add_rowvec -> log_softmax -> select_col
    std::vector<Tensor> params = {Tensor::uniform({5, 4}, 0.9, rng),
                                  Tensor::uniform({4, 6}, 0.9, rng),
                                  Tensor::uniform({6}, 0.4, rng)};
    parts.push_back(check_gradients(
        params, [&](Graph& g, const std::vector<NodeId>& ids) {
          const auto logits =
              g.add_rowvec(g.matmul(ids[0], ids[1]), ids[2]);
          return g.mean(g.select_col(g.log_softmax(logits), 1));
        }));
  }
  {
    // gather/score path: gather_rows -> rowwise_dot -> concat_cols
    std::vector<Tensor> params = {Tensor::uniform({7, 3}, 0.9, rng),
                                  Tensor::uniform({4, 3}, 0.9, rng)};
    parts.push_back(check_gradients(
        params, [&](Graph& g, const std::vector<NodeId>& ids) {
          const auto picked = g.gather_rows(ids[0], {1, 4, 4, 6});
          const auto s0 = g.rowwise_dot(picked, ids[1]);
          const auto s1 = g.rowwise_dot(ids[1], ids[1]);
          const auto cols = g.concat_cols({s0, s1});
          return g.mean(g.tanh(cols));
        }));
  }
  return merge_checks(parts);
}

inline GradCheckResult gradcheck_cpc_loss() {
  // Half a second of audio through a narrow pipeline.  Zero-init heads
  // would zero out every upstream gradient, so they are randomized; the
  // remaining non-bias weights are scaled up to keep the weakest
  // reset-gate coordinate above the finite-difference noise floor.
  CpcConfig cfg;
  cfg.enc_channels = {4, 4, 4};
  cfg.enc_kernels = {10, 8, 4};
  cfg.enc_strides = {5, 4, 2};
  cfg.latent_dim = 4;
  cfg.context_dim = 6;
  cfg.num_steps = 2;
  cfg.n_negatives = 3;
  cfg.window_samples = 8000;
  cfg.seed = 21;
  auto m = CpcModel::init(cfg);
  {
    auto named = m.named_params();
    for (auto& [name, t] : named)
      if (name.rfind("gru.b", 0) != 0 && name.find(".bias") == std::string::npos)
        for (auto& v : t->data) v *= 2.5;
  }
  Rng hr(87);
  for (auto& h : m.heads)
    h = Tensor::uniform({cfg.context_dim, cfg.latent_dim}, 0.5, hr);

  Rng wrng(39);
  std::vector<double> window(cfg.window_samples);
  for (auto& v : window) v = wrng.uniform(-0.9, 0.9);

  std::vector<Tensor> params;
  auto named = m.named_params();
  for (auto& [name, t] : named) params.push_back(*t);

  const auto build = [&](Graph& g, const std::vector<NodeId>& ids_flat) {
    CpcParamIds ids;
    std::size_t at = 0;
    for (std::size_t i = 0; i < cfg.n_layers(); ++i) {
      ids.enc_w.push_back(ids_flat[at++]);
      ids.enc_b.push_back(ids_flat[at++]);
    }
    for (std::size_t i = 0; i < 9; ++i) ids.gru[i] = ids_flat[at++];
    for (std::size_t k = 0; k < cfg.num_steps; ++k)
      ids.heads.push_back(ids_flat[at++]);
    Rng rng(123);  // same negatives on every rebuild
    return build_window_loss(g, ids, window.data(), window.size(), cfg, rng)
        .total;
  };
  return check_gradients(params, build, 1e-5, 1e-4);
}

inline GradCheckResult gradcheck_ctc_loss() {
  Rng rng(77);
  std::vector<Tensor> params = {Tensor::uniform({6, 4}, 1.0, rng)};
  const std::vector<int> targets = {1, 2, 1};
  return check_gradients(params,
                         [&](Graph& g, const std::vector<NodeId>& ids) {
                           return ctc_loss(g, g.log_softmax(ids[0]), targets);
                         });
}

}  // namespace detail

inline std::vector<GradcheckSuite> cmd_gradcheck(bool inject_fault = false) {
  std::vector<GradcheckSuite> suites;
  suites.push_back({"primitives", detail::gradcheck_primitives(inject_fault)});
  suites.push_back({"cpc_loss", detail::gradcheck_cpc_loss()});
  suites.push_back({"ctc_loss", detail::gradcheck_ctc_loss()});
  return suites;
}

}  // namespace lowra

#endif  // LOWRA_COMMANDS_HPP
