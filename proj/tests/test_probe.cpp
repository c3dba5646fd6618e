#include <cmath>
#include <cstring>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "lowra/probe.hpp"
#include "lowra/synth.hpp"
#include "testutil.hpp"

using namespace lowra;

namespace {

CpcConfig small_backbone_config() {
  CpcConfig cfg;
  cfg.enc_channels = {8, 8};
  cfg.enc_kernels = {10, 8};
  cfg.enc_strides = {5, 4};
  cfg.latent_dim = 8;
  cfg.context_dim = 12;
  cfg.num_steps = 2;
  cfg.n_negatives = 3;
  cfg.window_samples = 2000;
  cfg.seed = 4;
  return cfg;
}

Manifest tone_corpus(const std::filesystem::path& dir, std::uint64_t seed,
                     std::size_t n_utts = 12) {
  SynthSpec spec;
  spec.n_phones = 3;
  spec.n_utterances = n_utts;
  spec.phones_per_utt = {4, 6};
  spec.phone_dur_ms = {120, 160};
  spec.seed = seed;
  return synth_corpus(spec, dir);
}

bool backbone_equal(CpcModel& a, CpcModel& b) {
  auto pa = a.named_params(), pb = b.named_params();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (std::memcmp(pa[i].second->data.data(), pb[i].second->data.data(),
                    pa[i].second->data.size() * sizeof(double)) != 0)
      return false;
  return true;
}

Tensor logp_from_ids(const std::vector<int>& argmax_ids, std::size_t v) {
  // rows whose argmax is exactly the requested id
  Tensor t({argmax_ids.size(), v});
  for (std::size_t r = 0; r < argmax_ids.size(); ++r)
    for (std::size_t c = 0; c < v; ++c)
      t.at(r, c) = c == static_cast<std::size_t>(argmax_ids[r]) ? -0.1 : -3.0;
  return t;
}

}  // namespace

TEST_CASE("stack_frames tiles non-overlapping windows") {
  FeatureSequence f;
  f.frames = Tensor({16, 4});
  for (std::size_t t = 0; t < 16; ++t)
    for (std::size_t d = 0; d < 4; ++d)
      f.frames.at(t, d) = 10.0 * static_cast<double>(t) + static_cast<double>(d);
  f.frame_hop_ms = 10.0;
  f.origin = FeatureOrigin::mfcc;

  SECTION("16 frames of dim 4 stack to 2 x 32") {
    const auto s = stack_frames(f, 8);
    REQUIRE(s.t_len() == 2);
    REQUIRE(s.dim() == 32);
    CHECK(s.frame_hop_ms == Catch::Approx(80.0));
    CHECK(s.origin == FeatureOrigin::mfcc);
    for (std::size_t j = 0; j < 32; ++j) {
      CHECK(s.frames.at(0, j) == f.frames.at(j / 4, j % 4));
      CHECK(s.frames.at(1, j) == f.frames.at(8 + j / 4, j % 4));
    }
  }

  SECTION("trailing remainder is dropped") {
    FeatureSequence g = f;
    g.frames = Tensor({15, 4});
    for (std::size_t t = 0; t < 15; ++t)
      for (std::size_t d = 0; d < 4; ++d) g.frames.at(t, d) = f.frames.at(t, d);
    const auto s = stack_frames(g, 8);
    CHECK(s.t_len() == 1);
    CHECK(s.dim() == 32);
  }

  SECTION("unstacking reproduces the kept input rows exactly") {
    const auto s = stack_frames(f, 8);
    for (std::size_t tp = 0; tp < s.t_len(); ++tp)
      for (std::size_t w = 0; w < 8; ++w)
        for (std::size_t d = 0; d < 4; ++d)
          REQUIRE(s.frames.at(tp, w * 4 + d) == f.frames.at(tp * 8 + w, d));
  }

  SECTION("too few frames") {
    FeatureSequence g = f;
    g.frames = Tensor({7, 4});
    CHECK_THROWS_AS(stack_frames(g, 8), Error);
  }
}

TEST_CASE("greedy decoding") {
  const std::vector<std::string> table{"<blank>", "a", "b"};

  SECTION("collapse and blank removal") {
    const auto logp = logp_from_ids({0, 1, 1, 0, 2}, 3);
    CHECK(greedy_decode(logp, table) == std::vector<std::string>{"a", "b"});
  }

  SECTION("all blanks decode to nothing") {
    const auto logp = logp_from_ids({0, 0, 0, 0}, 3);
    CHECK(greedy_decode(logp, table).empty());
  }

  SECTION("blank separates a genuine repeat") {
    const auto logp = logp_from_ids({1, 0, 1}, 3);
    CHECK(greedy_decode(logp, table) == std::vector<std::string>{"a", "a"});
  }

  SECTION("ties resolve toward the lowest index") {
    Tensor logp({2, 3});
    for (auto& v : logp.data) v = -std::log(3.0);
    CHECK(greedy_decode(logp, table).empty());  // blank wins every tie
    logp.at(1, 0) = -5.0;                        // now a ties with b
    CHECK(greedy_decode(logp, table) == std::vector<std::string>{"a"});
  }

  SECTION("random matrices match an independent collapse-then-strip") {
    Rng rng(71);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t t_len = 1 + rng.next_u64() % 12;
      Tensor logp({t_len, 4});
      for (auto& v : logp.data) v = rng.uniform(-4.0, 0.0);
      // re-derive: per-frame argmax, drop run repeats, drop blanks
      std::vector<int> expect;
      int prev = -1;
      for (std::size_t t = 0; t < t_len; ++t) {
        int best = 0;
        for (int v = 1; v < 4; ++v)
          if (logp.at(t, static_cast<std::size_t>(v)) >
              logp.at(t, static_cast<std::size_t>(best)))
            best = v;
        if (best != prev && best != kCtcBlank) expect.push_back(best);
        prev = best;
      }
      const auto ids = greedy_ids(logp);
      REQUIRE(ids == expect);
      for (int id : ids) REQUIRE(id != kCtcBlank);
      // repeats may survive only when a blank or another symbol sat
      // between them in the alignment; runs themselves never repeat
    }
  }
}

TEST_CASE("target lookup follows the symbol table") {
  const std::vector<std::string> table{"<blank>", "p0", "p1", "p2"};
  CHECK(targets_from({"p1", "p0", "p2", "p1"}, table) ==
        std::vector<int>{2, 1, 3, 2});
  CHECK_THROWS_AS(targets_from({"p9"}, table), Error);
}

TEST_CASE("zero probe transcribes silence") {
  // uniform rows: argmax lands on index 0, the blank, everywhere
  auto cfg = small_backbone_config();
  const auto backbone = CpcModel::init(cfg);
  Waveform w;
  w.sample_rate_hz = 16000;
  Rng rng(9);
  w.samples.resize(4000);
  for (auto& v : w.samples) v = rng.uniform(-0.3, 0.3);

  const std::size_t width = 8;
  const auto ctx = contextualize(backbone, encode(backbone, w));
  const auto probe =
      ProbeModel::init(width * ctx.dim(), {"p0", "p1", "p2"}, width);
  CHECK(probe.symbol_table.front() == std::string(kBlankSymbol));
  CHECK(transcribe(&backbone, probe, FeatureKind::cpc_context, w).empty());
}

TEST_CASE("frozen probe training on cpc contexts") {
  testutil::TempDir dir;
  const auto manifest = tone_corpus(dir.path, 31);
  const auto backbone = CpcModel::init(small_backbone_config());

  TrainRegime regime;
  regime.kind = RegimeKind::frozen;
  regime.epochs = 12;
  regime.stack_width = 8;
  regime.seed = 5;

  auto res = train_probe(&backbone, FeatureKind::cpc_context, manifest, regime);
  REQUIRE(res.epoch_losses.size() == 12);
  CHECK(res.skipped_infeasible == 0);
  CHECK(res.epoch_losses.back() < res.epoch_losses.front());

  SECTION("backbone stays bit-identical") {
    auto before = backbone;
    CHECK(backbone_equal(res.backbone, before));
  }

  SECTION("training is deterministic") {
    auto res2 =
        train_probe(&backbone, FeatureKind::cpc_context, manifest, regime);
    CHECK(res2.epoch_losses == res.epoch_losses);
    CHECK(std::memcmp(res2.probe.weight.data.data(),
                      res.probe.weight.data.data(),
                      res.probe.weight.data.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(res2.probe.bias.data.data(), res.probe.bias.data.data(),
                      res.probe.bias.data.size() * sizeof(double)) == 0);
  }

  SECTION("zero epochs returns the probe at initialization") {
    auto r0 = regime;
    r0.epochs = 0;
    auto res0 =
        train_probe(&backbone, FeatureKind::cpc_context, manifest, r0);
    CHECK(res0.epoch_losses.empty());
    for (double v : res0.probe.weight.data) REQUIRE(v == 0.0);
    for (double v : res0.probe.bias.data) REQUIRE(v == 0.0);
  }

  SECTION("symbol table is blank plus the sorted inventory") {
    REQUIRE(res.probe.symbol_table.size() == manifest.inventory.size() + 1);
    CHECK(res.probe.symbol_table[0] == std::string(kBlankSymbol));
    for (std::size_t i = 0; i < manifest.inventory.size(); ++i)
      CHECK(res.probe.symbol_table[i + 1] == manifest.inventory[i]);
  }
}

TEST_CASE("frozen probe training on mfcc features") {
  testutil::TempDir dir;
  const auto manifest = tone_corpus(dir.path, 47);

  TrainRegime regime;
  regime.kind = RegimeKind::frozen;
  regime.epochs = 8;
  regime.stack_width = 4;
  regime.seed = 6;

  auto res = train_probe(nullptr, FeatureKind::mfcc, manifest, regime);
  REQUIRE(res.epoch_losses.size() == 8);
  CHECK(res.epoch_losses.back() < res.epoch_losses.front());
  CHECK(res.probe.d_in() == 4 * 13);
}

TEST_CASE("finetune regime moves the backbone") {
  testutil::TempDir dir;
  const auto manifest = tone_corpus(dir.path, 53, 6);
  const auto backbone = CpcModel::init(small_backbone_config());

  TrainRegime regime;
  regime.kind = RegimeKind::finetune;
  regime.epochs = 4;
  regime.stack_width = 8;
  regime.seed = 7;

  auto res = train_probe(&backbone, FeatureKind::cpc_context, manifest, regime);
  auto before = backbone;
  CHECK_FALSE(backbone_equal(res.backbone, before));
  REQUIRE(res.epoch_losses.size() == 4);

  SECTION("transcribing with the returned pair works end to end") {
    const auto w = decode_wav(manifest.resolve(manifest.utterances[0]));
    const auto hyp = transcribe(&res.backbone, res.probe,
                                FeatureKind::cpc_context, w);
    for (const auto& s : hyp) CHECK(s != std::string(kBlankSymbol));
  }
}

TEST_CASE("regime and feature kind constraints") {
  testutil::TempDir dir;
  const auto manifest = tone_corpus(dir.path, 61, 4);
  TrainRegime regime;
  regime.kind = RegimeKind::finetune;
  regime.epochs = 1;

  SECTION("finetune needs cpc features") {
    CHECK_THROWS_AS(train_probe(nullptr, FeatureKind::mfcc, manifest, regime),
                    Error);
  }

  SECTION("cpc features need a backbone") {
    regime.kind = RegimeKind::frozen;
    CHECK_THROWS_AS(
        train_probe(nullptr, FeatureKind::cpc_context, manifest, regime),
        Error);
  }

  SECTION("lr must be positive") {
    regime.lr = 0.0;
    const auto backbone = CpcModel::init(small_backbone_config());
    CHECK_THROWS_AS(
        train_probe(&backbone, FeatureKind::cpc_context, manifest, regime),
        Error);
  }
}

TEST_CASE("infeasible utterances are skipped or rejected") {
  testutil::TempDir dir;
  std::filesystem::create_directories(dir.path / "wav");

  const auto tone = [&](std::size_t n, const std::string& name) {
    Waveform w;
    w.sample_rate_hz = 16000;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      w.samples[i] = 0.4 * std::sin(2.0 * 3.141592653589793 * 300.0 *
                                    static_cast<double>(i) / 16000.0);
    encode_wav(w, dir.path / "wav" / name);
  };
  tone(16000, "long.wav");  // 1 s
  tone(4000, "short.wav");  // 0.25 s: 22 mfcc frames, 2 stacked

  Manifest m;
  m.root_dir = dir.path;
  m.inventory = {"p0", "p1"};
  m.utterances = {
      {"a", "wav/long.wav", {"p0", "p1", "p0"}},
      {"b", "wav/short.wav", {"p0", "p0", "p1", "p1", "p0", "p0"}},
  };

  TrainRegime regime;
  regime.kind = RegimeKind::frozen;
  regime.epochs = 2;
  regime.stack_width = 8;

  SECTION("the short transcript-heavy utterance is skipped and counted") {
    auto res = train_probe(nullptr, FeatureKind::mfcc, m, regime);
    CHECK(res.skipped_infeasible == 1);
    CHECK(res.epoch_losses.size() == 2);
  }

  SECTION("nothing trainable raises AllUtterancesInfeasible") {
    m.utterances.erase(m.utterances.begin());
    try {
      train_probe(nullptr, FeatureKind::mfcc, m, regime);
      FAIL("expected AllUtterancesInfeasible");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::AllUtterancesInfeasible);
    }
  }
}
