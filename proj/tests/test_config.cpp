#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "lowra/config.hpp"
#include "testutil.hpp"

using namespace lowra;

TEST_CASE("defaults dump covers every key and round trips") {
  const RunConfig cfg;
  const auto text = dump_config(cfg);

  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == config_keys().size());

  const auto back = parse_config_text(text);
  CHECK(dump_config(back) == text);
}

TEST_CASE("parsing applies values and tolerates comments") {
  const std::string text =
      "# an experiment\n"
      "\n"
      "experiment = tiny-run\n"
      "  cpc.latent_dim =24 \n"
      "cpc.enc_channels = 16, 16,16\n"
      "synth.phones_per_utt = 5,9\n"
      "features = cpc\n"
      "regime.kind = finetune\n"
      "cpc.lr = 0.0005\n";
  const auto cfg = parse_config_text(text);
  CHECK(cfg.experiment == "tiny-run");
  CHECK(cfg.cpc.latent_dim == 24);
  CHECK(cfg.cpc.enc_channels == std::vector<std::size_t>{16, 16, 16});
  CHECK(cfg.synth.phones_per_utt == std::pair<std::size_t, std::size_t>{5, 9});
  CHECK(cfg.features == FeatureKind::cpc_context);
  CHECK(cfg.regime.kind == RegimeKind::finetune);
  CHECK(cfg.cpc.lr == 0.0005);
  // untouched keys keep their defaults
  CHECK(cfg.cpc.context_dim == RunConfig{}.cpc.context_dim);
}

TEST_CASE("all parse problems reported at once with line numbers") {
  const std::string text =
      "experiment = ok\n"
      "no_such_key = 1\n"
      "cpc.latent_dim = twelve\n"
      "orphan line\n"
      "regime.kind = melted\n";
  try {
    parse_config_text(text);
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    const std::string what = e.what();
    CHECK(what.find("line 2") != std::string::npos);
    CHECK(what.find("unknown key 'no_such_key'") != std::string::npos);
    CHECK(what.find("line 3") != std::string::npos);
    CHECK(what.find("twelve") != std::string::npos);
    CHECK(what.find("line 4") != std::string::npos);
    CHECK(what.find("missing '='") != std::string::npos);
    CHECK(what.find("line 5") != std::string::npos);
    CHECK(what.find("melted") != std::string::npos);
  }
}

TEST_CASE("doubles survive the echo file bit exactly") {
  RunConfig cfg;
  cfg.cpc.lr = 1.0 / 3.0;
  cfg.synth.noise_std = 0.02;
  cfg.mfcc.log_floor = 1e-300;
  cfg.train_frac = 0.1;
  const auto back = parse_config_text(dump_config(cfg));
  CHECK(back.cpc.lr == cfg.cpc.lr);
  CHECK(back.synth.noise_std == cfg.synth.noise_std);
  CHECK(back.mfcc.log_floor == cfg.mfcc.log_floor);
  CHECK(back.train_frac == cfg.train_frac);
}

TEST_CASE("randomized key assignments round trip through the echo") {
  Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    RunConfig cfg;
    cfg.experiment = "t" + std::to_string(trial);
    cfg.cpc.latent_dim = rng.uniform_int(1, 64);
    cfg.cpc.seed = rng.uniform_int(0, 1 << 30);
    cfg.regime.epochs = rng.uniform_int(0, 500);
    cfg.regime.lr = rng.uniform(1e-6, 1.0);
    cfg.synth.n_utterances = rng.uniform_int(1, 1000);
    cfg.features = trial % 2 ? FeatureKind::mfcc : FeatureKind::cpc_context;
    const auto text = dump_config(cfg);
    REQUIRE(dump_config(parse_config_text(text)) == text);
  }
}

TEST_CASE("file loading and overrides") {
  testutil::TempDir dir;
  const auto path = dir / "run.cfg";
  testutil::write_text(path, "cpc.epochs = 3\nout_dir = runs/a\n");

  auto cfg = load_config_file(path);
  CHECK(cfg.cpc.epochs == 3);
  CHECK(cfg.out_dir == "runs/a");

  // flag-style override lands on top of the file value
  set_config_key(cfg, "cpc.epochs", "7");
  CHECK(cfg.cpc.epochs == 7);
  CHECK_THROWS_AS(set_config_key(cfg, "bogus", "1"), Error);

  CHECK_THROWS_AS(load_config_file(dir / "absent.cfg"), Error);

  const auto echo = dir / "resolved.cfg";
  write_resolved_config(cfg, echo);
  const auto back = load_config_file(echo);
  CHECK(dump_config(back) == dump_config(cfg));
}

TEST_CASE("validate aggregates violations across sub-configs") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  cfg.cpc.lr = 0.0;
  cfg.regime.stack_width = 0;
  cfg.synth.n_phones = 1;
  cfg.train_frac = 0.9;
  cfg.dev_frac = 0.3;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    const std::string what = e.what();
    CHECK(what.find("lr") != std::string::npos);
    CHECK(what.find("stack_width") != std::string::npos);
    CHECK(what.find("n_phones") != std::string::npos);
    CHECK(what.find("train_frac/dev_frac") != std::string::npos);
  }
}

TEST_CASE("manifest paths hang off the corpus directory") {
  RunConfig cfg;
  cfg.corpus_dir = "data/c1";
  CHECK(cfg.train_manifest() == std::filesystem::path("data/c1/train.tsv"));
  CHECK(cfg.dev_manifest() == std::filesystem::path("data/c1/dev.tsv"));
  CHECK(cfg.test_manifest() == std::filesystem::path("data/c1/test.tsv"));
}
