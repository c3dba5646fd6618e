#include <cstdio>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>

#include "lowra/checkpoint.hpp"
#include "lowra/eval.hpp"
#include "lowra/manifest.hpp"
#include "testutil.hpp"

// End-to-end runs of the installed binary; LOWRA_BIN is injected by the
// build so the tests drive exactly what a user would.

using namespace lowra;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;  // stdout + stderr interleaved
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd = std::string(LOWRA_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  CmdResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = std::move(out);
  return r;
}

// Small but real pretrain/probe setup: enough signal for the pipeline
// to run end to end in well under a second per command.
std::string base_config(const std::filesystem::path& dir) {
  return "experiment = cli-smoke\n"
         "corpus_dir = " + (dir / "corpus").string() + "\n"
         "out_dir = " + (dir / "run").string() + "\n"
         "train_frac = 0.5\n"
         "dev_frac = 0.2\n"
         "synth.n_phones = 3\n"
         "synth.n_utterances = 12\n"
         "synth.phones_per_utt = 5,7\n"
         "synth.phone_dur_ms = 110,150\n"
         "synth.noise_std = 0.02\n"
         "synth.n_speakers = 2\n"
         "synth.seed = 7\n"
         "cpc.enc_channels = 8,8\n"
         "cpc.enc_kernels = 10,8\n"
         "cpc.enc_strides = 5,4\n"
         "cpc.latent_dim = 8\n"
         "cpc.context_dim = 12\n"
         "cpc.num_steps = 3\n"
         "cpc.n_negatives = 4\n"
         "cpc.epochs = 2\n"
         "cpc.batch_utts = 3\n"
         "cpc.window_samples = 4000\n"
         "cpc.lr = 0.002\n"
         "cpc.seed = 7\n"
         "regime.epochs = 4\n"
         "regime.stack_width = 6\n"
         "regime.seed = 7\n"
         "features = cpc\n";
}

std::filesystem::path write_config(const testutil::TempDir& dir) {
  const auto path = dir / "run.cfg";
  testutil::write_text(path, base_config(dir.path));
  return path;
}

}  // namespace

TEST_CASE("cli synth writes consistent splits and is rerun stable") {
  testutil::TempDir dir;
  const auto cfg = write_config(dir);

  const auto r = run_cli("synth --config " + cfg.string());
  INFO(r.out);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("12 utterances") != std::string::npos);

  const auto train = load_manifest(dir / "corpus/train.tsv");
  const auto dev = load_manifest(dir / "corpus/dev.tsv");
  const auto test = load_manifest(dir / "corpus/test.tsv");
  CHECK(train.utterances.size() == 6);
  CHECK(dev.utterances.size() == 2);
  CHECK(test.utterances.size() == 4);

  const auto tsv_before = testutil::read_bytes(dir / "corpus/train.tsv");
  const auto wav_before = testutil::read_bytes(dir / "corpus/wav/u00003.wav");
  REQUIRE(run_cli("synth --config " + cfg.string()).code == 0);
  CHECK(testutil::read_bytes(dir / "corpus/train.tsv") == tsv_before);
  CHECK(testutil::read_bytes(dir / "corpus/wav/u00003.wav") == wav_before);
}

TEST_CASE("cli synth reports unusable output directories") {
  testutil::TempDir dir;
  testutil::write_text(dir / "blocker", "a file, not a directory");
  auto text = base_config(dir.path);
  const auto key = "corpus_dir = ";
  const auto at = text.find(key);
  const auto eol = text.find('\n', at);
  text.replace(at, eol - at,
               key + (dir.path / "blocker" / "corpus").string());
  const auto cfg = dir / "bad.cfg";
  testutil::write_text(cfg, text);

  const auto r = run_cli("synth --config " + cfg.string());
  INFO(r.out);
  CHECK(r.code == 2);
  CHECK(r.out.find("error:") != std::string::npos);
  CHECK(r.out.find("blocker") != std::string::npos);
}

TEST_CASE("cli pretrain, probe, transcribe, eval, report chain") {
  testutil::TempDir dir;
  const auto cfg = write_config(dir);
  REQUIRE(run_cli("synth --config " + cfg.string()).code == 0);

  // pretrain: loadable checkpoint, loss CSV with header + one row per epoch
  auto r = run_cli("pretrain --config " + cfg.string());
  INFO(r.out);
  REQUIRE(r.code == 0);
  const auto ckpt = dir / "run/cpc.ckpt";
  const auto model = load_cpc_checkpoint(ckpt);
  CHECK(model.config.epochs == 2);
  {
    const auto csv = testutil::read_bytes(dir / "run/pretrain_loss.csv");
    std::size_t lines = 0;
    for (auto c : csv) lines += c == '\n';
    CHECK(lines == 1 + model.config.epochs);
  }

  // byte-identical rerun
  const auto ckpt_bytes = testutil::read_bytes(ckpt);
  const auto csv_bytes = testutil::read_bytes(dir / "run/pretrain_loss.csv");
  REQUIRE(run_cli("pretrain --config " + cfg.string()).code == 0);
  CHECK(testutil::read_bytes(ckpt) == ckpt_bytes);
  CHECK(testutil::read_bytes(dir / "run/pretrain_loss.csv") == csv_bytes);

  // resuming from the checkpoint keeps going rather than restarting
  r = run_cli("pretrain --config " + cfg.string() + " --init " + ckpt.string()
              + " --out " + (dir / "resumed").string());
  INFO(r.out);
  REQUIRE(r.code == 0);
  CHECK(testutil::read_bytes(dir / "resumed/cpc.ckpt") != ckpt_bytes);

  // probe with cpc features needs the backbone
  r = run_cli("probe --config " + cfg.string());
  INFO(r.out);
  CHECK(r.code == 1);
  CHECK(r.out.find("--init") != std::string::npos);

  // frozen probe: backbone file untouched, eval row appended
  const auto backbone_hash = file_hash(ckpt);
  r = run_cli("probe --config " + cfg.string() + " --init " + ckpt.string());
  INFO(r.out);
  REQUIRE(r.code == 0);
  CHECK(file_hash(ckpt) == backbone_hash);
  CHECK(std::filesystem::exists(dir / "run/probe.ckpt"));
  CHECK(!std::filesystem::exists(dir / "run/cpc_finetuned.ckpt"));
  {
    const auto rows = read_eval_csv(dir / "run/eval.csv");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].model_name == "cli-smoke");
    CHECK(rows[0].frozen);
    CHECK(rows[0].train_budget_desc == "6 utts");
    CHECK(rows[0].n_ref_phones > 0);
  }

  // finetune probe: new backbone written alongside, original untouched
  r = run_cli("probe --config " + cfg.string() + " --regime finetune --init " +
              ckpt.string() + " --out " + (dir / "ft").string());
  INFO(r.out);
  REQUIRE(r.code == 0);
  CHECK(file_hash(ckpt) == backbone_hash);
  REQUIRE(std::filesystem::exists(dir / "ft/cpc_finetuned.ckpt"));
  CHECK(file_hash(dir / "ft/cpc_finetuned.ckpt") != backbone_hash);

  // mfcc probe: no backbone needed
  r = run_cli("probe --config " + cfg.string() + " --features mfcc --out " +
              (dir / "mfcc").string());
  INFO(r.out);
  REQUIRE(r.code == 0);
  {
    const auto rows = read_eval_csv(dir / "mfcc/eval.csv");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].pretrain_desc == "No");
  }

  // transcribe: prints one line of space-separated known symbols
  r = run_cli("transcribe --probe " + (dir / "run/probe.ckpt").string() +
              " --init " + ckpt.string() + " " +
              (dir / "corpus/wav/u00000.wav").string());
  INFO(r.out);
  REQUIRE(r.code == 0);
  REQUIRE(!r.out.empty());
  CHECK(r.out.back() == '\n');
  {
    std::istringstream line(r.out.substr(0, r.out.size() - 1));
    std::string sym;
    while (line >> sym)
      CHECK((sym == "p0" || sym == "p1" || sym == "p2"));
  }

  // eval: appends a second row to the same csv
  r = run_cli("eval --config " + cfg.string() + " --probe " +
              (dir / "run/probe.ckpt").string() + " --init " + ckpt.string());
  INFO(r.out);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("test PER") != std::string::npos);
  CHECK(read_eval_csv(dir / "run/eval.csv").size() == 2);

  // report: merged grid over two CSVs
  r = run_cli("report " + (dir / "run/eval.csv").string() + " " +
              (dir / "mfcc/eval.csv").string());
  INFO(r.out);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("| Model | Pre-train | Frozen |") != std::string::npos);
  CHECK(r.out.find("cli-smoke") != std::string::npos);

  // malformed CSV: parse error names the offending row
  testutil::write_text(dir / "broken.csv",
                       std::string(kEvalCsvHeader) + "\n" +
                           "m,p,maybe,1 utts,c,0.5,10,5\n");
  r = run_cli("report " + (dir / "broken.csv").string());
  INFO(r.out);
  CHECK(r.code == 1);
  CHECK(r.out.find(":2:") != std::string::npos);
}

TEST_CASE("cli gradcheck passes clean and fails when poisoned") {
  auto r = run_cli("gradcheck");
  INFO(r.out);
  CHECK(r.code == 0);
  CHECK(r.out.find("primitives") != std::string::npos);
  CHECK(r.out.find("cpc_loss") != std::string::npos);
  CHECK(r.out.find("ctc_loss") != std::string::npos);
  CHECK(r.out.find("max rel err") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);

  r = run_cli("gradcheck --inject-fault");
  INFO(r.out);
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("cli rejects malformed configs with every problem listed") {
  testutil::TempDir dir;
  testutil::write_text(dir / "bad.cfg",
                       "no_such_key = 1\ncpc.latent_dim = twelve\n");
  const auto r = run_cli("synth --config " + (dir / "bad.cfg").string());
  INFO(r.out);
  CHECK(r.code == 1);
  CHECK(r.out.find("no_such_key") != std::string::npos);
  CHECK(r.out.find("twelve") != std::string::npos);
}
