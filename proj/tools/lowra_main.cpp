#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lowra/commands.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string regime;
  std::string features;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "key = value config file");
    cmd.add_option("--out", out_dir, "output directory override");
    cmd.add_option("--seed", seed, "override every seed in the config")
        ->each([this](const std::string&) { seed_given = true; });
    cmd.add_option("--regime", regime, "probe regime override")
        ->check(CLI::IsMember({"frozen", "finetune"}));
    cmd.add_option("--features", features, "probe feature kind override")
        ->check(CLI::IsMember({"mfcc", "cpc", "cpc_context"}));
  }

  lowra::RunConfig resolve() const {
    lowra::RunConfig cfg;
    if (!config_path.empty()) cfg = lowra::load_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_given) {
      cfg.split_seed = seed;
      cfg.synth.seed = seed;
      cfg.cpc.seed = seed;
      cfg.regime.seed = seed;
    }
    if (!regime.empty()) lowra::set_config_key(cfg, "regime.kind", regime);
    if (!features.empty()) lowra::set_config_key(cfg, "features", features);
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-supervised speech pipeline: synthetic corpora, CPC "
               "pretraining, CTC phoneme probes, PER reports"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string init_ckpt;
  std::string probe_ckpt;
  std::string wav_path;
  std::vector<std::string> csv_paths;
  std::string layout = "table1";
  bool inject_fault = false;

  auto* synth = app.add_subcommand("synth", "generate a tone corpus + splits");
  flags.attach(*synth);

  auto* pretrain =
      app.add_subcommand("pretrain", "CPC-pretrain a backbone on train split");
  flags.attach(*pretrain);
  pretrain->add_option("--init", init_ckpt,
                       "backbone checkpoint to continue from");

  auto* probe = app.add_subcommand(
      "probe", "train a linear CTC probe, evaluate on the test split");
  flags.attach(*probe);
  probe->add_option("--init", init_ckpt, "backbone checkpoint (cpc features)");

  auto* transcribe =
      app.add_subcommand("transcribe", "decode one wav with a saved probe");
  flags.attach(*transcribe);
  transcribe->add_option("--probe", probe_ckpt, "probe checkpoint")->required();
  transcribe->add_option("--init", init_ckpt, "backbone checkpoint");
  transcribe->add_option("wav", wav_path, "input wav file")->required();

  auto* eval_cmd =
      app.add_subcommand("eval", "re-score a saved probe on the test split");
  flags.attach(*eval_cmd);
  eval_cmd->add_option("--probe", probe_ckpt, "probe checkpoint")->required();
  eval_cmd->add_option("--init", init_ckpt, "backbone checkpoint");

  auto* report =
      app.add_subcommand("report", "render eval CSVs as a markdown table");
  report->add_option("csv", csv_paths, "eval CSV files")->required();
  report->add_option("--layout", layout, "table layout")
      ->check(CLI::IsMember({"table1", "table2"}));

  auto* gradcheck = app.add_subcommand(
      "gradcheck", "finite-difference checks of the autodiff tape");
  gradcheck->add_flag("--inject-fault", inject_fault,
                      "corrupt one analytic gradient (self-test)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const auto cfg = flags.resolve();
      const auto out = lowra::cmd_synth(cfg);
      std::cout << "corpus " << cfg.corpus_dir << ": "
                << out.full.utterances.size() << " utterances ("
                << out.train.utterances.size() << " train, "
                << out.dev.utterances.size() << " dev, "
                << out.test.utterances.size() << " test)\n";
    } else if (pretrain->parsed()) {
      const auto cfg = flags.resolve();
      const auto out = lowra::cmd_pretrain(cfg, init_ckpt);
      std::cout << "wrote " << out.checkpoint.string() << " and "
                << out.loss_csv.string() << "\n";
      if (!out.result.curve.empty())
        std::cout << "epoch 1 total " << out.result.curve.front().total
                  << ", epoch " << out.result.curve.size() << " total "
                  << out.result.curve.back().total << "\n";
    } else if (probe->parsed()) {
      const auto cfg = flags.resolve();
      const auto out = lowra::cmd_probe(cfg, init_ckpt);
      std::cout << "wrote " << out.probe_ckpt.string() << "\n";
      if (!out.finetuned_backbone.empty())
        std::cout << "wrote " << out.finetuned_backbone.string() << "\n";
      std::printf("test PER %.4f (%zu edits / %zu phones)\n", out.eval.per,
                  out.eval.n_edits, out.eval.n_ref_phones);
    } else if (transcribe->parsed()) {
      const auto cfg = flags.resolve();
      const auto symbols =
          lowra::cmd_transcribe(probe_ckpt, init_ckpt, wav_path, cfg.mfcc);
      for (std::size_t i = 0; i < symbols.size(); ++i)
        std::cout << (i ? " " : "") << symbols[i];
      std::cout << "\n";
    } else if (eval_cmd->parsed()) {
      const auto cfg = flags.resolve();
      const auto r = lowra::cmd_eval(cfg, probe_ckpt, init_ckpt);
      std::printf("test PER %.4f (%zu edits / %zu phones)\n", r.per, r.n_edits,
                  r.n_ref_phones);
    } else if (report->parsed()) {
      std::vector<std::filesystem::path> paths(csv_paths.begin(),
                                               csv_paths.end());
      const auto md = lowra::cmd_report(
          paths, layout == "table2" ? lowra::ReportLayout::table2
                                    : lowra::ReportLayout::table1);
      std::cout << md;
    } else if (gradcheck->parsed()) {
      const auto suites = lowra::cmd_gradcheck(inject_fault);
      bool all_pass = true;
      for (const auto& s : suites) {
        std::printf("%-10s max rel err %.3e over %zu coords: %s\n",
                    s.name.c_str(), s.result.max_rel_err, s.result.n_checked,
                    s.result.pass ? "PASS" : "FAIL");
        all_pass = all_pass && s.result.pass;
      }
      if (!all_pass) return 1;
    }
  } catch (const lowra::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lowra::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
