#ifndef LOWRA_CONFIG_HPP
#define LOWRA_CONFIG_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lowra/cpc.hpp"
#include "lowra/error.hpp"
#include "lowra/manifest.hpp"
#include "lowra/mfcc.hpp"
#include "lowra/probe.hpp"
#include "lowra/synth.hpp"

namespace lowra {

// Everything a pipeline stage can be told, in one flat bag.  Parsed
// from `key = value` text files; command-line flags overwrite single
// keys afterwards.  The resolved result is echoed into the run
// directory so a finished run carries its own provenance.
struct RunConfig {
  std::string experiment = "exp";
  std::string out_dir = "out";
  std::string corpus_dir = "corpus";
  double train_frac = 0.6;
  double dev_frac = 0.2;
  std::uint64_t split_seed = 0;
  FeatureKind features = FeatureKind::cpc_context;

  SynthSpec synth;
  CpcConfig cpc;
  MfccConfig mfcc;
  TrainRegime regime;

  std::filesystem::path train_manifest() const {
    return std::filesystem::path(corpus_dir) / "train.tsv";
  }
  std::filesystem::path dev_manifest() const {
    return std::filesystem::path(corpus_dir) / "dev.tsv";
  }
  std::filesystem::path test_manifest() const {
    return std::filesystem::path(corpus_dir) / "test.tsv";
  }

  // Range checks across every sub-config, aggregated so a bad file is
  // reported in one shot rather than one complaint per rerun.
  void validate() const {
    std::string err;
    auto collect = [&err](const std::function<void()>& check) {
      try {
        check();
      } catch (const Error& e) {
        err += e.what();
        err += "; ";
      }
    };
    if (experiment.empty()) err += "experiment must be non-empty; ";
    if (out_dir.empty()) err += "out_dir must be non-empty; ";
    if (corpus_dir.empty()) err += "corpus_dir must be non-empty; ";
    if (!(train_frac > 0 && dev_frac > 0 && train_frac + dev_frac < 1.0))
      err += "train_frac/dev_frac must be positive and sum below 1; ";
    collect([this] { synth.validate(); });
    collect([this] { cpc.validate(); });
    collect([this] { mfcc.validate(synth.sample_rate_hz); });
    collect([this] { regime.validate(); });
    if (!err.empty()) fail(ErrorCode::ConfigError, "run config: " + err);
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::uint64_t parse_u64_val(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    fail(ErrorCode::ConfigError, key + ": '" + v + "' is not a non-negative integer");
  }
}

inline double parse_f64_val(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(ErrorCode::ConfigError, key + ": '" + v + "' is not a number");
  }
}

inline std::string format_f64(double d) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

inline std::vector<std::size_t> parse_size_list(const std::string& v,
                                                const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& part : split_on(v, ','))
    out.push_back(static_cast<std::size_t>(parse_u64_val(trim(part), key)));
  return out;
}

inline std::string format_size_list(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i)
    s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

}  // namespace detail

// One row per recognized key: spelled name, reader (for the echo file)
// and writer (for parsing / flag overrides).  Single table so the two
// directions cannot drift apart.
struct ConfigKey {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> table = [] {
    std::vector<ConfigKey> keys;
    using Ref = RunConfig&;

    auto add_str = [&keys](const char* name, auto ref) {
      keys.push_back(
          {name,
           [ref](const RunConfig& c) { return ref(const_cast<Ref>(c)); },
           [ref](RunConfig& c, const std::string& v) { ref(c) = v; }});
    };
    auto add_size = [&keys](const char* name, auto ref) {
      keys.push_back(
          {name,
           [ref](const RunConfig& c) {
             return std::to_string(ref(const_cast<Ref>(c)));
           },
           [ref, name](RunConfig& c, const std::string& v) {
             ref(c) = static_cast<std::size_t>(detail::parse_u64_val(v, name));
           }});
    };
    auto add_u64 = [&keys](const char* name, auto ref) {
      keys.push_back(
          {name,
           [ref](const RunConfig& c) {
             return std::to_string(ref(const_cast<Ref>(c)));
           },
           [ref, name](RunConfig& c, const std::string& v) {
             ref(c) = detail::parse_u64_val(v, name);
           }});
    };
    auto add_u32 = [&keys](const char* name, auto ref) {
      keys.push_back(
          {name,
           [ref](const RunConfig& c) {
             return std::to_string(ref(const_cast<Ref>(c)));
           },
           [ref, name](RunConfig& c, const std::string& v) {
             ref(c) = static_cast<std::uint32_t>(detail::parse_u64_val(v, name));
           }});
    };
    auto add_f64 = [&keys](const char* name, auto ref) {
      keys.push_back(
          {name,
           [ref](const RunConfig& c) {
             return detail::format_f64(ref(const_cast<Ref>(c)));
           },
           [ref, name](RunConfig& c, const std::string& v) {
             ref(c) = detail::parse_f64_val(v, name);
           }});
    };
    auto add_size_list = [&keys](const char* name, auto ref) {
      keys.push_back(
          {name,
           [ref](const RunConfig& c) {
             return detail::format_size_list(ref(const_cast<Ref>(c)));
           },
           [ref, name](RunConfig& c, const std::string& v) {
             ref(c) = detail::parse_size_list(v, name);
           }});
    };
    auto add_size_pair = [&keys](const char* name, auto ref) {
      keys.push_back(
          {name,
           [ref](const RunConfig& c) {
             const auto& p = ref(const_cast<Ref>(c));
             return std::to_string(p.first) + "," + std::to_string(p.second);
           },
           [ref, name](RunConfig& c, const std::string& v) {
             const auto xs = detail::parse_size_list(v, name);
             if (xs.size() != 2)
               fail(ErrorCode::ConfigError,
                    std::string(name) + ": expected 'lo,hi', got '" + v + "'");
             ref(c) = {xs[0], xs[1]};
           }});
    };

    add_str("experiment", [](Ref c) -> std::string& { return c.experiment; });
    add_str("out_dir", [](Ref c) -> std::string& { return c.out_dir; });
    add_str("corpus_dir", [](Ref c) -> std::string& { return c.corpus_dir; });
    add_f64("train_frac", [](Ref c) -> double& { return c.train_frac; });
    add_f64("dev_frac", [](Ref c) -> double& { return c.dev_frac; });
    add_u64("split_seed", [](Ref c) -> std::uint64_t& { return c.split_seed; });
    keys.push_back(
        {"features",
         [](const RunConfig& c) {
           return c.features == FeatureKind::mfcc ? "mfcc" : "cpc_context";
         },
         [](RunConfig& c, const std::string& v) {
           if (v == "mfcc")
             c.features = FeatureKind::mfcc;
           else if (v == "cpc_context" || v == "cpc")
             c.features = FeatureKind::cpc_context;
           else
             fail(ErrorCode::ConfigError,
                  "features: expected mfcc or cpc_context, got '" + v + "'");
         }});

    add_size("synth.n_phones", [](Ref c) -> std::size_t& { return c.synth.n_phones; });
    add_size("synth.n_utterances",
             [](Ref c) -> std::size_t& { return c.synth.n_utterances; });
    add_size_pair("synth.phones_per_utt",
                  [](Ref c) -> auto& { return c.synth.phones_per_utt; });
    add_size_pair("synth.phone_dur_ms",
                  [](Ref c) -> auto& { return c.synth.phone_dur_ms; });
    add_u32("synth.sample_rate_hz",
            [](Ref c) -> std::uint32_t& { return c.synth.sample_rate_hz; });
    add_f64("synth.noise_std", [](Ref c) -> double& { return c.synth.noise_std; });
    add_size("synth.n_speakers",
             [](Ref c) -> std::size_t& { return c.synth.n_speakers; });
    add_u64("synth.seed", [](Ref c) -> std::uint64_t& { return c.synth.seed; });

    add_size_list("cpc.enc_channels",
                  [](Ref c) -> auto& { return c.cpc.enc_channels; });
    add_size_list("cpc.enc_kernels",
                  [](Ref c) -> auto& { return c.cpc.enc_kernels; });
    add_size_list("cpc.enc_strides",
                  [](Ref c) -> auto& { return c.cpc.enc_strides; });
    add_size("cpc.latent_dim", [](Ref c) -> std::size_t& { return c.cpc.latent_dim; });
    add_size("cpc.context_dim",
             [](Ref c) -> std::size_t& { return c.cpc.context_dim; });
    add_size("cpc.num_steps", [](Ref c) -> std::size_t& { return c.cpc.num_steps; });
    add_size("cpc.n_negatives",
             [](Ref c) -> std::size_t& { return c.cpc.n_negatives; });
    add_size("cpc.epochs", [](Ref c) -> std::size_t& { return c.cpc.epochs; });
    add_size("cpc.batch_utts", [](Ref c) -> std::size_t& { return c.cpc.batch_utts; });
    add_size("cpc.window_samples",
             [](Ref c) -> std::size_t& { return c.cpc.window_samples; });
    add_f64("cpc.lr", [](Ref c) -> double& { return c.cpc.lr; });
    add_u64("cpc.seed", [](Ref c) -> std::uint64_t& { return c.cpc.seed; });

    add_f64("mfcc.frame_ms", [](Ref c) -> double& { return c.mfcc.frame_ms; });
    add_f64("mfcc.hop_ms", [](Ref c) -> double& { return c.mfcc.hop_ms; });
    add_size("mfcc.n_fft", [](Ref c) -> std::size_t& { return c.mfcc.n_fft; });
    add_size("mfcc.n_mels", [](Ref c) -> std::size_t& { return c.mfcc.n_mels; });
    add_size("mfcc.n_ceps", [](Ref c) -> std::size_t& { return c.mfcc.n_ceps; });
    add_f64("mfcc.fmin_hz", [](Ref c) -> double& { return c.mfcc.fmin_hz; });
    add_f64("mfcc.fmax_hz", [](Ref c) -> double& { return c.mfcc.fmax_hz; });
    add_f64("mfcc.log_floor", [](Ref c) -> double& { return c.mfcc.log_floor; });

    keys.push_back(
        {"regime.kind",
         [](const RunConfig& c) {
           return c.regime.kind == RegimeKind::frozen ? "frozen" : "finetune";
         },
         [](RunConfig& c, const std::string& v) {
           if (v == "frozen")
             c.regime.kind = RegimeKind::frozen;
           else if (v == "finetune")
             c.regime.kind = RegimeKind::finetune;
           else
             fail(ErrorCode::ConfigError,
                  "regime.kind: expected frozen or finetune, got '" + v + "'");
         }});
    add_size("regime.epochs", [](Ref c) -> std::size_t& { return c.regime.epochs; });
    add_f64("regime.lr", [](Ref c) -> double& { return c.regime.lr; });
    add_size("regime.stack_width",
             [](Ref c) -> std::size_t& { return c.regime.stack_width; });
    add_u64("regime.seed", [](Ref c) -> std::uint64_t& { return c.regime.seed; });

    return keys;
  }();
  return table;
}

inline const ConfigKey* find_config_key(const std::string& name) {
  for (const auto& k : config_keys())
    if (k.name == name) return &k;
  return nullptr;
}

// Single-key assignment, used by the file parser and by flag overrides.
inline void set_config_key(RunConfig& cfg, const std::string& key,
                           const std::string& value) {
  const auto* k = find_config_key(key);
  if (!k) fail(ErrorCode::ConfigError, "unknown key '" + key + "'");
  k->set(cfg, value);
}

// `key = value` lines; '#' starts a comment line; blank lines ignored.
// Every problem in the file is reported in one exception.
inline RunConfig parse_config_text(const std::string& text,
                                   RunConfig base = RunConfig{}) {
  std::istringstream in(text);
  std::string line;
  std::string errors;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    auto where = [&line_no] { return "line " + std::to_string(line_no) + ": "; };
    if (eq == std::string::npos) {
      errors += where() + "missing '='; ";
      continue;
    }
    const auto key = detail::trim(stripped.substr(0, eq));
    const auto value = detail::trim(stripped.substr(eq + 1));
    if (key.empty()) {
      errors += where() + "empty key; ";
      continue;
    }
    try {
      set_config_key(base, key, value);
    } catch (const Error& e) {
      errors += where() + e.what() + "; ";
    }
  }
  if (!errors.empty()) fail(ErrorCode::ConfigError, "config: " + errors);
  return base;
}

inline RunConfig load_config_file(const std::filesystem::path& path,
                                  RunConfig base = RunConfig{}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::IoError, "read failed: " + path.string());
  return parse_config_text(buf.str(), std::move(base));
}

inline std::string dump_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

// Echo of the fully resolved configuration, parseable back into an
// identical RunConfig.
inline void write_resolved_config(const RunConfig& cfg,
                                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << dump_config(cfg);
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace lowra

#endif  // LOWRA_CONFIG_HPP
