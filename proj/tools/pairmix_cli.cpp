// Copyright 2026 The PairMix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pairmix: command-line front end for dataset augmentation, mel extraction,
// TTA simulation and strategy checks.
//
// Exit codes: 0 ok, 1 validation or data failure, 2 usage error.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "pairmix/augment.hpp"
#include "pairmix/fileio.hpp"
#include "pairmix/pairmix.hpp"
#include "pairmix/pipeline.hpp"
#include "pairmix/signal.hpp"
#include "pairmix/toy_model.hpp"
#include "pairmix/tta.hpp"

namespace fs = std::filesystem;
using namespace pairmix;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("pairmix");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("PAIRMIX_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour real ones
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("ignoring unknown PAIRMIX_LOG level '{}'", env);
    }
  }
}

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
};

PipelineConfig load_common(const CommonOptions& o) {
  PipelineConfig cfg = o.config.empty() ? parse_config("{}") : load_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
  }
  return cfg;
}

std::string read_text(const fs::path& p) {
  const auto bytes = read_file_bytes(p);
  return std::string(bytes.begin(), bytes.end());
}

// ---- augment ----

struct AugmentOptions {
  CommonOptions common;
  std::string manifest;
  std::string audio_root;
  std::string out;
  std::string variant;
  std::optional<double> k_ratio;
};

int run_augment_cmd(const AugmentOptions& o) {
  PipelineConfig cfg = load_common(o.common);
  if (!o.variant.empty()) {
    const auto v = parse_variant(o.variant);
    if (!v) {
      throw UsageError("unknown variant '" + o.variant +
                       "' (pairmix, concat_audio, waveform_only, spectrogram_only)");
    }
    cfg.pairmix.variant = *v;
  }
  if (o.k_ratio) {
    cfg.pairmix.k_ratio = *o.k_ratio;
  }
  validate(cfg);

  const auto manifest = load_manifest(o.manifest);
  const fs::path root = o.audio_root.empty() ? fs::path(o.manifest).parent_path() : fs::path(o.audio_root);
  const Lexicon lexicon = cfg.lexicon_path.empty() ? Lexicon{} : load_lexicon(cfg.lexicon_path);
  if (cfg.text_augment && lexicon.empty()) {
    spdlog::warn("text augmentation enabled without a lexicon; synonym ops will be no-ops");
  }

  spdlog::info("augmenting {} manifest entries (variant {}, K={}, seed {})", manifest.size(),
               to_string(cfg.pairmix.variant), cfg.pairmix.k_ratio, cfg.seed);
  const AugmentSummary s = run_augment(manifest, root, cfg, lexicon, o.out);
  for (const auto& w : s.warnings) {
    spdlog::warn("{}", w);
  }
  std::cout << "batches: " << s.batches << "\n"
            << "originals: " << s.originals << "\n"
            << "generated: " << s.generated << "\n"
            << "skipped: " << s.skipped_missing << "\n"
            << "output: " << (fs::path(o.out) / "samples.jsonl").string() << "\n";
  return kOk;
}

// ---- mel ----

struct MelOptions {
  CommonOptions common;
  std::string input;
  std::string out;
  std::optional<double> seconds;
};

int run_mel_cmd(const MelOptions& o) {
  const PipelineConfig cfg = load_common(o.common);
  Waveform w = resample(load_wav(o.input), cfg.mel.sample_rate);
  if (o.seconds) {
    if (!(*o.seconds > 0.0)) {
      throw UsageError("--seconds must be positive");
    }
    w = fix_length(w, *o.seconds);
  }
  const MelSpectrogram mel = mel_transform(w, cfg.mel);
  write_mel(o.out, mel);
  std::cout << o.out << ": " << mel.n_frames << " frames x " << mel.n_mels << " mels\n";
  return kOk;
}

// ---- strategies ----

struct ParsedStrategy {
  std::string label;
  std::optional<Strategy> strategy;
  std::optional<StrategyViolation> violation;
};

/// Strategy items: "conventional", "AxB" (groups A at the encoder, B at the
/// head), "T:AxB" (same with an explicit tau), or a path to a strategy JSON file.
std::vector<ParsedStrategy> expand_strategies(const std::vector<std::string>& items,
                                              const std::vector<std::size_t>& taus) {
  static const std::regex kUniform(R"(^(?:(\d+):)?(\d+)(?:x|×)(\d+)$)");
  std::vector<ParsedStrategy> out;
  for (const auto& item : items) {
    std::smatch m;
    if (item == "conventional") {
      for (std::size_t tau : taus) {
        out.push_back({"conventional", conventional_tta(tau, 2), std::nullopt});
      }
    } else if (item == "standard") {
      for (auto& n : standard_strategies(taus)) {
        out.push_back({n.label, std::move(n.strategy), std::nullopt});
      }
    } else if (std::regex_match(item, m, kUniform)) {
      const std::size_t a = std::stoull(m[2]);
      const std::size_t b = std::stoull(m[3]);
      UniformStrategySpec spec{m[1].matched ? std::stoull(m[1]) : a * b, 2, {{1, a}, {2, b}}};
      ParsedStrategy p{uniform_label(a, b), std::nullopt, validate_uniform(spec)};
      if (!p.violation) {
        p.strategy = build_uniform(spec);
      }
      out.push_back(std::move(p));
    } else if (fs::is_regular_file(item)) {
      StrategyDocument doc;
      try {
        doc = parse_strategy_json(read_text(item));
      } catch (const StrategyParseError& e) {
        throw UsageError(item + ": " + e.what());
      }
      ParsedStrategy p{fs::path(item).stem().string(), std::nullopt, validate(doc)};
      if (!p.violation && doc.num_layers != 2) {
        p.violation = StrategyViolation{StrategyLaw::kLayerCount, 0,
                                        "the toy model has 2 layers, strategy has " +
                                            std::to_string(doc.num_layers)};
      }
      if (!p.violation) {
        p.strategy = to_strategy(doc);
      }
      out.push_back(std::move(p));
    } else {
      throw UsageError("unrecognised strategy '" + item + "'");
    }
  }
  return out;
}

// ---- tta-sim ----

struct TtaSimOptions {
  CommonOptions common;
  std::vector<std::size_t> taus;
  std::string strategies = "standard";
  std::optional<std::size_t> repeats;
  std::string out;
};

int run_tta_sim_cmd(const TtaSimOptions& o) {
  PipelineConfig cfg = load_common(o.common);
  if (!o.taus.empty()) {
    cfg.tta.taus = o.taus;
  }
  if (o.repeats) {
    cfg.tta.repeats = *o.repeats;
  }
  validate(cfg);
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= o.strategies.size()) {
    std::size_t end = o.strategies.find(',', start);
    if (end == std::string::npos) {
      end = o.strategies.size();
    }
    if (end > start) {
      items.push_back(o.strategies.substr(start, end - start));
    }
    start = end + 1;
  }
  if (items.empty()) {
    throw UsageError("--strategies needs at least one strategy");
  }

  const auto parsed = expand_strategies(items, cfg.tta.taus);
  bool all_ok = true;
  std::vector<NamedStrategy> runnable;
  for (const auto& p : parsed) {
    const std::size_t tau = p.strategy ? p.strategy->tau : 0;
    if (p.violation) {
      std::cout << p.label << ": violation: " << p.violation->message << "\n";
      all_ok = false;
    } else {
      std::cout << p.label << " (tau=" << tau << "): ok\n";
      runnable.push_back({p.label, *p.strategy});
    }
  }
  if (!all_ok) {
    return kFailure;
  }

  spdlog::info("running {} strategies, {} repeats, {} clips", runnable.size(), cfg.tta.repeats,
               cfg.tta.n_clips);
  const auto rows = run_tta_sim(cfg, runnable);
  const std::string csv = to_csv(rows);
  if (o.out.empty() || o.out == "-") {
    std::cout << csv;
  } else {
    write_file_atomic(o.out, csv);
    std::cout << "wrote " << rows.size() << " rows to " << o.out << "\n";
  }
  return kOk;
}

// ---- validate-strategy ----

struct ValidateOptions {
  std::string file;
  std::optional<std::size_t> layers;
};

int run_validate_cmd(const ValidateOptions& o) {
  std::string text;
  try {
    text = read_text(o.file);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
  StrategyDocument doc;
  try {
    doc = parse_strategy_json(text);
  } catch (const StrategyParseError& e) {
    throw UsageError(o.file + ": " + e.what());
  }
  if (o.layers) {
    doc.num_layers = *o.layers;
    if (doc.uniform) {
      doc.uniform->num_layers = *o.layers;
    }
  }
  if (const auto v = validate(doc)) {
    std::cout << "violation: " << v->message << "\n";
    return kFailure;
  }
  const Strategy s = to_strategy(doc);
  std::cout << "ok (tau=" << s.tau << ", layers=" << s.num_layers() << ")\n";
  return kOk;
}

// ---- stats ----

struct StatsOptions {
  std::string manifest;
  std::string audio_root;
  std::string samples;
};

int run_stats_cmd(const StatsOptions& o) {
  if (o.manifest.empty() == o.samples.empty()) {
    throw UsageError("stats needs exactly one of --manifest or --samples");
  }
  if (!o.manifest.empty()) {
    const auto entries = load_manifest(o.manifest);
    const fs::path root = o.audio_root.empty() ? fs::path(o.manifest).parent_path() : fs::path(o.audio_root);
    const ManifestStats st = manifest_stats(entries, root);
    std::cout << "entries: " << st.entries << "\n"
              << "captions: " << st.captions << "\n"
              << "missing_audio: " << st.missing_audio << "\n";
    for (const auto& [split, n] : st.per_split) {
      std::cout << "split." << split << ": " << n << "\n";
    }
    return kOk;
  }
  const OutputStats st = output_stats(o.samples);
  std::cout << "samples: " << st.samples << "\n";
  for (const auto& [kind, n] : st.per_kind) std::cout << "kind." << kind << ": " << n << "\n";
  for (const auto& [v, n] : st.per_variant) std::cout << "variant." << v << ": " << n << "\n";
  for (const auto& [f, n] : st.per_flag) std::cout << "flag." << f << ": " << n << "\n";
  std::cout << "gamma_ones: " << st.gamma_ones << "\n"
            << "mean_caption_words: " << st.mean_caption_words << "\n"
            << "bad_mels: " << st.bad_mels << "\n";
  return st.bad_mels == 0 ? kOk : kFailure;
}

// ---- synth ----

struct SynthOptions {
  std::string out;
  std::size_t count = 32;
  double seconds = 10.0;
  int sample_rate = 32000;
  std::uint64_t seed = 0;
};

int run_synth_cmd(const SynthOptions& o) {
  if (o.count == 0 || !(o.seconds > 0.0) || o.sample_rate <= 0) {
    throw UsageError("synth needs positive --count, --seconds and --sample-rate");
  }
  const fs::path manifest = write_synthetic_dataset(o.out, o.count, o.seconds, o.sample_rate, o.seed);
  std::cout << manifest.string() << "\n";
  return kOk;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Override the config seed");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"PairMix audio-text augmentation and Multi-TTA tools"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pairmix 0.1.0");

  AugmentOptions aug;
  auto* c_aug = app.add_subcommand("augment", "Augment the train split of a manifest");
  add_common(c_aug, aug.common);
  c_aug->add_option("--manifest", aug.manifest, "Input manifest (JSONL)")->required();
  c_aug->add_option("--audio-root", aug.audio_root, "Directory audio paths are relative to");
  c_aug->add_option("--out", aug.out, "Output directory")->required();
  c_aug->add_option("--variant", aug.variant, "pairmix | concat_audio | waveform_only | spectrogram_only");
  c_aug->add_option("--k-ratio", aug.k_ratio, "Generated samples per batch as a fraction of the batch")
      ->check(CLI::Range(0.0, 1.0));

  MelOptions mel;
  auto* c_mel = app.add_subcommand("mel", "Compute a log-mel spectrogram from a WAV file");
  add_common(c_mel, mel.common);
  c_mel->add_option("input", mel.input, "Input WAV")->required();
  c_mel->add_option("--out", mel.out, "Output .mel file")->required();
  c_mel->add_option("--seconds", mel.seconds, "Pad or cut to this duration first");

  TtaSimOptions sim;
  auto* c_sim = app.add_subcommand("tta-sim", "Run the toy-model TTA variance experiment");
  add_common(c_sim, sim.common);
  c_sim->add_option("--tau", sim.taus, "Tau values (repeatable)");
  c_sim->add_option("--strategies", sim.strategies,
                    "Comma list of conventional, standard, AxB, T:AxB or strategy JSON files");
  c_sim->add_option("--repeats", sim.repeats, "Override the number of repeats");
  c_sim->add_option("--out", sim.out, "Output CSV (default: stdout)");

  ValidateOptions val;
  auto* c_val = app.add_subcommand("validate-strategy", "Check a strategy JSON file");
  c_val->add_option("file", val.file, "Strategy JSON")->required();
  c_val->add_option("--layers", val.layers, "Model depth H (default: from the file)");

  StatsOptions st;
  auto* c_st = app.add_subcommand("stats", "Summarise a manifest or an augmented output");
  c_st->add_option("--manifest", st.manifest, "Manifest (JSONL)");
  c_st->add_option("--audio-root", st.audio_root, "Directory audio paths are relative to");
  c_st->add_option("--samples", st.samples, "samples.jsonl written by augment");

  SynthOptions syn;
  auto* c_syn = app.add_subcommand("synth", "Write a synthetic tone dataset and manifest");
  c_syn->add_option("--out", syn.out, "Output directory")->required();
  c_syn->add_option("--count", syn.count, "Number of clips");
  c_syn->add_option("--seconds", syn.seconds, "Clip duration");
  c_syn->add_option("--sample-rate", syn.sample_rate, "Sample rate");
  c_syn->add_option("--seed", syn.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (c_aug->parsed()) return run_augment_cmd(aug);
    if (c_mel->parsed()) return run_mel_cmd(mel);
    if (c_sim->parsed()) return run_tta_sim_cmd(sim);
    if (c_val->parsed()) return run_validate_cmd(val);
    if (c_st->parsed()) return run_stats_cmd(st);
    if (c_syn->parsed()) return run_synth_cmd(syn);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  } catch (const FormatError& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kUsage;
}
