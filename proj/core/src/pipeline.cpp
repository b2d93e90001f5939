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

#include "pairmix/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <numbers>
#include <set>
#include <unordered_set>

#include "pairmix/fileio.hpp"
#include "pairmix/rng.hpp"

namespace pairmix {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxCaptions = 5;

std::string as_text(const std::vector<std::uint8_t>& bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

fs::path resolve(const fs::path& root, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : root / p;
}

std::string mel_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "mels/%06zu.mel", index);
  return buf;
}

// Waveform-level train augmentations, in order, with fixed sub-seeds.
Waveform augment_waveform(const Waveform& w, const PipelineConfig& cfg, std::uint64_t seed,
                          std::vector<std::string>& applied, std::vector<std::string>& flags) {
  auto noisy = add_gaussian_noise(w, cfg.noise, mix_seed({seed, 0}));
  if (noisy.applied) {
    applied.emplace_back("noise");
  }
  if (noisy.skipped_silent) {
    flags.emplace_back("noise_skipped_silent");
  }
  auto reverbed = apply_reverb(noisy.value, cfg.reverb, mix_seed({seed, 1}));
  if (reverbed.applied) {
    applied.emplace_back("reverb");
  }
  return std::move(reverbed.value);
}

bool has_masks(const SpecAugmentSpec& s) {
  return (s.n_time_masks > 0 && s.max_time_width > 0) || (s.n_freq_masks > 0 && s.max_freq_width > 0);
}

}  // namespace

// --- Manifest ---------------------------------------------------------------------------

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") {
    return Split::kTrain;
  }
  if (name == "val") {
    return Split::kVal;
  }
  if (name == "test") {
    return Split::kTest;
  }
  return std::nullopt;
}

std::vector<ManifestEntry> parse_manifest(std::string_view jsonl) {
  std::vector<ManifestEntry> entries;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    const auto nl = jsonl.find('\n', pos);
    const std::string_view line =
        jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? jsonl.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      continue;
    }
    const std::string where = "manifest line " + std::to_string(line_no) + ": ";
    ManifestEntry e;
    try {
      const json j = json::parse(line);
      e.id = j.at("id").get<std::string>();
      e.audio_path = j.at("audio_path").get<std::string>();
      e.captions = j.at("captions").get<std::vector<std::string>>();
      const auto split = parse_split(j.at("split").get<std::string>());
      if (!split) {
        throw DataError(where + "split must be train, val or test");
      }
      e.split = *split;
    } catch (const json::exception& ex) {
      throw DataError(where + ex.what());
    }
    if (e.id.empty()) {
      throw DataError(where + "empty id");
    }
    if (!ids.insert(e.id).second) {
      throw DataError(where + "duplicate id '" + e.id + "'");
    }
    if (e.captions.empty() || e.captions.size() > kMaxCaptions) {
      throw DataError(where + "expected 1 to 5 captions");
    }
    for (const auto& c : e.captions) {
      if (split_words(c).empty()) {
        throw DataError(where + "empty caption");
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  try {
    return parse_manifest(as_text(read_file_bytes(path)));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
}

std::string to_jsonl(std::span<const ManifestEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    json j;
    j["id"] = e.id;
    j["audio_path"] = e.audio_path;
    j["captions"] = e.captions;
    j["split"] = std::string(to_string(e.split));
    out += j.dump();
    out += '\n';
  }
  return out;
}

// --- Config --------------------------------------------------------------------------------

void validate(const PipelineConfig& cfg) {
  validate(cfg.mel);
  validate(cfg.noise);
  validate(cfg.reverb);
  validate(cfg.eda);
  validate(cfg.pairmix);
  if (cfg.batch_size == 0) {
    throw std::invalid_argument("batch_size must be >= 1");
  }
  if (!(cfg.clip_seconds > 0.0)) {
    throw std::invalid_argument("clip_seconds must be > 0");
  }
  if (cfg.tta.repeats == 0 || cfg.tta.n_clips == 0 || !(cfg.tta.clip_seconds > 0.0)) {
    throw std::invalid_argument("tta: repeats, clips and clip_seconds must be positive");
  }
  // SpecAugment widths must fit the grids the config will actually produce.
  auto frames_for = [&](double seconds) {
    return frame_count(static_cast<std::size_t>(std::llround(seconds * cfg.mel.sample_rate)),
                       cfg.mel);
  };
  auto check_masks = [&](const SpecAugmentSpec& s, double seconds, const char* what) {
    const std::size_t frames = frames_for(seconds);
    if (s.max_time_width > frames || s.max_freq_width > cfg.mel.n_mels) {
      throw std::invalid_argument(std::string(what) + ": specaugment widths (" +
                                  std::to_string(s.max_time_width) + " frames, " +
                                  std::to_string(s.max_freq_width) + " bins) exceed the " +
                                  std::to_string(frames) + "x" + std::to_string(cfg.mel.n_mels) +
                                  " grid");
    }
  };
  check_masks(cfg.specaug, cfg.clip_seconds, "clip_seconds");
  check_masks(halve_for_test_time(cfg.audio_specs()).specaug, cfg.tta.clip_seconds,
              "tta.clip_seconds");
}

PipelineConfig parse_config(std::string_view json_text) {
  PipelineConfig cfg;
  bool mask_value_given = false;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) {
      throw DataError("config must be a JSON object");
    }
    read_if(j, "seed", cfg.seed);
    read_if(j, "batch_size", cfg.batch_size);
    read_if(j, "clip_seconds", cfg.clip_seconds);
    read_if(j, "text_augment", cfg.text_augment);
    read_if(j, "lexicon", cfg.lexicon_path);
    if (j.contains("mel")) {
      const auto& m = j.at("mel");
      read_if(m, "sample_rate", cfg.mel.sample_rate);
      read_if(m, "fft_size", cfg.mel.fft_size);
      read_if(m, "hop_size", cfg.mel.hop_size);
      read_if(m, "window_size", cfg.mel.window_size);
      read_if(m, "n_mels", cfg.mel.n_mels);
      read_if(m, "f_min", cfg.mel.f_min);
      read_if(m, "f_max", cfg.mel.f_max);
      read_if(m, "log_floor", cfg.mel.log_floor);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      if (n.contains("snr_db")) {
        const auto range = n.at("snr_db").get<std::vector<double>>();
        if (range.size() != 2) {
          throw DataError("noise.snr_db must be [low, high]");
        }
        cfg.noise.snr_db_low = range[0];
        cfg.noise.snr_db_high = range[1];
      }
      read_if(n, "probability", cfg.noise.probability);
    }
    if (j.contains("reverb")) {
      const auto& r = j.at("reverb");
      read_if(r, "decay_seconds", cfg.reverb.decay_seconds);
      read_if(r, "wet_mix", cfg.reverb.wet_mix);
      read_if(r, "probability", cfg.reverb.probability);
    }
    if (j.contains("specaugment")) {
      const auto& s = j.at("specaugment");
      read_if(s, "n_time_masks", cfg.specaug.n_time_masks);
      read_if(s, "max_time_width", cfg.specaug.max_time_width);
      read_if(s, "n_freq_masks", cfg.specaug.n_freq_masks);
      read_if(s, "max_freq_width", cfg.specaug.max_freq_width);
      mask_value_given = s.contains("mask_value");
      read_if(s, "mask_value", cfg.specaug.mask_value);
    }
    if (j.contains("eda")) {
      const auto& e = j.at("eda");
      read_if(e, "alpha_sr", cfg.eda.alpha_sr);
      read_if(e, "alpha_ri", cfg.eda.alpha_ri);
      read_if(e, "alpha_rs", cfg.eda.alpha_rs);
      read_if(e, "p_rd", cfg.eda.p_rd);
    }
    if (j.contains("pairmix")) {
      const auto& p = j.at("pairmix");
      read_if(p, "n_sources", cfg.pairmix.n_sources);
      read_if(p, "k_ratio", cfg.pairmix.k_ratio);
      read_if(p, "beta_alpha", cfg.pairmix.beta_alpha);
      read_if(p, "gamma_prob", cfg.pairmix.gamma_prob);
      read_if(p, "text_joiner", cfg.pairmix.text_joiner);
      read_if(p, "mix_power_domain", cfg.pairmix.mix_power_domain);
      if (p.contains("lambda_mode")) {
        const auto mode = parse_lambda_mode(p.at("lambda_mode").get<std::string>());
        if (!mode) {
          throw DataError("pairmix.lambda_mode must be fixed or beta");
        }
        cfg.pairmix.lambda_mode = *mode;
      }
      if (p.contains("variant")) {
        const auto v = parse_variant(p.at("variant").get<std::string>());
        if (!v) {
          throw DataError("unknown pairmix.variant");
        }
        cfg.pairmix.variant = *v;
      }
    }
    if (j.contains("tta")) {
      const auto& t = j.at("tta");
      read_if(t, "taus", cfg.tta.taus);
      read_if(t, "repeats", cfg.tta.repeats);
      read_if(t, "clips", cfg.tta.n_clips);
      read_if(t, "clip_seconds", cfg.tta.clip_seconds);
      read_if(t, "stabilize", cfg.tta.stabilize);
      read_if(t, "embedding_dim", cfg.tta.embedding_dim);
      read_if(t, "num_classes", cfg.tta.num_classes);
      read_if(t, "affine", cfg.tta.affine);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  if (!mask_value_given) {
    cfg.specaug.mask_value = static_cast<float>(std::log(cfg.mel.log_floor));
  }
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
  PipelineConfig cfg = parse_config(as_text(bytes));
  if (!cfg.lexicon_path.empty() && fs::path(cfg.lexicon_path).is_relative()) {
    cfg.lexicon_path = (path.parent_path() / cfg.lexicon_path).string();
  }
  return cfg;
}

std::string to_json(const PipelineConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["batch_size"] = cfg.batch_size;
  j["clip_seconds"] = cfg.clip_seconds;
  j["text_augment"] = cfg.text_augment;
  j["lexicon"] = cfg.lexicon_path;
  j["mel"] = {{"sample_rate", cfg.mel.sample_rate}, {"fft_size", cfg.mel.fft_size},
              {"hop_size", cfg.mel.hop_size},       {"window_size", cfg.mel.window_size},
              {"n_mels", cfg.mel.n_mels},           {"f_min", cfg.mel.f_min},
              {"f_max", cfg.mel.f_max},             {"log_floor", cfg.mel.log_floor}};
  j["noise"] = {{"snr_db", {cfg.noise.snr_db_low, cfg.noise.snr_db_high}},
                {"probability", cfg.noise.probability}};
  j["reverb"] = {{"decay_seconds", cfg.reverb.decay_seconds},
                 {"wet_mix", cfg.reverb.wet_mix},
                 {"probability", cfg.reverb.probability}};
  j["specaugment"] = {{"n_time_masks", cfg.specaug.n_time_masks},
                      {"max_time_width", cfg.specaug.max_time_width},
                      {"n_freq_masks", cfg.specaug.n_freq_masks},
                      {"max_freq_width", cfg.specaug.max_freq_width},
                      {"mask_value", cfg.specaug.mask_value}};
  j["eda"] = {{"alpha_sr", cfg.eda.alpha_sr},
              {"alpha_ri", cfg.eda.alpha_ri},
              {"alpha_rs", cfg.eda.alpha_rs},
              {"p_rd", cfg.eda.p_rd}};
  j["pairmix"] = {{"n_sources", cfg.pairmix.n_sources},
                  {"k_ratio", cfg.pairmix.k_ratio},
                  {"lambda_mode", std::string(to_string(cfg.pairmix.lambda_mode))},
                  {"beta_alpha", cfg.pairmix.beta_alpha},
                  {"gamma_prob", cfg.pairmix.gamma_prob},
                  {"variant", std::string(to_string(cfg.pairmix.variant))},
                  {"text_joiner", cfg.pairmix.text_joiner},
                  {"mix_power_domain", cfg.pairmix.mix_power_domain}};
  j["tta"] = {{"taus", cfg.tta.taus},
              {"repeats", cfg.tta.repeats},
              {"clips", cfg.tta.n_clips},
              {"clip_seconds", cfg.tta.clip_seconds},
              {"stabilize", cfg.tta.stabilize},
              {"embedding_dim", cfg.tta.embedding_dim},
              {"num_classes", cfg.tta.num_classes},
              {"affine", cfg.tta.affine}};
  return j.dump(2);
}

// --- Generation ----------------------------------------------------------------------------

std::uint64_t sample_seed(std::uint64_t global_seed, Split split, std::uint64_t batch_index,
                          std::uint64_t position) {
  return mix_seed({global_seed, static_cast<std::uint64_t>(split), batch_index, position});
}

Waveform load_clip(const fs::path& path, const PipelineConfig& cfg) {
  return fix_length(resample(load_wav(path), cfg.mel.sample_rate), cfg.clip_seconds);
}

AugmentSummary run_augment(std::span<const ManifestEntry> manifest, const fs::path& audio_root,
                           const PipelineConfig& cfg, const Lexicon& lexicon,
                           const fs::path& out_dir) {
  validate(cfg);
  std::error_code ec;
  fs::create_directories(out_dir / "mels", ec);
  if (ec || !fs::is_directory(out_dir / "mels")) {
    throw std::runtime_error("cannot create output directory " + (out_dir / "mels").string());
  }

  AugmentSummary summary;
  std::vector<const ManifestEntry*> available;
  for (const auto& e : manifest) {
    if (e.split != Split::kTrain) {
      continue;
    }
    if (!fs::is_regular_file(resolve(audio_root, e.audio_path))) {
      summary.warnings.push_back("missing audio for '" + e.id + "': " + e.audio_path);
      ++summary.skipped_missing;
      continue;
    }
    available.push_back(&e);
  }
  std::vector<std::string> pool_ids;
  pool_ids.reserve(available.size());
  for (const auto* e : available) {
    pool_ids.push_back(e->id);
  }

  const bool use_specaug = has_masks(cfg.specaug);
  std::string jsonl;
  std::size_t sample_index = 0;

  auto emit = [&](const MelSpectrogram& mel, json record) {
    const std::string rel = mel_name(sample_index++);
    write_mel(out_dir / rel, mel);
    record["mel_path"] = rel;
    record["n_frames"] = mel.n_frames;
    record["n_mels"] = mel.n_mels;
    jsonl += record.dump();
    jsonl += '\n';
  };

  const std::size_t n_batches = (available.size() + cfg.batch_size - 1) / cfg.batch_size;
  for (std::size_t b = 0; b < n_batches; ++b) {
    const std::size_t begin = b * cfg.batch_size;
    const std::size_t end = std::min(available.size(), begin + cfg.batch_size);

    std::vector<std::string> batch_ids;
    for (std::size_t i = begin; i < end; ++i) {
      const ManifestEntry& e = *available[i];
      const std::uint64_t seed = sample_seed(cfg.seed, Split::kTrain, b, i - begin);
      Waveform clip;
      try {
        clip = load_clip(resolve(audio_root, e.audio_path), cfg);
      } catch (const FormatError& ex) {
        summary.warnings.push_back("unreadable audio for '" + e.id + "': " + ex.what());
        ++summary.skipped_missing;
        continue;
      }
      std::vector<std::string> applied;
      std::vector<std::string> flags;
      const Waveform augmented = augment_waveform(clip, cfg, seed, applied, flags);
      MelSpectrogram mel = mel_transform(augmented, cfg.mel);
      if (use_specaug) {
        mel = spec_augment(mel, cfg.specaug, mix_seed({seed, 2}));
        applied.emplace_back("specaugment");
      }
      Rng caption_rng(mix_seed({seed, 3}));
      std::string caption = e.captions[caption_rng.uniform_index(e.captions.size())];
      if (cfg.text_augment) {
        caption = eda_augment(caption, cfg.eda, lexicon, mix_seed({seed, 4}));
        applied.emplace_back("eda");
      }
      json record;
      record["id"] = e.id;
      record["kind"] = "original";
      record["batch"] = b;
      record["caption"] = caption;
      record["source_ids"] = json::array({e.id});
      record["lambdas"] = json::array({1.0});
      record["gamma"] = nullptr;
      record["variant"] = nullptr;
      record["augmentations"] = applied;
      record["flags"] = flags;
      emit(mel, std::move(record));
      batch_ids.push_back(e.id);
      ++summary.originals;
    }
    ++summary.batches;

    std::vector<PairPlan> plans;
    try {
      plans = plan_batch(batch_ids, pool_ids, cfg.pairmix, cfg.seed, b,
                         PoolPolicy::kFallbackToFullPool);
    } catch (const std::runtime_error& ex) {
      throw DataError(ex.what());
    }
    for (std::size_t k = 0; k < plans.size(); ++k) {
      const PairPlan& plan = plans[k];
      std::vector<SourcePair> sources;
      std::vector<std::string> applied;
      std::vector<std::string> flags;
      if (plan.exclusion_relaxed) {
        flags.emplace_back("batch_exclusion_relaxed");
      }
      bool ok = true;
      for (std::size_t s = 0; s < plan.pool_indices.size() && ok; ++s) {
        const ManifestEntry& e = *available[plan.pool_indices[s]];
        const std::uint64_t src_seed = mix_seed({plan.seed, 16 + s});
        try {
          Waveform clip = load_clip(resolve(audio_root, e.audio_path), cfg);
          std::vector<std::string> src_applied;
          clip = augment_waveform(clip, cfg, src_seed, src_applied, flags);
          for (auto& a : src_applied) {
            applied.push_back("source" + std::to_string(s) + ":" + a);
          }
          Rng caption_rng(mix_seed({src_seed, 3}));
          std::string caption = e.captions[caption_rng.uniform_index(e.captions.size())];
          if (cfg.text_augment) {
            caption = eda_augment(caption, cfg.eda, lexicon, mix_seed({src_seed, 4}));
            applied.push_back("source" + std::to_string(s) + ":eda");
          }
          sources.push_back({e.id, std::move(clip), std::move(caption)});
        } catch (const FormatError& ex) {
          summary.warnings.push_back("skipping generated pair " + std::to_string(k) +
                                     " of batch " + std::to_string(b) + ": " + ex.what());
          ok = false;
        }
      }
      if (!ok) {
        continue;
      }
      GeneratedPair pair =
          generate_pair(sources, plan.weights, plan.gamma, cfg.pairmix, cfg.mel, cfg.clip_seconds);
      if (use_specaug) {
        pair.mel = spec_augment(pair.mel, cfg.specaug, mix_seed({plan.seed, 2}));
        applied.emplace_back("specaugment");
      }
      flags.insert(flags.end(), pair.flags.begin(), pair.flags.end());
      json record;
      record["id"] = "gen-" + std::to_string(b) + "-" + std::to_string(k);
      record["kind"] = "generated";
      record["batch"] = b;
      record["caption"] = pair.caption;
      record["source_ids"] = pair.source_ids;
      record["lambdas"] = pair.weights.lambdas;
      record["gamma"] = pair.gamma;
      record["variant"] = std::string(to_string(pair.variant));
      record["augmentations"] = applied;
      record["flags"] = flags;
      emit(pair.mel, std::move(record));
      ++summary.generated;
    }
  }

  write_file_atomic(out_dir / "samples.jsonl", jsonl);
  return summary;
}

// --- Statistics ------------------------------------------------------------------------------

ManifestStats manifest_stats(std::span<const ManifestEntry> entries, const fs::path& audio_root) {
  ManifestStats st;
  for (const auto& e : entries) {
    ++st.entries;
    ++st.per_split[std::string(to_string(e.split))];
    st.captions += e.captions.size();
    if (!fs::is_regular_file(resolve(audio_root, e.audio_path))) {
      ++st.missing_audio;
    }
  }
  return st;
}

OutputStats output_stats(const fs::path& samples_jsonl) {
  std::string text;
  try {
    text = as_text(read_file_bytes(samples_jsonl));
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
  const fs::path root = samples_jsonl.parent_path();
  OutputStats st;
  std::size_t words = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line =
        text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    if (line.empty()) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
      ++st.samples;
      ++st.per_kind[j.at("kind").get<std::string>()];
      if (j.at("variant").is_string()) {
        ++st.per_variant[j.at("variant").get<std::string>()];
      }
      if (j.at("gamma").is_number() && j.at("gamma").get<int>() == 1) {
        ++st.gamma_ones;
      }
      for (const auto& f : j.at("flags")) {
        ++st.per_flag[f.get<std::string>()];
      }
      words += split_words(j.at("caption").get<std::string>()).size();
      try {
        const MelSpectrogram mel = read_mel(root / j.at("mel_path").get<std::string>());
        if (mel.n_frames != j.at("n_frames").get<std::size_t>() ||
            mel.n_mels != j.at("n_mels").get<std::size_t>()) {
          ++st.bad_mels;
        }
      } catch (const FormatError&) {
        ++st.bad_mels;
      }
    } catch (const json::exception& e) {
      throw DataError(samples_jsonl.string() + ": " + e.what());
    }
  }
  st.mean_caption_words = st.samples ? static_cast<double>(words) / static_cast<double>(st.samples) : 0.0;
  return st;
}

// --- Synthetic data and TTA simulation ------------------------------------------------------------

std::vector<Waveform> synthetic_clips(std::size_t count, double seconds, int sample_rate,
                                      std::uint64_t seed) {
  std::vector<Waveform> clips;
  clips.reserve(count);
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  for (std::size_t c = 0; c < count; ++c) {
    Rng rng(mix_seed({seed, c}));
    const std::size_t n_tones = 2 + rng.uniform_index(3);
    std::vector<double> freq(n_tones);
    std::vector<double> amp(n_tones);
    std::vector<double> phase(n_tones);
    for (std::size_t t = 0; t < n_tones; ++t) {
      freq[t] = rng.uniform(100.0, std::min(8000.0, 0.4 * sample_rate));
      amp[t] = rng.uniform(0.05, 0.25);
      phase[t] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double time = static_cast<double>(i) / sample_rate;
      double v = 0.01 * rng.normal();
      for (std::size_t t = 0; t < n_tones; ++t) {
        v += amp[t] * std::sin(2.0 * std::numbers::pi * freq[t] * time + phase[t]);
      }
      w.samples[i] = static_cast<float>(v);
    }
    clips.push_back(std::move(w));
  }
  return clips;
}

fs::path write_synthetic_dataset(const fs::path& dir, std::size_t count, double seconds,
                                 int sample_rate, std::uint64_t seed) {
  fs::create_directories(dir / "audio");
  static const char* const kWords[] = {"dog",   "barks",  "car",    "engine", "rain",
                                       "falls", "people", "talk",   "bird",   "sings",
                                       "water", "flows",  "music",  "plays",  "wind",
                                       "blows", "loudly", "softly", "nearby", "distant"};
  const auto clips = synthetic_clips(count, seconds, sample_rate, seed);
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "clip%04zu", i);
    write_wav(dir / "audio" / (std::string(name) + ".wav"), clips[i]);
    Rng rng(mix_seed({seed, i, 7}));
    ManifestEntry e;
    e.id = name;
    e.audio_path = "audio/" + std::string(name) + ".wav";
    e.split = Split::kTrain;
    const std::size_t n_caps = 1 + rng.uniform_index(kMaxCaptions);
    for (std::size_t c = 0; c < n_caps; ++c) {
      std::vector<std::string> words = {"a"};
      const std::size_t n_words = 3 + rng.uniform_index(5);
      for (std::size_t w = 0; w < n_words; ++w) {
        words.emplace_back(kWords[rng.uniform_index(std::size(kWords))]);
      }
      e.captions.push_back(join_words(words));
    }
    entries.push_back(std::move(e));
  }
  const fs::path manifest = dir / "manifest.jsonl";
  write_file_atomic(manifest, to_jsonl(entries));
  return manifest;
}

std::vector<ExperimentRow> run_tta_sim(const PipelineConfig& cfg,
                                       std::span<const NamedStrategy> strategies) {
  validate(cfg);
  const ToyModel model = build_toy_model(cfg.seed, cfg.tta.embedding_dim, cfg.tta.num_classes,
                                         cfg.tta.affine, cfg.mel.n_mels);
  const auto clips =
      synthetic_clips(cfg.tta.n_clips, cfg.tta.clip_seconds, cfg.mel.sample_rate, cfg.seed);
  ExperimentOptions options;
  options.repeats = cfg.tta.repeats;
  options.seed = cfg.seed;
  options.stabilize = cfg.tta.stabilize;
  return tta_experiment(model, clips, halve_for_test_time(cfg.audio_specs()), cfg.mel, strategies,
                        options);
}

}  // namespace pairmix
