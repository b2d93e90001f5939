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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pairmix/augment.hpp"
#include "pairmix/pairmix.hpp"
#include "pairmix/signal.hpp"
#include "pairmix/toy_model.hpp"

namespace pairmix {

// --- Manifest -----------------------------------------------------------------------------

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view name);

/// One line of the dataset manifest:
///   {"id": "...", "audio_path": "rel/path.wav", "captions": ["..."], "split": "train"}
struct ManifestEntry {
  std::string id;
  std::string audio_path;
  std::vector<std::string> captions;
  Split split = Split::kTrain;
};

/// Malformed manifest or config. Maps to exit code 1 in the CLI.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses JSONL. Blank lines are skipped. Enforces unique ids, 1 to 5
/// non-empty captions and a known split.
std::vector<ManifestEntry> parse_manifest(std::string_view jsonl);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
std::string to_jsonl(std::span<const ManifestEntry> entries);

// --- Config ---------------------------------------------------------------------------------

struct TtaSimConfig {
  std::vector<std::size_t> taus = {10, 25, 50, 100};
  std::size_t repeats = 100;
  std::size_t n_clips = 2;
  double clip_seconds = 0.5;
  bool stabilize = false;
  std::size_t embedding_dim = 32;
  std::size_t num_classes = 10;
  bool affine = false;
};

struct PipelineConfig {
  MelParams mel;
  NoiseSpec noise;
  ReverbSpec reverb;
  SpecAugmentSpec specaug;
  EdaSpec eda;
  PairMixConfig pairmix;
  TtaSimConfig tta;
  std::uint64_t seed = 0;
  std::size_t batch_size = 32;
  double clip_seconds = 10.0;
  // Captions stay untouched unless enabled (EDA can corrupt caption targets).
  bool text_augment = false;
  std::string lexicon_path;  // relative paths resolve against the config file

  AudioAugmentSpecs audio_specs() const { return {noise, reverb, specaug}; }
};

/// Missing keys keep their defaults. specaugment.mask_value defaults to
/// ln(mel.log_floor). Throws DataError on malformed JSON or invalid values.
PipelineConfig parse_config(std::string_view json_text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string to_json(const PipelineConfig& cfg);
void validate(const PipelineConfig& cfg);

// --- Seeding ---------------------------------------------------------------------------------

/// mix_seed({global_seed, split, batch_index, position}); generated pairs of a
/// batch take positions B, B + 1, ...
std::uint64_t sample_seed(std::uint64_t global_seed, Split split, std::uint64_t batch_index,
                          std::uint64_t position);

// --- Dataset generation ------------------------------------------------------------------------

struct AugmentSummary {
  std::size_t batches = 0;
  std::size_t originals = 0;
  std::size_t generated = 0;
  std::size_t skipped_missing = 0;
  std::vector<std::string> warnings;
};

/// Writes <out_dir>/mels/NNNNNN.mel for every sample and <out_dir>/samples.jsonl
/// with one provenance record per sample. Audio paths resolve against
/// `audio_root`. Entries whose audio is missing or unreadable are skipped
/// with a warning. Throws std::runtime_error if out_dir cannot be written and
/// DataError if the pool is too small for the mixing configuration.
AugmentSummary run_augment(std::span<const ManifestEntry> manifest,
                           const std::filesystem::path& audio_root, const PipelineConfig& cfg,
                           const Lexicon& lexicon, const std::filesystem::path& out_dir);

/// Loads, resamples to mel.sample_rate and fixes the length to clip_seconds.
Waveform load_clip(const std::filesystem::path& path, const PipelineConfig& cfg);

// --- Statistics --------------------------------------------------------------------------------

struct ManifestStats {
  std::map<std::string, std::size_t> per_split;
  std::size_t entries = 0;
  std::size_t captions = 0;
  std::size_t missing_audio = 0;
};

ManifestStats manifest_stats(std::span<const ManifestEntry> entries,
                             const std::filesystem::path& audio_root);

struct OutputStats {
  std::map<std::string, std::size_t> per_kind;
  std::map<std::string, std::size_t> per_variant;
  std::map<std::string, std::size_t> per_flag;
  std::size_t samples = 0;
  std::size_t gamma_ones = 0;
  std::size_t bad_mels = 0;  // missing, unreadable or dimension mismatch
  double mean_caption_words = 0.0;
};

/// Reads samples.jsonl and checks every referenced mel file.
OutputStats output_stats(const std::filesystem::path& samples_jsonl);

// --- TTA simulation ----------------------------------------------------------------------------

/// Deterministic test clips: a few random sinusoids plus low-level noise.
std::vector<Waveform> synthetic_clips(std::size_t count, double seconds, int sample_rate,
                                      std::uint64_t seed);

/// Writes `count` synthetic WAV clips under dir/audio and dir/manifest.jsonl
/// (all train split). Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, std::size_t count,
                                              double seconds, int sample_rate,
                                              std::uint64_t seed);

/// Runs the toy-model experiment with halved test-time specs derived from the
/// config's training specs.
std::vector<ExperimentRow> run_tta_sim(const PipelineConfig& cfg,
                                       std::span<const NamedStrategy> strategies);

}  // namespace pairmix
