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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pairmix/signal.hpp"

namespace pairmix {

struct NoiseSpec {
  double snr_db_low = 20.0;
  double snr_db_high = 40.0;
  double probability = 0.5;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// Synthetic-room reverb. decay_seconds is the -60 dB time of the impulse
/// response envelope.
struct ReverbSpec {
  double decay_seconds = 0.3;
  double wet_mix = 0.5;
  double probability = 0.5;

  friend bool operator==(const ReverbSpec&, const ReverbSpec&) = default;
};

struct SpecAugmentSpec {
  std::size_t n_time_masks = 2;
  std::size_t max_time_width = 64;
  std::size_t n_freq_masks = 2;
  std::size_t max_freq_width = 8;
  float mask_value = -23.02585093F;  // ln(1e-10), the silence level of the default front end

  friend bool operator==(const SpecAugmentSpec&, const SpecAugmentSpec&) = default;
};

/// Synonym table: lower-cased word -> synonyms. Multi-word synonyms are stored
/// as single tokens joined by '_'.
using Lexicon = std::unordered_map<std::string, std::vector<std::string>>;

/// Parses "word<TAB>syn1,syn2" lines. Blank lines and lines starting with '#'
/// are ignored.
Lexicon parse_lexicon(std::string_view text);
Lexicon load_lexicon(const std::filesystem::path& path);

struct EdaSpec {
  double alpha_sr = 0.1;
  double alpha_ri = 0.1;
  double alpha_rs = 0.1;
  double p_rd = 0.1;
};

void validate(const NoiseSpec& s);
void validate(const ReverbSpec& s);
void validate(const EdaSpec& s);

/// Result of a probabilistic augmentation.
template <typename T>
struct Augmented {
  T value;
  bool applied = false;
  // Set when the augmentation was drawn but skipped because the input is silent.
  bool skipped_silent = false;
};

/// Adds white Gaussian noise at an SNR drawn uniformly from the configured range.
/// The noise is rescaled to its realized power, so the SNR is exact.
Augmented<Waveform> add_gaussian_noise(const Waveform& w, const NoiseSpec& spec,
                                       std::uint64_t seed);

/// Synthetic impulse response used by apply_reverb: seeded unit-variance
/// Gaussian noise under an exp(-6.91 k / (fs * decay)) envelope, peak-normalized.
/// Length is ceil(decay * fs) samples.
std::vector<double> reverb_impulse_response(int sample_rate, double decay_seconds,
                                            std::uint64_t seed);

/// Convolves with reverb_impulse_response(fs, decay, mix_seed({seed, 1})) and
/// blends (1 - wet) * dry + wet * wet_signal, truncated to the input length.
/// The result is rescaled to unit peak if it exceeds 1.
Augmented<Waveform> apply_reverb(const Waveform& w, const ReverbSpec& spec, std::uint64_t seed);

/// Time and frequency stripe masking. Throws std::invalid_argument if a
/// maximum width exceeds its axis.
MelSpectrogram spec_augment(const MelSpectrogram& s, const SpecAugmentSpec& spec,
                            std::uint64_t seed);

enum class EdaOp { kSynonymReplacement, kRandomInsertion, kRandomSwap, kRandomDeletion };

std::string_view to_string(EdaOp op);

/// Applies one EDA operation chosen uniformly at random.
std::string eda_augment(std::string_view caption, const EdaSpec& spec, const Lexicon& lexicon,
                        std::uint64_t seed);

/// Applies a specific EDA operation; the seed drives only that operation.
std::string eda_apply(EdaOp op, std::string_view caption, const EdaSpec& spec,
                      const Lexicon& lexicon, std::uint64_t seed);

std::vector<std::string> split_words(std::string_view text);
std::string join_words(const std::vector<std::string>& words);

/// The waveform and spectrogram augmentation settings used together.
struct AudioAugmentSpecs {
  NoiseSpec noise;
  ReverbSpec reverb;
  SpecAugmentSpec specaug;

  friend bool operator==(const AudioAugmentSpecs&, const AudioAugmentSpecs&) = default;
};

/// Test-time variant of the training specs: mask widths (rounded down),
/// reverb decay and both application probabilities are halved. Everything
/// else is copied.
AudioAugmentSpecs halve_for_test_time(const AudioAugmentSpecs& train);

/// All augmentations disabled.
AudioAugmentSpecs no_augmentation();

}  // namespace pairmix
