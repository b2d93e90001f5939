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

#include "pairmix/augment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pairmix/dsp.hpp"
#include "pairmix/fileio.hpp"
#include "pairmix/rng.hpp"

namespace pairmix {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Synonyms of `word` other than the word itself.
std::vector<std::string> synonyms_of(const std::string& word, const Lexicon& lexicon) {
  const std::string key = lower(word);
  const auto it = lexicon.find(key);
  if (it == lexicon.end()) {
    return {};
  }
  std::vector<std::string> out;
  for (const auto& syn : it->second) {
    if (lower(syn) != key) {
      out.push_back(syn);
    }
  }
  return out;
}

std::size_t rounded_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
  }
}

}  // namespace

// --- Validation ------------------------------------------------------------------

void validate(const NoiseSpec& s) {
  if (!(s.snr_db_low <= s.snr_db_high)) {
    throw std::invalid_argument("noise: snr_db_low must be <= snr_db_high");
  }
  check_probability(s.probability, "noise.probability");
}

void validate(const ReverbSpec& s) {
  if (!(s.decay_seconds > 0.0)) {
    throw std::invalid_argument("reverb: decay_seconds must be > 0");
  }
  check_probability(s.wet_mix, "reverb.wet_mix");
  check_probability(s.probability, "reverb.probability");
}

void validate(const EdaSpec& s) {
  check_probability(s.alpha_sr, "eda.alpha_sr");
  check_probability(s.alpha_ri, "eda.alpha_ri");
  check_probability(s.alpha_rs, "eda.alpha_rs");
  check_probability(s.p_rd, "eda.p_rd");
}

// --- Lexicon -------------------------------------------------------------------------

Lexicon parse_lexicon(std::string_view text) {
  Lexicon lex;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line =
        trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw std::invalid_argument("lexicon line " + std::to_string(line_no) +
                                  ": expected word<TAB>synonyms");
    }
    auto& syns = lex[lower(trim(line.substr(0, tab)))];
    std::string_view rest = line.substr(tab + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = trim(rest.substr(0, comma));
      if (!item.empty()) {
        std::string token(item);
        std::replace(token.begin(), token.end(), ' ', '_');
        syns.push_back(std::move(token));
      }
      if (comma == std::string_view::npos) {
        break;
      }
      rest = rest.substr(comma + 1);
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_lexicon(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

// --- Waveform augmentations -------------------------------------------------------------

Augmented<Waveform> add_gaussian_noise(const Waveform& w, const NoiseSpec& spec,
                                       std::uint64_t seed) {
  validate(spec);
  if (w.samples.empty()) {
    throw std::invalid_argument("add_gaussian_noise: empty waveform");
  }
  Rng rng(seed);
  if (!rng.bernoulli(spec.probability)) {
    return {w, false, false};
  }
  const double snr_db = rng.uniform(spec.snr_db_low, spec.snr_db_high);

  double signal_power = 0.0;
  for (float s : w.samples) {
    signal_power += static_cast<double>(s) * s;
  }
  signal_power /= static_cast<double>(w.samples.size());
  if (signal_power == 0.0) {
    return {w, false, true};
  }

  std::vector<double> noise(w.samples.size());
  double noise_power = 0.0;
  for (double& n : noise) {
    n = rng.normal();
    noise_power += n * n;
  }
  noise_power /= static_cast<double>(noise.size());
  const double target_power = signal_power / std::pow(10.0, snr_db / 10.0);
  const double scale = std::sqrt(target_power / noise_power);

  Waveform out = w;
  for (std::size_t i = 0; i < noise.size(); ++i) {
    out.samples[i] = static_cast<float>(static_cast<double>(w.samples[i]) + scale * noise[i]);
  }
  return {std::move(out), true, false};
}

std::vector<double> reverb_impulse_response(int sample_rate, double decay_seconds,
                                            std::uint64_t seed) {
  if (sample_rate <= 0 || !(decay_seconds > 0.0)) {
    throw std::invalid_argument("reverb_impulse_response: rate and decay must be positive");
  }
  constexpr double kLn1000 = 6.907755278982137;  // -60 dB point of the amplitude envelope
  const auto length = static_cast<std::size_t>(std::ceil(decay_seconds * sample_rate));
  Rng rng(seed);
  std::vector<double> h(std::max<std::size_t>(length, 1));
  double peak = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double envelope =
        std::exp(-kLn1000 * static_cast<double>(k) / (sample_rate * decay_seconds));
    h[k] = rng.normal() * envelope;
    peak = std::max(peak, std::abs(h[k]));
  }
  if (peak > 0.0) {
    for (double& v : h) {
      v /= peak;
    }
  }
  return h;
}

Augmented<Waveform> apply_reverb(const Waveform& w, const ReverbSpec& spec, std::uint64_t seed) {
  validate(spec);
  if (w.samples.empty()) {
    throw std::invalid_argument("apply_reverb: empty waveform");
  }
  Rng rng(seed);
  if (!rng.bernoulli(spec.probability)) {
    return {w, false, false};
  }
  if (spec.wet_mix == 0.0) {
    return {w, true, false};
  }
  const std::vector<double> h =
      reverb_impulse_response(w.sample_rate, spec.decay_seconds, mix_seed({seed, 1}));
  const std::vector<double> dry(w.samples.begin(), w.samples.end());
  const std::vector<double> wet = dsp::convolve(dry, h);

  std::vector<double> mixed(dry.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < dry.size(); ++i) {
    mixed[i] = (1.0 - spec.wet_mix) * dry[i] + spec.wet_mix * wet[i];
    peak = std::max(peak, std::abs(mixed[i]));
  }
  const double gain = peak > 1.0 ? 1.0 / peak : 1.0;
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(dry.size());
  for (std::size_t i = 0; i < dry.size(); ++i) {
    out.samples[i] = static_cast<float>(mixed[i] * gain);
  }
  return {std::move(out), true, false};
}

// --- SpecAugment ------------------------------------------------------------------------

MelSpectrogram spec_augment(const MelSpectrogram& s, const SpecAugmentSpec& spec,
                            std::uint64_t seed) {
  if (spec.max_time_width > s.n_frames) {
    throw std::invalid_argument("spec_augment: max_time_width " +
                                std::to_string(spec.max_time_width) + " exceeds " +
                                std::to_string(s.n_frames) + " frames");
  }
  if (spec.max_freq_width > s.n_mels) {
    throw std::invalid_argument("spec_augment: max_freq_width " +
                                std::to_string(spec.max_freq_width) + " exceeds " +
                                std::to_string(s.n_mels) + " mel bins");
  }
  MelSpectrogram out = s;
  Rng rng(seed);
  for (std::size_t i = 0; i < spec.n_time_masks; ++i) {
    const auto width = static_cast<std::size_t>(rng.uniform_index(spec.max_time_width + 1));
    const auto start = static_cast<std::size_t>(rng.uniform_index(s.n_frames - width + 1));
    for (std::size_t f = start; f < start + width; ++f) {
      std::fill_n(out.data.begin() + static_cast<std::ptrdiff_t>(f * s.n_mels), s.n_mels,
                  spec.mask_value);
    }
  }
  for (std::size_t i = 0; i < spec.n_freq_masks; ++i) {
    const auto width = static_cast<std::size_t>(rng.uniform_index(spec.max_freq_width + 1));
    const auto start = static_cast<std::size_t>(rng.uniform_index(s.n_mels - width + 1));
    for (std::size_t f = 0; f < s.n_frames; ++f) {
      for (std::size_t m = start; m < start + width; ++m) {
        out.at(f, m) = spec.mask_value;
      }
    }
  }
  return out;
}

// --- EDA ------------------------------------------------------------------------------

std::string_view to_string(EdaOp op) {
  switch (op) {
    case EdaOp::kSynonymReplacement:
      return "synonym_replacement";
    case EdaOp::kRandomInsertion:
      return "random_insertion";
    case EdaOp::kRandomSwap:
      return "random_swap";
    case EdaOp::kRandomDeletion:
      return "random_deletion";
  }
  return "unknown";
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) {
    words.push_back(w);
  }
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) {
      out += ' ';
    }
    out += words[i];
  }
  return out;
}

std::string eda_apply(EdaOp op, std::string_view caption, const EdaSpec& spec,
                      const Lexicon& lexicon, std::uint64_t seed) {
  validate(spec);
  std::vector<std::string> words = split_words(caption);
  if (words.empty()) {
    throw std::invalid_argument("eda: caption has no words");
  }
  const std::size_t n = words.size();
  Rng rng(seed);

  switch (op) {
    case EdaOp::kSynonymReplacement: {
      std::vector<std::size_t> eligible;
      for (std::size_t i = 0; i < n; ++i) {
        if (!synonyms_of(words[i], lexicon).empty()) {
          eligible.push_back(i);
        }
      }
      shuffle(eligible, rng);
      const std::size_t count = std::min(rounded_count(spec.alpha_sr, n), eligible.size());
      for (std::size_t k = 0; k < count; ++k) {
        const auto syns = synonyms_of(words[eligible[k]], lexicon);
        words[eligible[k]] = syns[rng.uniform_index(syns.size())];
      }
      break;
    }
    case EdaOp::kRandomInsertion: {
      const std::size_t count = rounded_count(spec.alpha_ri, n);
      for (std::size_t k = 0; k < count; ++k) {
        std::vector<std::size_t> with_syns;
        for (std::size_t i = 0; i < words.size(); ++i) {
          if (!synonyms_of(words[i], lexicon).empty()) {
            with_syns.push_back(i);
          }
        }
        if (with_syns.empty()) {
          break;
        }
        const auto syns = synonyms_of(words[with_syns[rng.uniform_index(with_syns.size())]], lexicon);
        const std::string pick = syns[rng.uniform_index(syns.size())];
        const auto at = rng.uniform_index(words.size() + 1);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), pick);
      }
      break;
    }
    case EdaOp::kRandomSwap: {
      if (n < 2) {
        break;
      }
      const std::size_t count = rounded_count(spec.alpha_rs, n);
      for (std::size_t k = 0; k < count; ++k) {
        const auto i = rng.uniform_index(n);
        auto j = rng.uniform_index(n - 1);
        if (j >= i) {
          ++j;
        }
        std::swap(words[i], words[j]);
      }
      break;
    }
    case EdaOp::kRandomDeletion: {
      if (n == 1) {
        break;
      }
      std::vector<std::string> kept;
      for (auto& w : words) {
        if (rng.uniform() >= spec.p_rd) {
          kept.push_back(w);
        }
      }
      if (kept.empty()) {
        kept.push_back(words[rng.uniform_index(n)]);
      }
      words = std::move(kept);
      break;
    }
  }
  return join_words(words);
}

std::string eda_augment(std::string_view caption, const EdaSpec& spec, const Lexicon& lexicon,
                        std::uint64_t seed) {
  Rng rng(seed);
  const auto op = static_cast<EdaOp>(rng.uniform_index(4));
  return eda_apply(op, caption, spec, lexicon, rng.next_u64());
}

// --- Test-time specs -----------------------------------------------------------------

AudioAugmentSpecs halve_for_test_time(const AudioAugmentSpecs& train) {
  AudioAugmentSpecs test = train;
  test.specaug.max_time_width = train.specaug.max_time_width / 2;
  test.specaug.max_freq_width = train.specaug.max_freq_width / 2;
  test.reverb.decay_seconds = train.reverb.decay_seconds * 0.5;
  test.reverb.probability = train.reverb.probability * 0.5;
  test.noise.probability = train.noise.probability * 0.5;
  return test;
}

AudioAugmentSpecs no_augmentation() {
  AudioAugmentSpecs s;
  s.noise.probability = 0.0;
  s.reverb.probability = 0.0;
  s.specaug.n_time_masks = 0;
  s.specaug.max_time_width = 0;
  s.specaug.n_freq_masks = 0;
  s.specaug.max_freq_width = 0;
  return s;
}

}  // namespace pairmix
