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

#include "pairmix/pairmix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "pairmix/rng.hpp"

namespace pairmix {

namespace {

void check_sources(std::span<const Waveform> sources, const MixWeights& weights) {
  if (sources.empty()) {
    throw std::invalid_argument("mix: no sources");
  }
  if (sources.size() != weights.size()) {
    throw std::invalid_argument("mix: " + std::to_string(sources.size()) + " sources but " +
                                std::to_string(weights.size()) + " weights");
  }
  validate(weights);
  for (const auto& s : sources) {
    if (s.sample_rate != sources.front().sample_rate) {
      throw std::invalid_argument("mix: sources have different sample rates");
    }
    if (s.size() != sources.front().size()) {
      throw std::invalid_argument("mix: sources have different lengths; apply fix_length first");
    }
  }
}

std::vector<Waveform> audio_of(std::span<const SourcePair> sources) {
  std::vector<Waveform> out;
  out.reserve(sources.size());
  for (const auto& s : sources) {
    out.push_back(s.audio);
  }
  return out;
}

std::vector<std::string> captions_of(std::span<const SourcePair> sources) {
  std::vector<std::string> out;
  out.reserve(sources.size());
  for (const auto& s : sources) {
    out.push_back(s.caption);
  }
  return out;
}

std::vector<std::string> ids_of(std::span<const SourcePair> sources) {
  std::vector<std::string> out;
  out.reserve(sources.size());
  for (const auto& s : sources) {
    out.push_back(s.id);
  }
  return out;
}

}  // namespace

void validate(const MixWeights& w) {
  double sum = 0.0;
  for (double l : w.lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) {
      throw std::invalid_argument("mix weights must lie in [0, 1]");
    }
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("mix weights must sum to 1");
  }
}

std::string_view to_string(MixVariant v) {
  switch (v) {
    case MixVariant::kPairMix:
      return "pairmix";
    case MixVariant::kConcatAudio:
      return "concat_audio";
    case MixVariant::kWaveformOnly:
      return "waveform_only";
    case MixVariant::kSpectrogramOnly:
      return "spectrogram_only";
  }
  return "unknown";
}

std::optional<MixVariant> parse_variant(std::string_view name) {
  for (auto v : {MixVariant::kPairMix, MixVariant::kConcatAudio, MixVariant::kWaveformOnly,
                 MixVariant::kSpectrogramOnly}) {
    if (to_string(v) == name) {
      return v;
    }
  }
  return std::nullopt;
}

std::string_view to_string(LambdaMode m) { return m == LambdaMode::kFixed ? "fixed" : "beta"; }

std::optional<LambdaMode> parse_lambda_mode(std::string_view name) {
  if (name == "fixed") {
    return LambdaMode::kFixed;
  }
  if (name == "beta") {
    return LambdaMode::kBeta;
  }
  return std::nullopt;
}

void validate(const PairMixConfig& c) {
  if (c.n_sources < 2) {
    throw std::invalid_argument("pairmix: n_sources must be >= 2");
  }
  if (!(c.k_ratio >= 0.0 && c.k_ratio < 1.0)) {
    throw std::invalid_argument("pairmix: k_ratio must be in [0, 1)");
  }
  if (!(c.gamma_prob >= 0.0 && c.gamma_prob <= 1.0)) {
    throw std::invalid_argument("pairmix: gamma_prob must be in [0, 1]");
  }
  if (c.lambda_mode == LambdaMode::kBeta && !(c.beta_alpha > 0.0)) {
    throw std::invalid_argument("pairmix: beta_alpha must be > 0");
  }
}

// --- Sampling ---------------------------------------------------------------------------

MixWeights sample_lambda(LambdaMode mode, std::size_t n, std::uint64_t seed, double beta_alpha) {
  if (n < 2) {
    throw std::invalid_argument("sample_lambda: n must be >= 2");
  }
  MixWeights w;
  if (mode == LambdaMode::kFixed) {
    w.lambdas.assign(n, 1.0 / static_cast<double>(n));
    return w;
  }
  Rng rng(seed);
  std::vector<double> log_g(n);
  for (double& g : log_g) {
    g = rng.log_gamma_variate(beta_alpha);
  }
  if (n == 2) {
    // G1 / (G1 + G2) evaluated in the log domain.
    const double l1 = 1.0 / (1.0 + std::exp(log_g[1] - log_g[0]));
    w.lambdas = {l1, 1.0 - l1};
    return w;
  }
  const double max_log = *std::max_element(log_g.begin(), log_g.end());
  double total = 0.0;
  w.lambdas.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.lambdas[i] = std::exp(log_g[i] - max_log);
    total += w.lambdas[i];
  }
  for (double& l : w.lambdas) {
    l /= total;
  }
  return w;
}

int sample_gamma(double gamma_prob, std::uint64_t seed) {
  Rng rng(seed);
  return rng.bernoulli(gamma_prob) ? 1 : 0;
}

// --- Mixing ---------------------------------------------------------------------------

Waveform mix_waveforms(std::span<const Waveform> sources, const MixWeights& weights) {
  check_sources(sources, weights);
  Waveform out;
  out.sample_rate = sources.front().sample_rate;
  out.samples.resize(sources.front().size());
  for (std::size_t t = 0; t < out.samples.size(); ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      acc += weights.lambdas[i] * static_cast<double>(sources[i].samples[t]);
    }
    out.samples[t] = static_cast<float>(acc);
  }
  return out;
}

MelSpectrogram mix_spectrograms(std::span<const MelSpectrogram> sources,
                                const MixWeights& weights, bool power_domain) {
  if (sources.empty() || sources.size() != weights.size()) {
    throw std::invalid_argument("mix_spectrograms: source/weight count mismatch");
  }
  validate(weights);
  const auto& first = sources.front();
  for (const auto& s : sources) {
    if (s.n_frames != first.n_frames || s.n_mels != first.n_mels) {
      throw std::invalid_argument("mix_spectrograms: grids have different shapes");
    }
  }
  MelSpectrogram out = first;
  for (std::size_t c = 0; c < out.data.size(); ++c) {
    double acc = 0.0;
    if (power_domain) {
      for (std::size_t i = 0; i < sources.size(); ++i) {
        acc += weights.lambdas[i] * std::exp(static_cast<double>(sources[i].data[c]));
      }
      acc = std::log(std::max(acc, first.params.log_floor));
    } else {
      for (std::size_t i = 0; i < sources.size(); ++i) {
        acc += weights.lambdas[i] * static_cast<double>(sources[i].data[c]);
      }
    }
    out.data[c] = static_cast<float>(acc);
  }
  return out;
}

MelSpectrogram waveform_level_mix(std::span<const Waveform> sources, const MixWeights& weights,
                                  const MelParams& params) {
  return mel_transform(mix_waveforms(sources, weights), params);
}

MelSpectrogram spectrogram_level_mix(std::span<const Waveform> sources,
                                     const MixWeights& weights, const MelParams& params,
                                     bool power_domain) {
  check_sources(sources, weights);
  std::vector<MelSpectrogram> mels;
  mels.reserve(sources.size());
  for (const auto& s : sources) {
    mels.push_back(mel_transform(s, params));
  }
  return mix_spectrograms(mels, weights, power_domain);
}

std::string concat_captions(std::span<const std::string> captions, std::string_view joiner) {
  std::string out;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    std::string_view c = captions[i];
    while (!c.empty() && (c.back() == ' ' || c.back() == '\t' || c.back() == '\n')) {
      c.remove_suffix(1);
    }
    if (i + 1 < captions.size()) {
      while (!c.empty() && std::string_view(".,;:!?").find(c.back()) != std::string_view::npos) {
        c.remove_suffix(1);
      }
    }
    if (i > 0) {
      out += joiner;
    }
    out += c;
  }
  return out;
}

GeneratedPair pairmix(std::span<const SourcePair> sources, const MixWeights& weights, int gamma,
                      const MelParams& params, std::string_view joiner, bool power_domain) {
  if (gamma != 0 && gamma != 1) {
    throw std::invalid_argument("pairmix: gamma must be 0 or 1");
  }
  const std::vector<Waveform> audio = audio_of(sources);
  GeneratedPair out;
  if (gamma == 1) {
    const Waveform mixed = mix_waveforms(audio, weights);
    const auto peak = std::ranges::max(mixed.samples, {}, [](float v) { return std::abs(v); });
    if (std::abs(peak) > 1.0F) {
      out.flags.emplace_back("waveform_peak_gt_1");
    }
    out.mel = mel_transform(mixed, params);
  } else {
    out.mel = spectrogram_level_mix(audio, weights, params, power_domain);
  }
  out.caption = concat_captions(captions_of(sources), joiner);
  out.source_ids = ids_of(sources);
  out.weights = weights;
  out.gamma = gamma;
  out.variant = MixVariant::kPairMix;
  return out;
}

GeneratedPair concat_audio_variant(std::span<const SourcePair> sources, const MelParams& params,
                                   std::string_view joiner, double clip_seconds) {
  if (sources.empty()) {
    throw std::invalid_argument("concat_audio_variant: no sources");
  }
  Waveform joined;
  joined.sample_rate = sources.front().audio.sample_rate;
  for (const auto& s : sources) {
    if (s.audio.sample_rate != joined.sample_rate) {
      throw std::invalid_argument("concat_audio_variant: sources have different sample rates");
    }
    joined.samples.insert(joined.samples.end(), s.audio.samples.begin(), s.audio.samples.end());
  }
  GeneratedPair out;
  const Waveform fixed = fix_length(joined, clip_seconds);
  if (fixed.size() < joined.size()) {
    out.flags.emplace_back("concat_truncated");
  }
  out.mel = mel_transform(fixed, params);
  out.caption = concat_captions(captions_of(sources), joiner);
  out.source_ids = ids_of(sources);
  out.variant = MixVariant::kConcatAudio;
  return out;
}

GeneratedPair generate_pair(std::span<const SourcePair> sources, const MixWeights& weights,
                            int gamma, const PairMixConfig& cfg, const MelParams& params,
                            double clip_seconds) {
  GeneratedPair out;
  switch (cfg.variant) {
    case MixVariant::kPairMix:
      out = pairmix(sources, weights, gamma, params, cfg.text_joiner, cfg.mix_power_domain);
      break;
    case MixVariant::kWaveformOnly:
      out = pairmix(sources, weights, 1, params, cfg.text_joiner, cfg.mix_power_domain);
      break;
    case MixVariant::kSpectrogramOnly:
      out = pairmix(sources, weights, 0, params, cfg.text_joiner, cfg.mix_power_domain);
      break;
    case MixVariant::kConcatAudio:
      out = concat_audio_variant(sources, params, cfg.text_joiner, clip_seconds);
      break;
  }
  out.weights = weights;
  out.gamma = gamma;
  out.variant = cfg.variant;
  return out;
}

// --- Batches -------------------------------------------------------------------------

std::size_t generated_count(std::size_t batch_size, double k_ratio) {
  return static_cast<std::size_t>(std::llround(k_ratio * static_cast<double>(batch_size)));
}

std::vector<PairPlan> plan_batch(std::span<const std::string> batch_ids,
                                 std::span<const std::string> pool_ids, const PairMixConfig& cfg,
                                 std::uint64_t global_seed, std::uint64_t batch_index,
                                 PoolPolicy pool_policy) {
  validate(cfg);
  const std::size_t count = generated_count(batch_ids.size(), cfg.k_ratio);
  if (count == 0) {
    return {};
  }
  const std::unordered_set<std::string_view> in_batch(batch_ids.begin(), batch_ids.end());
  std::vector<std::size_t> eligible;
  eligible.reserve(pool_ids.size());
  for (std::size_t i = 0; i < pool_ids.size(); ++i) {
    if (!in_batch.contains(pool_ids[i])) {
      eligible.push_back(i);
    }
  }
  bool relaxed = false;
  if (eligible.size() < cfg.n_sources && pool_policy == PoolPolicy::kFallbackToFullPool &&
      pool_ids.size() >= cfg.n_sources) {
    eligible.resize(pool_ids.size());
    std::iota(eligible.begin(), eligible.end(), std::size_t{0});
    relaxed = true;
  }
  if (eligible.size() < cfg.n_sources) {
    throw std::runtime_error("pool too small: " + std::to_string(eligible.size()) +
                             " entries remain after excluding the batch, need " +
                             std::to_string(cfg.n_sources));
  }

  std::vector<PairPlan> plans(count);
  for (std::size_t p = 0; p < count; ++p) {
    PairPlan& plan = plans[p];
    plan.seed = mix_seed({global_seed, batch_index, p});
    plan.exclusion_relaxed = relaxed;
    Rng rng(plan.seed);
    // Distinct sources: redraw on collision.
    std::vector<std::size_t> picked;
    while (picked.size() < cfg.n_sources) {
      const std::size_t candidate = eligible[rng.uniform_index(eligible.size())];
      if (std::find(picked.begin(), picked.end(), candidate) == picked.end()) {
        picked.push_back(candidate);
      }
    }
    plan.pool_indices = std::move(picked);
    plan.weights = sample_lambda(cfg.lambda_mode, cfg.n_sources, rng.next_u64(), cfg.beta_alpha);
    plan.gamma = sample_gamma(cfg.gamma_prob, rng.next_u64());
  }
  return plans;
}

std::vector<GeneratedPair> compose_batch(std::span<const std::string> batch_ids,
                                         std::span<const std::string> pool_ids,
                                         const SourceLoader& load, const PairMixConfig& cfg,
                                         const MelParams& params, double clip_seconds,
                                         std::uint64_t global_seed, std::uint64_t batch_index) {
  const auto plans = plan_batch(batch_ids, pool_ids, cfg, global_seed, batch_index);
  std::vector<GeneratedPair> out;
  out.reserve(plans.size());
  for (const auto& plan : plans) {
    std::vector<SourcePair> sources;
    sources.reserve(plan.pool_indices.size());
    for (std::size_t idx : plan.pool_indices) {
      sources.push_back(load(idx));
    }
    out.push_back(generate_pair(sources, plan.weights, plan.gamma, cfg, params, clip_seconds));
  }
  return out;
}

}  // namespace pairmix
