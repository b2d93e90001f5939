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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pairmix/signal.hpp"

namespace pairmix {

/// Convex mixing weights. Each weight in [0, 1], summing to 1 within 1e-9.
struct MixWeights {
  std::vector<double> lambdas;

  std::size_t size() const noexcept { return lambdas.size(); }
};

void validate(const MixWeights& w);

enum class LambdaMode {
  kFixed,  // every weight 1/N
  kBeta,   // Beta(a, a) for N = 2, symmetric Dirichlet(a) for N > 2
};

/// How the audio of the N sources is combined.
enum class MixVariant {
  kPairMix,          // Bernoulli(gamma_prob) choice between waveform- and mel-level mixup
  kConcatAudio,      // time concatenation, cut back to one clip length
  kWaveformOnly,     // gamma forced to 1
  kSpectrogramOnly,  // gamma forced to 0
};

std::string_view to_string(MixVariant v);
std::optional<MixVariant> parse_variant(std::string_view name);
std::string_view to_string(LambdaMode m);
std::optional<LambdaMode> parse_lambda_mode(std::string_view name);

struct PairMixConfig {
  std::size_t n_sources = 2;
  double k_ratio = 0.25;
  LambdaMode lambda_mode = LambdaMode::kBeta;
  double beta_alpha = 0.1;
  double gamma_prob = 0.5;
  MixVariant variant = MixVariant::kPairMix;
  std::string text_joiner = " ";
  // Mel-level mixup in linear power (log of the mixed power) instead of
  // mixing the log-mel grids directly.
  bool mix_power_domain = false;
};

void validate(const PairMixConfig& c);

/// One audio-text training example.
struct SourcePair {
  std::string id;
  Waveform audio;
  std::string caption;
};

/// A synthesized example with its provenance.
struct GeneratedPair {
  MelSpectrogram mel;
  std::string caption;
  std::vector<std::string> source_ids;
  MixWeights weights;
  int gamma = 0;  // as sampled; variants that ignore it still record it
  MixVariant variant = MixVariant::kPairMix;
  // Provenance notes, e.g. "waveform_peak_gt_1", "concat_truncated".
  std::vector<std::string> flags;
};

// --- Sampling -----------------------------------------------------------------------

MixWeights sample_lambda(LambdaMode mode, std::size_t n, std::uint64_t seed,
                         double beta_alpha = 0.1);

/// 1 with probability gamma_prob, else 0.
int sample_gamma(double gamma_prob, std::uint64_t seed);

// --- Mixing -----------------------------------------------------------------------------

/// sum_i lambda_i * a_i, sample-wise, unclamped. All inputs must share length
/// and rate.
Waveform mix_waveforms(std::span<const Waveform> sources, const MixWeights& weights);

/// sum_i lambda_i * S_i cellwise over log-mel grids, or, with power_domain,
/// ln(sum_i lambda_i * exp(S_i)).
MelSpectrogram mix_spectrograms(std::span<const MelSpectrogram> sources,
                                const MixWeights& weights, bool power_domain = false);

/// Mel of the mixed waveform.
MelSpectrogram waveform_level_mix(std::span<const Waveform> sources, const MixWeights& weights,
                                  const MelParams& params);

/// Mix of the per-source mels.
MelSpectrogram spectrogram_level_mix(std::span<const Waveform> sources,
                                     const MixWeights& weights, const MelParams& params,
                                     bool power_domain = false);

/// Joins captions in order. Trailing punctuation (.,;:!?) is stripped from
/// every caption but the last.
std::string concat_captions(std::span<const std::string> captions, std::string_view joiner);

/// Paired mixup: gamma = 1 yields the waveform-level mix, gamma = 0 the
/// mel-level mix. Captions are concatenated in source order.
GeneratedPair pairmix(std::span<const SourcePair> sources, const MixWeights& weights, int gamma,
                      const MelParams& params, std::string_view joiner = " ",
                      bool power_domain = false);

/// Concatenates the clips in time, then fixes the length to clip_seconds
/// before the mel transform. Sets "concat_truncated" when audio was cut.
GeneratedPair concat_audio_variant(std::span<const SourcePair> sources, const MelParams& params,
                                   std::string_view joiner, double clip_seconds);

/// Dispatches on cfg.variant. weights and gamma are recorded regardless of
/// whether the variant uses them.
GeneratedPair generate_pair(std::span<const SourcePair> sources, const MixWeights& weights,
                            int gamma, const PairMixConfig& cfg, const MelParams& params,
                            double clip_seconds);

// --- Mini-batch composition ---------------------------------------------------------

/// round(k_ratio * batch_size).
std::size_t generated_count(std::size_t batch_size, double k_ratio);

/// Sampling decisions for one generated pair.
struct PairPlan {
  std::vector<std::size_t> pool_indices;  // distinct; outside the batch unless relaxed
  MixWeights weights;
  int gamma = 0;
  std::uint64_t seed = 0;  // mix_seed({global_seed, batch_index, pair_index})
  bool exclusion_relaxed = false;
};

/// Draws sources, weights and gamma for every generated pair of a batch.
/// Sources are drawn uniformly (without replacement within a pair) from the
/// pool entries whose id is not among `batch_ids`. Each pair uses its own
/// derived seed, so plans are independent of one another.
/// Throws std::runtime_error if fewer than n_sources pool entries remain,
/// unless `pool_policy` is kFallbackToFullPool, in which case the whole pool
/// is used and each plan is marked `exclusion_relaxed`.
enum class PoolPolicy { kStrict, kFallbackToFullPool };

std::vector<PairPlan> plan_batch(std::span<const std::string> batch_ids,
                                 std::span<const std::string> pool_ids, const PairMixConfig& cfg,
                                 std::uint64_t global_seed, std::uint64_t batch_index,
                                 PoolPolicy pool_policy = PoolPolicy::kStrict);

using SourceLoader = std::function<SourcePair(std::size_t pool_index)>;

/// plan_batch followed by generate_pair for each plan.
std::vector<GeneratedPair> compose_batch(std::span<const std::string> batch_ids,
                                         std::span<const std::string> pool_ids,
                                         const SourceLoader& load, const PairMixConfig& cfg,
                                         const MelParams& params, double clip_seconds,
                                         std::uint64_t global_seed, std::uint64_t batch_index);

}  // namespace pairmix
