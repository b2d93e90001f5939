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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pairmix/augment.hpp"
#include "pairmix/signal.hpp"
#include "pairmix/tta.hpp"

namespace pairmix {

struct ToyModelConfig {
  std::uint64_t seed = 0;
  std::size_t n_mels = 64;
  std::size_t embedding_dim = 32;
  std::size_t num_classes = 10;
  // Replace tanh and softmax with the identity, making both layers affine.
  bool affine = false;
  // Fixed input standardization (x - offset) / scale applied before projection.
  double input_offset = -10.0;
  double input_scale = 10.0;
};

/// Untrained two-layer stand-in for an audio encoder plus output head.
///
///   layer 1 (encoder): mel grid -> mean over frames -> standardize ->
///                      W1 x + b1 -> tanh            (embedding_dim)
///   layer 2 (head):    W2 e + b2 -> softmax         (num_classes)
///
/// Weights are N(0, 1/fan_in) and biases N(0, 0.01), all drawn from the seed.
class ToyModel {
 public:
  struct Weights {
    std::vector<double> encoder;       // embedding_dim x n_mels, row-major
    std::vector<double> encoder_bias;  // embedding_dim
    std::vector<double> head;          // num_classes x embedding_dim, row-major
    std::vector<double> head_bias;     // num_classes
  };

  explicit ToyModel(const ToyModelConfig& config);

  const ToyModelConfig& config() const noexcept { return *config_; }
  const Weights& weights() const noexcept { return *weights_; }
  const LayeredModel& layered() const noexcept { return model_; }

  Vector encode(std::span<const double> mel) const;
  Vector head(std::span<const double> embedding) const;
  Vector forward(std::span<const double> mel) const { return model_.forward(mel); }

 private:
  // Shared with the layer closures in model_, so copies stay valid.
  std::shared_ptr<const ToyModelConfig> config_;
  std::shared_ptr<const Weights> weights_;
  LayeredModel model_;
};

ToyModel build_toy_model(std::uint64_t seed, std::size_t embedding_dim = 32,
                         std::size_t num_classes = 10, bool affine = false,
                         std::size_t n_mels = 64);

/// A labelled strategy evaluated at a specific tau.
struct NamedStrategy {
  std::string label;
  Strategy strategy;
};

/// "conventional" at each tau plus the uniform two-level strategies
/// 2x5 (10), 5x5 (25), 5x10 (50) and 5x20 (100), labelled with U+00D7.
std::vector<NamedStrategy> standard_strategies(std::span<const std::size_t> taus);

/// Uniform label "<a>×<b>" for the two-level strategy with groups a then b.
std::string uniform_label(std::size_t encoder_group, std::size_t head_group);

struct ExperimentOptions {
  std::size_t repeats = 100;
  std::uint64_t seed = 0;
  bool stabilize = false;
};

/// One row per (strategy, tau). `repeats` is the number of augmentation draws
/// per clip; mean_l2 is the L2 norm of the mean prediction and variance_trace
/// the trace of the prediction covariance across draws, both averaged over clips.
struct ExperimentRow {
  std::string strategy;
  std::size_t tau = 0;
  std::size_t repeats = 0;
  double mean_l2 = 0.0;
  double variance_trace = 0.0;
};

/// Runs every strategy on every clip with `repeats` independent draws of test
/// views. Draw r of clip i at a given tau uses mix_seed({seed, tau, r, i}), so
/// strategies sharing a tau see identical views.
std::vector<ExperimentRow> tta_experiment(const ToyModel& model, std::span<const Waveform> clips,
                                          const AudioAugmentSpecs& test_specs,
                                          const MelParams& params,
                                          std::span<const NamedStrategy> strategies,
                                          const ExperimentOptions& options);

/// CSV with header strategy,tau,repeat,mean_l2,variance_trace.
std::string to_csv(std::span<const ExperimentRow> rows);

}  // namespace pairmix
