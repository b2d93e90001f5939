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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pairmix/augment.hpp"
#include "pairmix/signal.hpp"

namespace pairmix {

/// Value passed between model layers.
using Vector = std::vector<double>;

/// One stage f_h of a layered model. input_dim == 0 accepts any size.
struct Layer {
  std::string name;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::function<Vector(std::span<const double>)> fn;
};

/// A model f = f_H o ... o f_1 whose layer boundaries are numeric vectors.
class LayeredModel {
 public:
  LayeredModel() = default;
  explicit LayeredModel(std::vector<Layer> layers);

  std::size_t num_layers() const noexcept { return layers_.size(); }
  const Layer& layer(std::size_t h) const { return layers_.at(h); }

  /// f_h for 0-based h. Checks the boundary dimensions.
  Vector apply(std::size_t h, std::span<const double> x) const;

  /// Plain forward pass through every layer.
  Vector forward(std::span<const double> x) const;

 private:
  std::vector<Layer> layers_;
};

/// Groups of indices into the previous layer's outputs.
using Partition = std::vector<std::vector<std::size_t>>;

/// Aggregation plan for test-time augmentation over an H-layer model.
///
/// partitions[h] partitions {0, ..., |partitions[h-1]| - 1} (with
/// |partitions[-1]| taken as tau). Layer h produces one output per group:
/// the mean of f_h over the group's inputs. Indices are 0-based.
struct Strategy {
  std::size_t tau = 0;
  std::vector<Partition> partitions;

  std::size_t num_layers() const noexcept { return partitions.size(); }
  friend bool operator==(const Strategy&, const Strategy&) = default;
};

enum class StrategyLaw {
  kTauPositive,
  kLayerCount,
  kEmptyGroup,
  kIndexOutOfRange,
  kDuplicateIndex,
  kIncompleteCover,
  kGroupSizeDivides,
  kFinalSingleOutput,
  kLayerIndexOrder,
};

struct StrategyViolation {
  StrategyLaw law;
  std::size_t layer = 0;  // 1-based; 0 when not layer-specific
  std::string message;
};

/// Checks the partition laws at every layer in order and that the last layer
/// yields exactly one output. Returns the first violated law.
std::optional<StrategyViolation> validate_strategy(const Strategy& s, std::size_t num_layers);

/// Uniform strategy description: at each listed layer (1-based, strictly
/// increasing), consecutive outputs are grouped in blocks of group_size;
/// all other layers pass values through one-to-one.
struct UniformStrategySpec {
  struct Step {
    std::size_t layer = 0;
    std::size_t group_size = 0;
  };
  std::size_t tau = 0;
  std::size_t num_layers = 0;
  std::vector<Step> steps;
};

/// Divisibility and single-output checks for a uniform description; these
/// together amount to tau == product of the group sizes.
std::optional<StrategyViolation> validate_uniform(const UniformStrategySpec& spec);

/// Builds the explicit strategy. Throws std::invalid_argument on a violation.
Strategy build_uniform(const UniformStrategySpec& spec);

/// Averages only at the last layer.
Strategy conventional_tta(std::size_t tau, std::size_t num_layers);

/// Averages once after layer `h_prime` (1-based, 1 <= h_prime < H). For
/// h_prime == H - 1 this coincides with conventional_tta.
Strategy mid_tta(std::size_t tau, std::size_t h_prime, std::size_t num_layers);

/// Uniform grouping with the given sizes at the given 1-based layers; tau is
/// the product of the sizes. Throws std::invalid_argument if the layers are
/// not strictly increasing within [1, H] or a size is zero.
Strategy multi_tta_uniform(std::span<const std::size_t> group_sizes,
                           std::span<const std::size_t> layer_indices, std::size_t num_layers);

struct TtaOutput {
  Vector prediction;
  std::vector<std::size_t> intermediate_counts;  // live values after each layer
  bool stabilized = false;
};

/// Runs the strategy: o_{h,i} = mean over j in P_h[i] of f_h(o_{h-1,j}) with
/// o_{0,j} = inputs[j]. Sums run in ascending index order within each group, so
/// results are reproducible. Throws std::invalid_argument for an invalid
/// strategy, a wrong number of inputs or mismatched dimensions.
TtaOutput execute(const LayeredModel& model, const Strategy& s, std::span<const Vector> inputs);

/// 0.5 * f(clean) + 0.5 * execute(model, s, views).
TtaOutput stabilized_predict(const LayeredModel& model, const Strategy& s,
                             std::span<const double> clean, std::span<const Vector> views);

/// tau independently augmented views of one clip: noise, reverb, mel, then
/// SpecAugment. View j draws from mix_seed({seed, j}). No paired mixing.
std::vector<MelSpectrogram> augment_inputs(const Waveform& x, std::size_t tau,
                                           const AudioAugmentSpecs& test_specs,
                                           const MelParams& params, std::uint64_t seed);

/// Row-major flattening of a mel grid.
Vector to_vector(const MelSpectrogram& s);

// --- JSON ---------------------------------------------------------------------

class StrategyParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A strategy file: either {"tau": n, "layers": [{"index": h, "group_size": g}, ...]}
/// or {"tau": n, "partitions": [[[0, 1], ...], ...]}. "num_layers" is optional
/// in both (defaults: highest index, or number of partitions).
struct StrategyDocument {
  std::optional<UniformStrategySpec> uniform;
  std::optional<Strategy> partitions;
  std::size_t num_layers = 0;
};

/// Throws StrategyParseError for malformed JSON or a wrong schema.
StrategyDocument parse_strategy_json(std::string_view text);

std::optional<StrategyViolation> validate(const StrategyDocument& doc);

/// Explicit strategy for a valid document.
Strategy to_strategy(const StrategyDocument& doc);

std::string to_json(const Strategy& s);
std::string to_json(const UniformStrategySpec& spec);

}  // namespace pairmix
