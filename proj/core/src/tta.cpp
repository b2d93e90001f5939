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

#include "pairmix/tta.hpp"

#include <algorithm>
#include <json.hpp>

#include "pairmix/rng.hpp"

namespace pairmix {

namespace {

using nlohmann::json;

StrategyViolation violation(StrategyLaw law, std::size_t layer, std::string message) {
  return StrategyViolation{law, layer, std::move(message)};
}

std::string at_layer(std::size_t layer) { return " (layer " + std::to_string(layer) + ")"; }

}  // namespace

// --- LayeredModel ---------------------------------------------------------------------

LayeredModel::LayeredModel(std::vector<Layer> layers) : layers_(std::move(layers)) {
  for (std::size_t h = 0; h + 1 < layers_.size(); ++h) {
    const auto out = layers_[h].output_dim;
    const auto in = layers_[h + 1].input_dim;
    if (out != 0 && in != 0 && out != in) {
      throw std::invalid_argument("layer " + layers_[h].name + " outputs " + std::to_string(out) +
                                  " values but " + layers_[h + 1].name + " expects " +
                                  std::to_string(in));
    }
  }
}

Vector LayeredModel::apply(std::size_t h, std::span<const double> x) const {
  const Layer& layer = layers_.at(h);
  if (layer.input_dim != 0 && x.size() != layer.input_dim) {
    throw std::invalid_argument("dimension mismatch: layer " + layer.name + " expects " +
                                std::to_string(layer.input_dim) + " values, got " +
                                std::to_string(x.size()));
  }
  Vector y = layer.fn(x);
  if (layer.output_dim != 0 && y.size() != layer.output_dim) {
    throw std::invalid_argument("dimension mismatch: layer " + layer.name + " produced " +
                                std::to_string(y.size()) + " values, declared " +
                                std::to_string(layer.output_dim));
  }
  return y;
}

Vector LayeredModel::forward(std::span<const double> x) const {
  Vector v(x.begin(), x.end());
  for (std::size_t h = 0; h < layers_.size(); ++h) {
    v = apply(h, v);
  }
  return v;
}

// --- Strategies ----------------------------------------------------------------------

std::optional<StrategyViolation> validate_strategy(const Strategy& s, std::size_t num_layers) {
  if (s.tau == 0) {
    return violation(StrategyLaw::kTauPositive, 0, "tau must be at least 1");
  }
  if (num_layers == 0) {
    return violation(StrategyLaw::kLayerCount, 0, "model must have at least one layer");
  }
  if (s.partitions.size() != num_layers) {
    return violation(StrategyLaw::kLayerCount, 0,
                     "strategy defines " + std::to_string(s.partitions.size()) +
                         " layers but the model has " + std::to_string(num_layers));
  }
  std::size_t count = s.tau;
  for (std::size_t h = 0; h < s.partitions.size(); ++h) {
    const std::size_t layer = h + 1;
    std::vector<bool> seen(count, false);
    for (const auto& group : s.partitions[h]) {
      if (group.empty()) {
        return violation(StrategyLaw::kEmptyGroup, layer, "empty group" + at_layer(layer));
      }
      for (std::size_t idx : group) {
        if (idx >= count) {
          return violation(StrategyLaw::kIndexOutOfRange, layer,
                           "index " + std::to_string(idx) + " out of range for " +
                               std::to_string(count) + " inputs" + at_layer(layer));
        }
        if (seen[idx]) {
          return violation(StrategyLaw::kDuplicateIndex, layer,
                           "index " + std::to_string(idx) + " appears in more than one group" +
                               at_layer(layer));
        }
        seen[idx] = true;
      }
    }
    const auto missing = std::find(seen.begin(), seen.end(), false);
    if (missing != seen.end()) {
      return violation(StrategyLaw::kIncompleteCover, layer,
                       "index " + std::to_string(missing - seen.begin()) +
                           " is not assigned to any group" + at_layer(layer));
    }
    count = s.partitions[h].size();
  }
  if (count != 1) {
    return violation(StrategyLaw::kFinalSingleOutput, num_layers,
                     "final layer must yield one output (got " + std::to_string(count) + ")");
  }
  return std::nullopt;
}

std::optional<StrategyViolation> validate_uniform(const UniformStrategySpec& spec) {
  if (spec.tau == 0) {
    return violation(StrategyLaw::kTauPositive, 0, "tau must be at least 1");
  }
  if (spec.num_layers == 0) {
    return violation(StrategyLaw::kLayerCount, 0, "model must have at least one layer");
  }
  std::size_t previous = 0;
  std::size_t count = spec.tau;
  for (const auto& step : spec.steps) {
    if (step.layer <= previous || step.layer > spec.num_layers) {
      return violation(StrategyLaw::kLayerIndexOrder, step.layer,
                       "aggregation layers must be strictly increasing within 1.." +
                           std::to_string(spec.num_layers) + at_layer(step.layer));
    }
    previous = step.layer;
    if (step.group_size == 0 || count % step.group_size != 0) {
      return violation(StrategyLaw::kGroupSizeDivides, step.layer,
                       "group size " + std::to_string(step.group_size) + " does not divide " +
                           std::to_string(count) + at_layer(step.layer));
    }
    count /= step.group_size;
  }
  if (count != 1) {
    return violation(StrategyLaw::kFinalSingleOutput, spec.num_layers,
                     "final layer must yield one output (got " + std::to_string(count) + ")");
  }
  return std::nullopt;
}

Strategy build_uniform(const UniformStrategySpec& spec) {
  if (auto v = validate_uniform(spec)) {
    throw std::invalid_argument(v->message);
  }
  Strategy s;
  s.tau = spec.tau;
  s.partitions.resize(spec.num_layers);
  std::size_t count = spec.tau;
  auto step = spec.steps.begin();
  for (std::size_t h = 1; h <= spec.num_layers; ++h) {
    const std::size_t g = (step != spec.steps.end() && step->layer == h) ? (step++)->group_size : 1;
    Partition& p = s.partitions[h - 1];
    p.resize(count / g);
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t k = 0; k < g; ++k) {
        p[i].push_back(i * g + k);
      }
    }
    count = p.size();
  }
  return s;
}

Strategy multi_tta_uniform(std::span<const std::size_t> group_sizes,
                           std::span<const std::size_t> layer_indices, std::size_t num_layers) {
  if (group_sizes.size() != layer_indices.size()) {
    throw std::invalid_argument("multi_tta_uniform: one group size per aggregation layer");
  }
  UniformStrategySpec spec;
  spec.num_layers = num_layers;
  spec.tau = 1;
  for (std::size_t i = 0; i < group_sizes.size(); ++i) {
    spec.tau *= group_sizes[i];
    spec.steps.push_back({layer_indices[i], group_sizes[i]});
  }
  return build_uniform(spec);
}

Strategy conventional_tta(std::size_t tau, std::size_t num_layers) {
  const std::size_t sizes[] = {tau};
  const std::size_t layers[] = {num_layers};
  return multi_tta_uniform(sizes, layers, num_layers);
}

Strategy mid_tta(std::size_t tau, std::size_t h_prime, std::size_t num_layers) {
  if (h_prime < 1 || h_prime >= num_layers) {
    throw std::invalid_argument("mid_tta: require 1 <= h' < H");
  }
  const std::size_t sizes[] = {tau};
  const std::size_t layers[] = {h_prime + 1};
  return multi_tta_uniform(sizes, layers, num_layers);
}

// --- Execution ---------------------------------------------------------------------------

TtaOutput execute(const LayeredModel& model, const Strategy& s, std::span<const Vector> inputs) {
  if (auto v = validate_strategy(s, model.num_layers())) {
    throw std::invalid_argument("invalid strategy: " + v->message);
  }
  if (inputs.size() != s.tau) {
    throw std::invalid_argument("execute: strategy expects " + std::to_string(s.tau) +
                                " inputs, got " + std::to_string(inputs.size()));
  }
  std::vector<Vector> live(inputs.begin(), inputs.end());
  TtaOutput out;
  for (std::size_t h = 0; h < s.partitions.size(); ++h) {
    std::vector<Vector> mapped(live.size());
    for (std::size_t j = 0; j < live.size(); ++j) {
      mapped[j] = model.apply(h, live[j]);
      if (mapped[j].size() != mapped.front().size()) {
        throw std::invalid_argument("dimension mismatch: layer " + model.layer(h).name +
                                    " produced outputs of different sizes");
      }
    }
    const Partition& partition = s.partitions[h];
    std::vector<Vector> next(partition.size());
    for (std::size_t i = 0; i < partition.size(); ++i) {
      std::vector<std::size_t> group = partition[i];
      std::sort(group.begin(), group.end());
      Vector acc = mapped[group.front()];
      for (std::size_t k = 1; k < group.size(); ++k) {
        const Vector& term = mapped[group[k]];
        for (std::size_t d = 0; d < acc.size(); ++d) {
          acc[d] += term[d];
        }
      }
      const auto n = static_cast<double>(group.size());
      for (double& a : acc) {
        a /= n;
      }
      next[i] = std::move(acc);
    }
    live = std::move(next);
    out.intermediate_counts.push_back(live.size());
  }
  out.prediction = std::move(live.front());
  return out;
}

TtaOutput stabilized_predict(const LayeredModel& model, const Strategy& s,
                             std::span<const double> clean, std::span<const Vector> views) {
  TtaOutput out = execute(model, s, views);
  const Vector plain = model.forward(clean);
  if (plain.size() != out.prediction.size()) {
    throw std::invalid_argument("dimension mismatch between clean and augmented predictions");
  }
  for (std::size_t d = 0; d < plain.size(); ++d) {
    out.prediction[d] = 0.5 * plain[d] + 0.5 * out.prediction[d];
  }
  out.stabilized = true;
  return out;
}

std::vector<MelSpectrogram> augment_inputs(const Waveform& x, std::size_t tau,
                                           const AudioAugmentSpecs& test_specs,
                                           const MelParams& params, std::uint64_t seed) {
  if (tau == 0) {
    throw std::invalid_argument("augment_inputs: tau must be >= 1");
  }
  const Waveform clip = resample(x, params.sample_rate);
  std::vector<MelSpectrogram> views;
  views.reserve(tau);
  for (std::size_t j = 0; j < tau; ++j) {
    const std::uint64_t view_seed = mix_seed({seed, j});
    Waveform w = add_gaussian_noise(clip, test_specs.noise, mix_seed({view_seed, 0})).value;
    w = apply_reverb(w, test_specs.reverb, mix_seed({view_seed, 1})).value;
    views.push_back(
        spec_augment(mel_transform(w, params), test_specs.specaug, mix_seed({view_seed, 2})));
  }
  return views;
}

Vector to_vector(const MelSpectrogram& s) { return Vector(s.data.begin(), s.data.end()); }

// --- JSON --------------------------------------------------------------------------------

StrategyDocument parse_strategy_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw StrategyParseError(std::string("malformed strategy JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("tau")) {
      throw StrategyParseError("strategy JSON must be an object with \"tau\"");
    }
    StrategyDocument doc;
    const auto tau = j.at("tau").get<std::size_t>();
    if (j.contains("layers")) {
      UniformStrategySpec spec;
      spec.tau = tau;
      for (const auto& step : j.at("layers")) {
        spec.steps.push_back(
            {step.at("index").get<std::size_t>(), step.at("group_size").get<std::size_t>()});
      }
      std::size_t highest = 0;
      for (const auto& step : spec.steps) {
        highest = std::max(highest, step.layer);
      }
      spec.num_layers = j.value("num_layers", highest);
      doc.num_layers = spec.num_layers;
      doc.uniform = std::move(spec);
    } else if (j.contains("partitions")) {
      Strategy s;
      s.tau = tau;
      s.partitions = j.at("partitions").get<std::vector<Partition>>();
      doc.num_layers = j.value("num_layers", s.partitions.size());
      doc.partitions = std::move(s);
    } else {
      throw StrategyParseError("strategy JSON needs \"layers\" or \"partitions\"");
    }
    return doc;
  } catch (const json::exception& e) {
    throw StrategyParseError(std::string("bad strategy schema: ") + e.what());
  }
}

std::optional<StrategyViolation> validate(const StrategyDocument& doc) {
  if (doc.uniform) {
    if (auto v = validate_uniform(*doc.uniform)) {
      return v;
    }
    return validate_strategy(build_uniform(*doc.uniform), doc.num_layers);
  }
  if (doc.partitions) {
    return validate_strategy(*doc.partitions, doc.num_layers);
  }
  return violation(StrategyLaw::kLayerCount, 0, "empty strategy document");
}

Strategy to_strategy(const StrategyDocument& doc) {
  if (auto v = validate(doc)) {
    throw std::invalid_argument(v->message);
  }
  return doc.uniform ? build_uniform(*doc.uniform) : *doc.partitions;
}

std::string to_json(const Strategy& s) {
  json j;
  j["tau"] = s.tau;
  j["num_layers"] = s.partitions.size();
  j["partitions"] = s.partitions;
  return j.dump();
}

std::string to_json(const UniformStrategySpec& spec) {
  json j;
  j["tau"] = spec.tau;
  j["num_layers"] = spec.num_layers;
  j["layers"] = json::array();
  for (const auto& step : spec.steps) {
    j["layers"].push_back({{"index", step.layer}, {"group_size", step.group_size}});
  }
  return j.dump();
}

}  // namespace pairmix
