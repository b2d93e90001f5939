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

#include "pairmix/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "pairmix/rng.hpp"

namespace pairmix {

namespace {

constexpr std::size_t kStandardTuples[][3] = {{10, 2, 5}, {25, 5, 5}, {50, 5, 10}, {100, 5, 20}};

std::vector<double> gaussian(Rng& rng, std::size_t n, double stddev) {
  std::vector<double> v(n);
  for (double& x : v) {
    x = rng.normal() * stddev;
  }
  return v;
}

Vector encode_with(const ToyModelConfig& cfg, const ToyModel::Weights& w,
                   std::span<const double> mel) {
  const std::size_t n_mels = cfg.n_mels;
  if (mel.empty() || mel.size() % n_mels != 0) {
    throw std::invalid_argument("dimension mismatch: encoder expects a multiple of " +
                                std::to_string(n_mels) + " values, got " +
                                std::to_string(mel.size()));
  }
  const std::size_t frames = mel.size() / n_mels;
  std::vector<double> pooled(n_mels, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t m = 0; m < n_mels; ++m) {
      pooled[m] += mel[f * n_mels + m];
    }
  }
  for (double& p : pooled) {
    p = (p / static_cast<double>(frames) - cfg.input_offset) / cfg.input_scale;
  }
  Vector e(cfg.embedding_dim);
  for (std::size_t i = 0; i < e.size(); ++i) {
    double acc = w.encoder_bias[i];
    for (std::size_t m = 0; m < n_mels; ++m) {
      acc += w.encoder[i * n_mels + m] * pooled[m];
    }
    e[i] = cfg.affine ? acc : std::tanh(acc);
  }
  return e;
}

Vector head_with(const ToyModelConfig& cfg, const ToyModel::Weights& w,
                 std::span<const double> embedding) {
  const std::size_t d = cfg.embedding_dim;
  if (embedding.size() != d) {
    throw std::invalid_argument("dimension mismatch: head expects " + std::to_string(d) +
                                " values, got " + std::to_string(embedding.size()));
  }
  Vector z(cfg.num_classes);
  for (std::size_t c = 0; c < z.size(); ++c) {
    double acc = w.head_bias[c];
    for (std::size_t i = 0; i < d; ++i) {
      acc += w.head[c * d + i] * embedding[i];
    }
    z[c] = acc;
  }
  if (cfg.affine) {
    return z;
  }
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : z) {
    v /= total;
  }
  return z;
}

}  // namespace

ToyModel::ToyModel(const ToyModelConfig& config)
    : config_(std::make_shared<const ToyModelConfig>(config)) {
  if (config.n_mels == 0 || config.embedding_dim == 0 || config.num_classes == 0) {
    throw std::invalid_argument("toy model dimensions must be >= 1");
  }
  Rng rng(config.seed);
  auto w = std::make_shared<Weights>();
  w->encoder = gaussian(rng, config.embedding_dim * config.n_mels,
                        1.0 / std::sqrt(static_cast<double>(config.n_mels)));
  w->encoder_bias = gaussian(rng, config.embedding_dim, 0.1);
  w->head = gaussian(rng, config.num_classes * config.embedding_dim,
                     1.0 / std::sqrt(static_cast<double>(config.embedding_dim)));
  w->head_bias = gaussian(rng, config.num_classes, 0.1);
  weights_ = w;

  std::vector<Layer> layers;
  layers.push_back(Layer{"encoder", 0, config.embedding_dim,
                         [c = config_, w = weights_](std::span<const double> x) {
                           return encode_with(*c, *w, x);
                         }});
  layers.push_back(Layer{"head", config.embedding_dim, config.num_classes,
                         [c = config_, w = weights_](std::span<const double> x) {
                           return head_with(*c, *w, x);
                         }});
  model_ = LayeredModel(std::move(layers));
}

Vector ToyModel::encode(std::span<const double> mel) const {
  return encode_with(*config_, *weights_, mel);
}

Vector ToyModel::head(std::span<const double> embedding) const {
  return head_with(*config_, *weights_, embedding);
}

ToyModel build_toy_model(std::uint64_t seed, std::size_t embedding_dim, std::size_t num_classes,
                         bool affine, std::size_t n_mels) {
  ToyModelConfig cfg;
  cfg.seed = seed;
  cfg.embedding_dim = embedding_dim;
  cfg.num_classes = num_classes;
  cfg.affine = affine;
  cfg.n_mels = n_mels;
  return ToyModel(cfg);
}

std::string uniform_label(std::size_t encoder_group, std::size_t head_group) {
  return std::to_string(encoder_group) + "×" + std::to_string(head_group);
}

std::vector<NamedStrategy> standard_strategies(std::span<const std::size_t> taus) {
  std::vector<NamedStrategy> out;
  for (std::size_t tau : taus) {
    out.push_back({"conventional", conventional_tta(tau, 2)});
    for (const auto& t : kStandardTuples) {
      if (t[0] == tau) {
        const std::size_t sizes[] = {t[1], t[2]};
        const std::size_t layers[] = {1, 2};
        out.push_back({uniform_label(t[1], t[2]), multi_tta_uniform(sizes, layers, 2)});
      }
    }
  }
  return out;
}

std::vector<ExperimentRow> tta_experiment(const ToyModel& model, std::span<const Waveform> clips,
                                          const AudioAugmentSpecs& test_specs,
                                          const MelParams& params,
                                          std::span<const NamedStrategy> strategies,
                                          const ExperimentOptions& options) {
  if (clips.empty()) {
    throw std::invalid_argument("tta_experiment: no clips");
  }
  if (options.repeats == 0) {
    throw std::invalid_argument("tta_experiment: repeats must be >= 1");
  }
  const LayeredModel& layered = model.layered();
  for (const auto& s : strategies) {
    if (auto v = validate_strategy(s.strategy, layered.num_layers())) {
      throw std::invalid_argument("strategy " + s.label + ": " + v->message);
    }
  }

  // Strategies grouped by tau so each draw of views is shared.
  std::map<std::size_t, std::vector<std::size_t>> by_tau;
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    by_tau[strategies[k].strategy.tau].push_back(k);
  }

  const std::size_t n_clips = clips.size();
  const std::size_t repeats = options.repeats;
  // predictions[k][clip][repeat]
  std::vector<std::vector<std::vector<Vector>>> predictions(
      strategies.size(), std::vector<std::vector<Vector>>(n_clips, std::vector<Vector>(repeats)));

  for (const auto& [tau, members] : by_tau) {
    for (std::size_t i = 0; i < n_clips; ++i) {
      const Vector clean = to_vector(mel_transform(resample(clips[i], params.sample_rate), params));
      for (std::size_t r = 0; r < repeats; ++r) {
        const auto mels =
            augment_inputs(clips[i], tau, test_specs, params, mix_seed({options.seed, tau, r, i}));
        std::vector<Vector> views;
        views.reserve(mels.size());
        for (const auto& m : mels) {
          views.push_back(to_vector(m));
        }
        for (std::size_t k : members) {
          predictions[k][i][r] =
              options.stabilize ? stabilized_predict(layered, strategies[k].strategy, clean, views).prediction
                                : execute(layered, strategies[k].strategy, views).prediction;
        }
      }
    }
  }

  std::vector<ExperimentRow> rows;
  rows.reserve(strategies.size());
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    ExperimentRow row;
    row.strategy = strategies[k].label;
    row.tau = strategies[k].strategy.tau;
    row.repeats = repeats;
    for (std::size_t i = 0; i < n_clips; ++i) {
      const auto& draws = predictions[k][i];
      Vector mean(draws.front().size(), 0.0);
      for (const auto& p : draws) {
        for (std::size_t d = 0; d < mean.size(); ++d) {
          mean[d] += p[d];
        }
      }
      double norm_sq = 0.0;
      for (double& m : mean) {
        m /= static_cast<double>(repeats);
        norm_sq += m * m;
      }
      double trace = 0.0;
      if (repeats > 1) {
        for (const auto& p : draws) {
          for (std::size_t d = 0; d < mean.size(); ++d) {
            trace += (p[d] - mean[d]) * (p[d] - mean[d]);
          }
        }
        trace /= static_cast<double>(repeats - 1);
      }
      row.mean_l2 += std::sqrt(norm_sq) / static_cast<double>(n_clips);
      row.variance_trace += trace / static_cast<double>(n_clips);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string to_csv(std::span<const ExperimentRow> rows) {
  std::string out = "strategy,tau,repeat,mean_l2,variance_trace\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%zu,%zu,%.10g,%.10g\n", r.tau, r.repeats, r.mean_l2,
                  r.variance_trace);
    out += r.strategy;
    out += buf;
  }
  return out;
}

}  // namespace pairmix
