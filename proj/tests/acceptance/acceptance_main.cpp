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

// Acceptance runner: one PASS/FAIL line per criterion, each with its own
// wall-clock limit. Exit status is 0 only when all criteria pass.
//
//   acceptance [work_dir]
//
// Artifacts (variance CSV, determinism runs) go under work_dir, default
// ./acceptance_out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pairmix/augment.hpp"
#include "pairmix/fileio.hpp"
#include "pairmix/pairmix.hpp"
#include "pairmix/pipeline.hpp"
#include "pairmix/rng.hpp"
#include "pairmix/signal.hpp"
#include "pairmix/toy_model.hpp"
#include "pairmix/tta.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace pairmix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool bit_equal(const MelSpectrogram& a, const MelSpectrogram& b) {
  return a.n_frames == b.n_frames && a.n_mels == b.n_mels && a.data.size() == b.data.size() &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

Waveform wave(std::vector<float> samples, int rate = 32000) {
  return Waveform{std::move(samples), rate};
}

oracle::MelSetup setup_of(const MelParams& p) {
  return {p.sample_rate, p.fft_size, p.hop_size, p.window_size,
          p.n_mels,      p.f_min,    p.f_max,    p.log_floor};
}

AudioAugmentSpecs test_time_specs() {
  return halve_for_test_time(PipelineConfig{}.audio_specs());
}

// ---- 1 ----

Outcome mix_exactness() {
  const MelParams p;
  const std::vector<SourcePair> src = {{"a", wave(oracle::sine(440.0, 0.5, 32000)), "a dog barks"},
                                       {"b", wave(oracle::sine(3000.0, 0.5, 32000, 0.3)), "rain"}};
  const MelSpectrogram mel[] = {mel_transform(src[0].audio, p), mel_transform(src[1].audio, p)};

  int one_hot_ok = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    MixWeights w{{0.0, 0.0}};
    w.lambdas[i] = 1.0;
    for (int gamma : {0, 1}) {
      one_hot_ok += bit_equal(pairmix::pairmix(src, w, gamma, p).mel, mel[i]) ? 1 : 0;
    }
  }

  const MixWeights w{{0.3, 0.7}};
  const std::vector<Waveform> audio = {src[0].audio, src[1].audio};
  const auto s_w = waveform_level_mix(audio, w, p);
  const auto s_m = spectrogram_level_mix(audio, w, p);
  const bool sel1 = bit_equal(pairmix::pairmix(src, w, 1, p).mel, s_w);
  const bool sel0 = bit_equal(pairmix::pairmix(src, w, 0, p).mel, s_m);

  // Both paths rebuilt by hand from their definitions.
  std::vector<float> mixed(src[0].audio.samples.size());
  for (std::size_t t = 0; t < mixed.size(); ++t) {
    mixed[t] = static_cast<float>(0.3 * src[0].audio.samples[t] + 0.7 * src[1].audio.samples[t]);
  }
  const auto direct_w = mel_transform(wave(mixed), p);
  double gap_w = 0.0;
  double gap_m = 0.0;
  for (std::size_t c = 0; c < s_m.data.size(); ++c) {
    gap_w = std::max(gap_w, std::abs(static_cast<double>(direct_w.data[c]) - s_w.data[c]));
    const double hand = 0.3 * mel[0].data[c] + 0.7 * mel[1].data[c];
    gap_m = std::max(gap_m, std::abs(hand - s_m.data[c]));
  }

  Outcome o;
  o.pass = one_hot_ok == 4 && sel0 && sel1 && gap_w <= 1e-5 && gap_m <= 1e-5;
  o.detail = "one-hot bit-equal " + std::to_string(one_hot_ok) + "/4, gamma=1 selects s_w " +
             (sel1 ? "exactly" : "NOT exactly") + ", gamma=0 selects s_m " +
             (sel0 ? "exactly" : "NOT exactly") + ", hand-built paths within " +
             fmt("%.2g", std::max(gap_w, gap_m));
  return o;
}

// ---- 2 ----

Outcome level_divergence() {
  const MelParams p;
  const auto a = oracle::sine(300.0, 0.5, 32000);
  const auto b = oracle::sine(6000.0, 0.5, 32000);
  std::vector<float> mixed(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    mixed[t] = static_cast<float>(0.5 * a[t] + 0.5 * b[t]);
  }
  const auto setup = setup_of(p);
  const auto ref_w = oracle::log_mel(mixed, setup);
  const auto la = oracle::log_mel(a, setup);
  const auto lb = oracle::log_mel(b, setup);
  double gap = 0.0;
  for (std::size_t f = 0; f < ref_w.size(); ++f) {
    for (std::size_t m = 0; m < ref_w[f].size(); ++m) {
      gap = std::max(gap, std::abs(ref_w[f][m] - (0.5 * la[f][m] + 0.5 * lb[f][m])));
    }
  }

  const MixWeights w{{0.5, 0.5}};
  const std::vector<Waveform> src = {wave(a), wave(b)};
  const auto s_w = waveform_level_mix(src, w, p);
  const auto s_m = spectrogram_level_mix(src, w, p);
  double lib_gap = 0.0;
  for (std::size_t c = 0; c < s_w.data.size(); ++c) {
    lib_gap = std::max(lib_gap, std::abs(static_cast<double>(s_w.data[c]) - s_m.data[c]));
  }
  return {gap > 0.1 && lib_gap > 0.1,
          "max cell gap s_w vs s_m: brute force " + fmt("%.4g", gap) + ", library " +
              fmt("%.4g", lib_gap) + " (need > 0.1)"};
}

// ---- 3 ----

Outcome mel_oracle() {
  struct Case {
    MelParams params;
    std::uint32_t seed;
  };
  MelParams small;
  small.sample_rate = 16000;
  small.fft_size = 512;
  small.window_size = 400;
  small.hop_size = 160;
  small.n_mels = 40;
  small.f_min = 0.0;
  small.f_max = 8000.0;
  std::vector<Case> cases;
  for (std::uint32_t s = 1; s <= 5; ++s) cases.push_back({MelParams{}, s});
  for (std::uint32_t s = 6; s <= 7; ++s) cases.push_back({small, s});

  double worst_power = 0.0;  // |P/P_ref - 1| per cell
  double worst_log = 0.0;    // |L - L_ref| / |L_ref| per cell
  std::size_t cells = 0;
  for (const auto& c : cases) {
    std::mt19937 gen(c.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto n = static_cast<std::size_t>(0.5 * c.params.sample_rate);
    std::vector<float> x(n);
    const double noise = 0.05 + 0.3 * u(gen);
    const double f1 = 100.0 + 4000.0 * u(gen);
    const double f2 = 100.0 + 4000.0 * u(gen);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double tt = static_cast<double>(t) / c.params.sample_rate;
      x[t] = static_cast<float>(std::clamp(noise * nd(gen) + 0.3 * std::sin(6.283185307179586 * f1 * tt) +
                                               0.2 * std::sin(6.283185307179586 * f2 * tt),
                                           -1.0, 1.0));
    }
    const auto got = mel_transform(wave(x, c.params.sample_rate), c.params);
    const auto ref = oracle::log_mel(x, setup_of(c.params));
    if (ref.size() != got.n_frames || ref.front().size() != got.n_mels) {
      return {false, "frame/mel count mismatch against oracle"};
    }
    for (std::size_t f = 0; f < got.n_frames; ++f) {
      for (std::size_t m = 0; m < got.n_mels; ++m) {
        const double l = got.data[f * got.n_mels + m];
        const double r = ref[f][m];
        worst_power = std::max(worst_power, std::abs(std::expm1(l - r)));
        worst_log = std::max(worst_log, std::abs(l - r) / std::abs(r));
        ++cells;
      }
    }
  }
  return {worst_power < 1e-4 && worst_log < 1e-4,
          std::to_string(cases.size()) + " inputs, " + std::to_string(cells) +
              " cells; max relative error " + fmt("%.3g", worst_power) + " on mel power, " +
              fmt("%.3g", worst_log) + " on log-mel (need < 1e-4)"};
}

// ---- 4 ----

Outcome sampler_statistics() {
  constexpr std::size_t kDraws = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < kDraws; ++i) {
    const double l = sample_lambda(LambdaMode::kBeta, 2, mix_seed({4, i}), 0.1).lambdas[0];
    sum += l;
    sum_sq += l * l;
  }
  const double mean = sum / kDraws;
  const double var = (sum_sq - kDraws * mean * mean) / (kDraws - 1);

  constexpr std::size_t kCoins = 10000;
  std::size_t ones = 0;
  for (std::size_t i = 0; i < kCoins; ++i) {
    ones += static_cast<std::size_t>(sample_gamma(0.5, mix_seed({44, i})));
  }
  const double gmean = static_cast<double>(ones) / kCoins;
  const bool ok = mean >= 0.48 && mean <= 0.52 && var >= 0.193 && var <= 0.223 && gmean >= 0.48 &&
                  gmean <= 0.52;
  return {ok, "Beta(0.1,0.1) mean " + fmt("%.4f", mean) + " in [0.48,0.52], variance " +
                  fmt("%.4f", var) + " in [0.193,0.223] (analytic " +
                  fmt("%.4f", oracle::beta_variance(0.1, 0.1)) + "), gamma mean " +
                  fmt("%.4f", gmean) + " in [0.48,0.52]"};
}

// ---- 5 ----

Outcome batch_composition() {
  const double ks[] = {0.125, 0.25, 0.5, 0.6};
  const std::size_t expected[] = {4, 8, 16, 19};
  std::string counts;
  bool counts_ok = true;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t g = generated_count(32, ks[i]);
    counts_ok = counts_ok && g == expected[i];
    counts += (i ? "," : "") + std::to_string(g);
  }

  std::vector<std::string> pool;
  for (int i = 0; i < 500; ++i) pool.push_back("clip" + std::to_string(i));
  std::size_t violations = 0;
  std::size_t pairs = 0;
  for (std::uint64_t b = 0; b < 1000; ++b) {
    std::mt19937_64 gen(b);
    std::vector<std::string> shuffled = pool;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const std::vector<std::string> batch(shuffled.begin(), shuffled.begin() + 32);
    const std::set<std::string> in_batch(batch.begin(), batch.end());
    PairMixConfig cfg;
    cfg.k_ratio = ks[b % 4];
    const auto plans = plan_batch(batch, pool, cfg, 2026, b);
    if (plans.size() != expected[b % 4]) ++violations;
    for (const auto& plan : plans) {
      ++pairs;
      std::set<std::size_t> distinct(plan.pool_indices.begin(), plan.pool_indices.end());
      bool bad = distinct.size() != plan.pool_indices.size() || plan.exclusion_relaxed;
      for (std::size_t idx : plan.pool_indices) {
        bad = bad || idx >= pool.size() || in_batch.count(pool[idx]) != 0;
      }
      violations += bad ? 1 : 0;
    }
  }
  return {counts_ok && violations == 0,
          "B=32 counts {" + counts + "} (need {4,8,16,19}); " + std::to_string(pairs) +
              " pairs over 1000 batches, " + std::to_string(violations) + " exclusion violations"};
}

// ---- 6 ----

Outcome strategy_validation() {
  using Spec = UniformStrategySpec;
  const auto spec = [](std::size_t tau, std::size_t a, std::size_t b) {
    return Spec{tau, 2, {{1, a}, {2, b}}};
  };
  const std::size_t standard[][3] = {{10, 2, 5}, {25, 5, 5}, {50, 5, 10}, {100, 5, 20}};
  bool standard_ok = true;
  for (const auto& t : standard) {
    standard_ok = standard_ok && t[0] == t[1] * t[2] && !validate_uniform(spec(t[0], t[1], t[2]));
  }

  // Acceptance must coincide with tau = product of group sizes.
  std::size_t mismatches = 0;
  std::size_t checked = 0;
  for (std::size_t tau : {10, 25, 50, 100}) {
    for (std::size_t a = 1; a <= tau; ++a) {
      for (std::size_t b = 1; b <= tau; ++b) {
        const bool accepted = !validate_uniform(spec(tau, a, b));
        mismatches += accepted != (a * b == tau) ? 1 : 0;
        ++checked;
      }
    }
  }

  const auto bad = validate_uniform(spec(10, 3, 5));
  const bool rejects_3x5 =
      bad && bad->message.find("group size 3 does not divide 10") != std::string::npos;

  // Explicit final partitions with 0, 2, 3, ..., 10 groups.
  std::size_t final_rejected = 0;
  std::size_t final_cases = 0;
  for (std::size_t k = 2; k <= 10; ++k) {
    Strategy s = conventional_tta(10, 2);
    Partition last(k);
    for (std::size_t j = 0; j < 10; ++j) last[j % k].push_back(j);
    s.partitions[1] = last;
    const auto v = validate_strategy(s, 2);
    ++final_cases;
    final_rejected += v && v->law == StrategyLaw::kFinalSingleOutput &&
                              v->message.find("final layer must yield one output") != std::string::npos
                          ? 1
                          : 0;
  }
  {
    Strategy s = conventional_tta(10, 2);
    s.partitions[1].clear();
    ++final_cases;
    final_rejected += validate_strategy(s, 2) ? 1 : 0;
  }

  return {standard_ok && mismatches == 0 && rejects_3x5 && final_rejected == final_cases,
          std::string("standard tuples ") + (standard_ok ? "accepted" : "NOT all accepted") + "; " +
              std::to_string(checked) + " (tau,a,b) grid points, " + std::to_string(mismatches) +
              " disagree with tau=a*b; (10,3,5) " +
              (rejects_3x5 ? "rejected: " + bad->message : std::string("NOT rejected as expected")) +
              "; |P_H|!=1 rejected " + std::to_string(final_rejected) + "/" +
              std::to_string(final_cases)};
}

// ---- 7 ----

Outcome tta_reductions() {
  const LayeredModel deep = oracle::mlp({12, 16, 8, 5}, true, 3);
  const ToyModel toy = build_toy_model(21);
  const Waveform clip = synthetic_clips(1, 0.5, 32000, 5)[0];
  const MelParams p;

  double worst_conv = 0.0;
  double worst_mid = 0.0;
  for (std::size_t tau : {1, 4, 10}) {
    const auto inputs = oracle::random_inputs(tau, 12, static_cast<std::uint32_t>(100 + tau), 2.0);
    worst_conv = std::max(worst_conv, oracle::max_abs_diff(execute(deep, conventional_tta(tau, 3), inputs).prediction,
                                                           oracle::mean_of_forward_passes(deep, inputs)));
    for (std::size_t h : {1, 2}) {
      worst_mid = std::max(worst_mid, oracle::max_abs_diff(execute(deep, mid_tta(tau, h, 3), inputs).prediction,
                                                           oracle::mid_by_definition(deep, h, inputs)));
    }
    std::vector<Vector> views;
    for (const auto& m : augment_inputs(clip, tau, test_time_specs(), p, 9 + tau)) {
      views.push_back(to_vector(m));
    }
    worst_conv = std::max(worst_conv, oracle::max_abs_diff(execute(toy.layered(), conventional_tta(tau, 2), views).prediction,
                                                           oracle::mean_of_forward_passes(toy.layered(), views)));
    worst_mid = std::max(worst_mid, oracle::max_abs_diff(execute(toy.layered(), mid_tta(tau, 1, 2), views).prediction,
                                                         oracle::mid_by_definition(toy.layered(), 1, views)));
  }
  return {worst_conv <= 1e-6 && worst_mid <= 1e-6,
          "tau in {1,4,10}: conventional vs mean of forward passes " + fmt("%.3g", worst_conv) +
              ", mid vs direct definition " + fmt("%.3g", worst_mid) + " (need <= 1e-6)"};
}

// ---- 8 ----

Outcome affine_invariance() {
  const MelParams p;
  const Waveform clip = synthetic_clips(1, 0.5, 32000, 8)[0];
  const std::size_t taus[] = {10, 25, 50, 100};
  const auto strategies = standard_strategies(taus);
  const ToyModel affine = build_toy_model(13, 32, 10, true);
  const ToyModel nonlinear = build_toy_model(13, 32, 10, false);

  double worst = 0.0;
  std::size_t compared = 0;
  double nonlinear_gap = 0.0;
  for (std::size_t tau : taus) {
    std::vector<Vector> views;
    for (const auto& m : augment_inputs(clip, tau, test_time_specs(), p, mix_seed({8, tau}))) {
      views.push_back(to_vector(m));
    }
    const Vector conv = execute(affine.layered(), conventional_tta(tau, 2), views).prediction;
    for (const auto& s : strategies) {
      if (s.strategy.tau != tau) continue;
      worst = std::max(worst, oracle::max_abs_diff(execute(affine.layered(), s.strategy, views).prediction, conv));
      ++compared;
    }
    if (tau == 10) {
      const std::size_t sizes[] = {2, 5};
      const std::size_t layers[] = {1, 2};
      nonlinear_gap = oracle::max_abs_diff(
          execute(nonlinear.layered(), conventional_tta(10, 2), views).prediction,
          execute(nonlinear.layered(), multi_tta_uniform(sizes, layers, 2), views).prediction);
    }
  }
  return {compared == 8 && worst <= 1e-5 && nonlinear_gap > 1e-6,
          "affine: " + std::to_string(compared) + " strategy predictions, max spread " +
              fmt("%.3g", worst) + " (need <= 1e-5); nonlinear tau=10 conventional vs 2x5 " +
              fmt("%.3g", nonlinear_gap) + " (need > 1e-6)"};
}

// ---- 9 ----

Outcome test_time_halving() {
  std::vector<AudioAugmentSpecs> trains = {PipelineConfig{}.audio_specs()};
  AudioAugmentSpecs other;
  other.noise = {10.0, 30.0, 0.9};
  other.reverb = {0.8, 0.4, 0.3};
  other.specaug = {3, 40, 1, 16, -5.0F};
  trains.push_back(other);
  bool exact = true;
  for (const auto& t : trains) {
    const AudioAugmentSpecs h = halve_for_test_time(t);
    exact = exact && 2 * h.specaug.max_time_width == t.specaug.max_time_width &&
            2 * h.specaug.max_freq_width == t.specaug.max_freq_width &&
            h.reverb.decay_seconds == 0.5 * t.reverb.decay_seconds &&
            h.noise.probability == 0.5 * t.noise.probability &&
            h.reverb.probability == 0.5 * t.reverb.probability &&
            h.specaug.n_time_masks == t.specaug.n_time_masks &&
            h.noise.snr_db_low == t.noise.snr_db_low && h.reverb.wet_mix == t.reverb.wet_mix;
  }

  const MelParams p;
  const Waveform clip = synthetic_clips(1, 0.5, 32000, 9)[0];
  const Vector clean = to_vector(mel_transform(clip, p));
  std::vector<Vector> views;
  for (const auto& m : augment_inputs(clip, 10, no_augmentation(), p, 99)) {
    views.push_back(to_vector(m));
  }
  const ToyModel model = build_toy_model(31);
  const Vector plain = model.forward(clean);
  const std::size_t sizes[] = {2, 5};
  const std::size_t layers[] = {1, 2};
  double worst = 0.0;
  for (const Strategy& s : {conventional_tta(10, 2), multi_tta_uniform(sizes, layers, 2)}) {
    worst = std::max(worst, oracle::max_abs_diff(stabilized_predict(model.layered(), s, clean, views).prediction, plain));
  }
  return {exact && worst <= 1e-12,
          std::string("mask widths, reverb decay and probabilities ") +
              (exact ? "exactly halved" : "NOT exactly halved") +
              "; stabilized vs f(clean) on clean views " + fmt("%.3g", worst)};
}

// ---- 10 ----

Outcome variance_trend(const fs::path& work) {
  PipelineConfig cfg;
  cfg.seed = 2026;
  cfg.tta.taus = {10, 100};
  cfg.tta.repeats = 100;
  const std::size_t taus[] = {10, 100};
  const auto strategies = standard_strategies(taus);
  const auto rows = run_tta_sim(cfg, strategies);
  const fs::path csv = work / "variance_trend.csv";
  write_file_atomic(csv, to_csv(rows));

  double v10 = -1.0;
  double v100 = -1.0;
  for (const auto& r : rows) {
    if (r.strategy == "conventional") (r.tau == 10 ? v10 : v100) = r.variance_trace;
  }
  const bool written = fs::exists(csv) && fs::file_size(csv) > 0;
  return {written && v10 >= 0.0 && v100 >= 0.0 && v100 <= v10,
          "conventional variance trace tau=10 " + fmt("%.4g", v10) + ", tau=100 " +
              fmt("%.4g", v100) + " over 100 repeats; report " + csv.string()};
}

// ---- 11 ----

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), dir).string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

void augment_once(const fs::path& manifest, const fs::path& out) {
#ifdef PAIRMIX_CLI_PATH
  const std::string cmd = std::string("\"") + PAIRMIX_CLI_PATH + "\" augment --manifest \"" +
                          manifest.string() + "\" --out \"" + out.string() +
                          "\" --seed 7 > /dev/null 2>&1";
  if (std::system(cmd.c_str()) != 0) {
    throw std::runtime_error("pairmix augment exited with an error");
  }
#else
  PipelineConfig cfg;
  cfg.seed = 7;
  run_augment(load_manifest(manifest), manifest.parent_path(), cfg, {}, out);
#endif
}

Outcome end_to_end_determinism(const fs::path& work) {
  const fs::path root = work / "determinism";
  fs::remove_all(root);
  const fs::path manifest = write_synthetic_dataset(root / "data", 32, 10.0, 32000, 11);
  augment_once(manifest, root / "run1");
  augment_once(manifest, root / "run2");
  const auto a = snapshot(root / "run1");
  const auto b = snapshot(root / "run2");
  std::size_t mels = 0;
  std::size_t lines = 0;
  for (const auto& [name, bytes] : a) {
    if (name.size() > 4 && name.compare(name.size() - 4, 4, ".mel") == 0) ++mels;
    if (name == "samples.jsonl") lines = static_cast<std::size_t>(std::count(bytes.begin(), bytes.end(), '\n'));
  }
  const bool identical = !a.empty() && a == b;
  const char* how =
#ifdef PAIRMIX_CLI_PATH
      "pairmix augment";
#else
      "run_augment";
#endif
  return {identical && lines == 40 && mels == 40,
          std::string(how) + " x2 on 32 synthetic 10 s clips: " + std::to_string(lines) +
              " JSONL lines, " + std::to_string(mels) + " mel files, " +
              (identical ? "byte-identical" : "DIFFERENT")};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(work);

  const std::vector<Criterion> criteria = {
      {1, "mix exactness", 1.0, mix_exactness},
      {2, "mixup-level divergence", 1.0, level_divergence},
      {3, "mel oracle", 30.0, mel_oracle},
      {4, "sampler statistics", 5.0, sampler_statistics},
      {5, "batch composition", 10.0, batch_composition},
      {6, "strategy validation", 1.0, strategy_validation},
      {7, "multi-TTA reductions", 5.0, tta_reductions},
      {8, "affine strategy invariance", 10.0, affine_invariance},
      {9, "test-time halving", 1.0, test_time_halving},
      {10, "variance trend", 120.0, [&] { return variance_trend(work); }},
      {11, "end-to-end determinism", 60.0, [&] { return end_to_end_determinism(work); }},
  };

  int passed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool ok = o.pass && in_time;
    passed += ok ? 1 : 0;
    std::printf("%s %2d %-28s %s [%.2f s, limit %.0f s%s]\n", ok ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit_s, in_time ? "" : ", TOO SLOW");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
