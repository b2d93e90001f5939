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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "support/models.hpp"
#include "support/oracles.hpp"

namespace pairmix {
namespace {

using oracle::max_abs_diff;

Vector random_mel(std::size_t frames, std::uint32_t seed) {
  auto v = oracle::random_inputs(1, frames * 64, seed, 4.0)[0];
  for (double& x : v) x -= 10.0;  // around typical log-mel levels
  return v;
}

std::vector<Waveform> clips(std::size_t n) {
  std::vector<Waveform> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({oracle::sine(300.0 + 400.0 * static_cast<double>(i), 0.5, 32000), 32000});
  }
  return out;
}

TEST(ToyModelTest, SameSeedSameWeights) {
  const ToyModel a = build_toy_model(5);
  const ToyModel b = build_toy_model(5);
  const ToyModel c = build_toy_model(6);
  EXPECT_EQ(a.weights().encoder, b.weights().encoder);
  EXPECT_EQ(a.weights().head, b.weights().head);
  EXPECT_EQ(a.weights().encoder_bias, b.weights().encoder_bias);
  EXPECT_NE(a.weights().encoder, c.weights().encoder);
  const Vector x = random_mel(10, 1);
  EXPECT_EQ(a.forward(x), b.forward(x));
}

TEST(ToyModelTest, LayerShapes) {
  const ToyModel m = build_toy_model(1, 32, 10);
  ASSERT_EQ(m.layered().num_layers(), 2U);
  EXPECT_EQ(m.layered().layer(0).name, "encoder");
  EXPECT_EQ(m.layered().layer(1).name, "head");
  const Vector x = random_mel(7, 2);
  EXPECT_EQ(m.encode(x).size(), 32U);
  EXPECT_EQ(m.forward(x).size(), 10U);
  EXPECT_THROW(m.forward(Vector(65, 0.0)), std::invalid_argument);
  EXPECT_THROW(m.head(Vector(31, 0.0)), std::invalid_argument);
  EXPECT_THROW(build_toy_model(1, 0, 10), std::invalid_argument);
}

TEST(ToyModelTest, AffineModeSatisfiesSuperposition) {
  const ToyModel m = build_toy_model(3, 32, 10, true);
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const Vector x = random_mel(5, seed);
    const Vector y = random_mel(5, seed + 100);
    Vector xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xy[i] = x[i] + y[i];
    const Vector zero(x.size(), 0.0);
    const Vector fxy = m.forward(xy), fx = m.forward(x), fy = m.forward(y), f0 = m.forward(zero);
    for (std::size_t c = 0; c < fxy.size(); ++c) {
      ASSERT_NEAR(fxy[c] - fx[c] - fy[c] + f0[c], 0.0, 1e-6);
    }
  }
}

TEST(ToyModelTest, NonlinearModeIsNotAffine) {
  const ToyModel m = build_toy_model(3);
  const Vector x = random_mel(5, 1), y = random_mel(5, 2);
  Vector xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xy[i] = x[i] + y[i];
  const Vector f0 = m.forward(Vector(x.size(), 0.0));
  const Vector fxy = m.forward(xy), fx = m.forward(x), fy = m.forward(y);
  double gap = 0.0;
  for (std::size_t c = 0; c < fxy.size(); ++c) gap = std::max(gap, std::abs(fxy[c] - fx[c] - fy[c] + f0[c]));
  EXPECT_GT(gap, 1e-3);
}

TEST(ToyModelTest, SoftmaxHeadNormalizes) {
  const ToyModel m = build_toy_model(9);
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    const Vector p = m.forward(random_mel(3, seed));
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-6);
    for (double v : p) EXPECT_GT(v, 0.0);
  }
}

TEST(ToyModelTest, CopiesShareBehaviour) {
  const Vector x = random_mel(4, 8);
  Vector expected;
  ToyModel copy = build_toy_model(1);
  {
    const ToyModel original = build_toy_model(2);
    expected = original.forward(x);
    copy = original;
  }
  EXPECT_EQ(copy.forward(x), expected);
}

TEST(StandardStrategiesTest, LabelsAndTaus) {
  const std::size_t taus[] = {10, 25, 50, 100};
  const auto named = standard_strategies(taus);
  std::set<std::string> labels;
  std::set<std::size_t> seen_taus;
  for (const auto& n : named) {
    labels.insert(n.label);
    seen_taus.insert(n.strategy.tau);
    EXPECT_FALSE(validate_strategy(n.strategy, 2).has_value()) << n.label;
  }
  EXPECT_EQ(seen_taus, (std::set<std::size_t>{10, 25, 50, 100}));
  for (const char* l : {"conventional", "2×5", "5×5", "5×10", "5×20"}) {
    EXPECT_TRUE(labels.count(l)) << l;
  }
  EXPECT_EQ(named.size(), 8U);
}

TEST(ExperimentTest, NoopSpecsGiveZeroVariance) {
  const ToyModel m = build_toy_model(1);
  const std::size_t taus[] = {10};
  const auto named = standard_strategies(taus);
  const MelParams p;
  for (std::size_t repeats : {1U, 4U}) {
    const auto rows = tta_experiment(m, clips(2), no_augmentation(), p, named, {repeats, 3, false});
    ASSERT_EQ(rows.size(), 2U);
    for (const auto& r : rows) {
      EXPECT_EQ(r.variance_trace, 0.0);
      EXPECT_EQ(r.repeats, repeats);
      EXPECT_GT(r.mean_l2, 0.0);
    }
  }
}

TEST(ExperimentTest, AffineRowsAgreeAcrossStrategies) {
  const ToyModel m = build_toy_model(1, 32, 10, true);
  const std::size_t taus[] = {10, 25};
  const auto named = standard_strategies(taus);
  const AudioAugmentSpecs test = halve_for_test_time(AudioAugmentSpecs{});
  const auto rows = tta_experiment(m, clips(1), test, MelParams{}, named, {4, 11, false});
  ASSERT_EQ(rows.size(), 4U);
  for (const auto& a : rows) {
    for (const auto& b : rows) {
      if (a.tau != b.tau) continue;
      EXPECT_NEAR(a.mean_l2, b.mean_l2, 1e-5);
      EXPECT_NEAR(a.variance_trace, b.variance_trace, 1e-5);
    }
  }
}

TEST(ExperimentTest, NonlinearConventionalAndMultiDiffer) {
  const ToyModel m = build_toy_model(1);
  const AudioAugmentSpecs test = halve_for_test_time(AudioAugmentSpecs{});
  const auto mels = augment_inputs(clips(1)[0], 10, test, MelParams{}, 4);
  std::vector<Vector> views;
  for (const auto& mel : mels) views.push_back(to_vector(mel));
  const Vector conv = execute(m.layered(), conventional_tta(10, 2), views).prediction;
  const std::size_t sizes[] = {2, 5};
  const std::size_t layers[] = {1, 2};
  const Vector multi = execute(m.layered(), multi_tta_uniform(sizes, layers, 2), views).prediction;
  EXPECT_GT(max_abs_diff(conv, multi), 1e-6);
}

TEST(ExperimentTest, StabilizedRowsHaveLowerVariance) {
  const ToyModel m = build_toy_model(1);
  const std::size_t taus[] = {10};
  const auto named = standard_strategies(taus);
  const AudioAugmentSpecs test = halve_for_test_time(AudioAugmentSpecs{});
  const auto plain = tta_experiment(m, clips(1), test, MelParams{}, named, {8, 2, false});
  const auto stab = tta_experiment(m, clips(1), test, MelParams{}, named, {8, 2, true});
  // stabilization halves the random part, so variance drops by 4x
  for (std::size_t k = 0; k < plain.size(); ++k) {
    EXPECT_NEAR(stab[k].variance_trace, 0.25 * plain[k].variance_trace, 1e-12 + 1e-9 * plain[k].variance_trace);
  }
}

TEST(ExperimentTest, RejectsBadInputs) {
  const ToyModel m = build_toy_model(1);
  std::vector<NamedStrategy> bad = {{"broken", Strategy{4, {{{0, 1}, {2, 3}}, {{0}, {1}}}}}};
  EXPECT_THROW(tta_experiment(m, clips(1), no_augmentation(), MelParams{}, bad, {1, 0, false}),
               std::invalid_argument);
  const std::size_t taus[] = {10};
  const auto named = standard_strategies(taus);
  EXPECT_THROW(tta_experiment(m, {}, no_augmentation(), MelParams{}, named, {1, 0, false}),
               std::invalid_argument);
  EXPECT_THROW(tta_experiment(m, clips(1), no_augmentation(), MelParams{}, named, {0, 0, false}),
               std::invalid_argument);
}

TEST(CsvTest, HeaderAndRows) {
  const std::vector<ExperimentRow> rows = {{"conventional", 10, 100, 0.5, 0.25}, {"2×5", 10, 100, 1.0 / 3.0, 0.0}};
  EXPECT_EQ(to_csv(rows),
            "strategy,tau,repeat,mean_l2,variance_trace\n"
            "conventional,10,100,0.5,0.25\n"
            "2×5,10,100,0.3333333333,0\n");
}

}  // namespace
}  // namespace pairmix
