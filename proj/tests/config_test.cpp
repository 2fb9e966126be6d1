// Copyright 2026 The FORTA Authors.
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

#include "forta/config.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string>

namespace forta::config {
namespace {

constexpr const char* kMinimal =
    "[protocol]\n"
    "N = 30\n"
    "T = 9\n"
    "A = 10\n"
    "m = 8\n";

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const InvalidConfiguration& e) {
    return e.what();
  }
  return "";
}

TEST(Config, MinimalConfigFillsDefaults) {
  const RunConfig c = parse(kMinimal);
  EXPECT_EQ(c.training.n_users, 30u);
  EXPECT_EQ(c.training.collusion_threshold, 9u);
  EXPECT_EQ(c.training.byzantine_bound, 10u);
  EXPECT_EQ(c.training.select_m, 8u);
  EXPECT_EQ(c.training.rounds, 50u);
  EXPECT_DOUBLE_EQ(c.training.learning_rate, 0.5);
  EXPECT_EQ(c.training.batch_size, 32u);
  EXPECT_EQ(c.training.task.blobs.classes, 4u);
  EXPECT_EQ(c.training.task.blobs.features, 16u);
  EXPECT_DOUBLE_EQ(c.training.noise_floor, 1e-9);
  EXPECT_DOUBLE_EQ(c.training.rank_tolerance, 1e-4);
  EXPECT_DOUBLE_EQ(c.training.injected_precision_sigma, 1e-7);
  EXPECT_EQ(c.training.step_form, fl::StepForm::kMean);
  EXPECT_EQ(c.training.attack.kind, adversary::AttackKind::kNone);
  EXPECT_TRUE(c.training.attack.byzantine_set.empty());
  ASSERT_EQ(c.rules.size(), 3u);
  EXPECT_EQ(c.rules[0], robust::Rule::kFedAvg);
  EXPECT_EQ(c.rules[1], robust::Rule::kKrum);
  EXPECT_EQ(c.rules[2], robust::Rule::kModifiedKrum);
  EXPECT_TRUE(c.output.plot);
}

TEST(Config, EmptyFileUsesReferenceScaleDefaults) {
  const RunConfig c = parse("");
  EXPECT_EQ(c.training.n_users, 30u);
  EXPECT_EQ(c.training.byzantine_bound, 10u);
}

TEST(Config, RejectsViolatedResilienceHypothesis) {
  const std::string msg = error_of("[protocol]\nN = 20\nT = 1\nA = 10\nm = 5\n");
  EXPECT_NE(msg.find("2A + 2 < N"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyIsNamed) {
  const std::string msg = error_of(std::string(kMinimal) + "Nusers = 30\n");
  EXPECT_NE(msg.find("protocol.Nusers"), std::string::npos) << msg;
}

TEST(Config, UnknownSectionIsNamed) {
  const std::string msg = error_of("[protocl]\nN = 30\n");
  EXPECT_NE(msg.find("protocl"), std::string::npos) << msg;
}

TEST(Config, MalformedValueNamesKey) {
  const std::string msg = error_of("[task]\nlearning_rate = fast\n");
  EXPECT_NE(msg.find("task.learning_rate"), std::string::npos) << msg;
  const std::string neg = error_of("[protocol]\nN = -3\n");
  EXPECT_NE(neg.find("protocol.N"), std::string::npos) << neg;
}

TEST(Config, MalformedSyntaxIsReported) {
  EXPECT_THROW(parse("[protocol\nN = 30\n"), InvalidConfiguration);
  EXPECT_THROW(parse("[protocol]\nN = 30\nN = 31\n"), InvalidConfiguration);
}

TEST(Config, MissingFileIsReported) {
  EXPECT_THROW(load_config("/nonexistent/forta.ini"), InvalidConfiguration);
}

TEST(Config, ByzantineListIsOneBased) {
  const RunConfig c =
      parse(std::string(kMinimal) + "[attack]\nkind = scale\nmagnitude = 10\nbyzantine = 1, 5, 30\n");
  EXPECT_EQ(c.training.attack.byzantine_set, (PositionSet{0, 4, 29}));
  EXPECT_DOUBLE_EQ(c.training.attack.magnitude, 10.0);
}

TEST(Config, ByzantineListOutOfRangeIsNamed) {
  const std::string msg =
      error_of(std::string(kMinimal) + "[attack]\nkind = scale\nbyzantine = 0, 2\n");
  EXPECT_NE(msg.find("attack.byzantine"), std::string::npos) << msg;
}

TEST(Config, ByzantineCountIsDrawnFromTheSeed) {
  const std::string text =
      std::string(kMinimal) + "seed = 4\n[attack]\nkind = scale\nbyzantine_count = 6\n";
  const RunConfig a = parse(text);
  const RunConfig b = parse(text);
  EXPECT_EQ(a.training.attack.byzantine_set.size(), 6u);
  EXPECT_EQ(a.training.attack.byzantine_set, b.training.attack.byzantine_set);
  EXPECT_TRUE(std::is_sorted(a.training.attack.byzantine_set.begin(),
                             a.training.attack.byzantine_set.end()));
}

TEST(Config, AttackWithoutUsersDefaultsToA) {
  const RunConfig c = parse(std::string(kMinimal) + "[attack]\nkind = scale\nmagnitude = 10\n");
  EXPECT_EQ(c.training.attack.byzantine_set.size(), 10u);
}

TEST(Config, ListAndCountAreExclusive) {
  const std::string msg = error_of(std::string(kMinimal) +
                                   "[attack]\nkind = scale\nbyzantine = 1\nbyzantine_count = 1\n");
  EXPECT_NE(msg.find("attack.byzantine"), std::string::npos) << msg;
}

TEST(Config, RulesAndEnumsParse) {
  const RunConfig c = parse(std::string(kMinimal) +
                            "rules = modified_krum\nstep_form = sum\n[attack]\nkind = precision_mimic\n"
                            "magnitude = 0.9\n[task]\nsource = blobs\n");
  ASSERT_EQ(c.rules.size(), 1u);
  EXPECT_EQ(c.rules[0], robust::Rule::kModifiedKrum);
  EXPECT_EQ(c.training.step_form, fl::StepForm::kSum);
  EXPECT_EQ(c.training.attack.kind, adversary::AttackKind::kPrecisionMimic);
  const std::string msg = error_of(std::string(kMinimal) + "rules = median\n");
  EXPECT_NE(msg.find("protocol.rules"), std::string::npos) << msg;
}

TEST(Config, CsvSourceNeedsPath) {
  const std::string msg = error_of("[task]\nsource = csv\n");
  EXPECT_NE(msg.find("task.csv_path"), std::string::npos) << msg;
}

TEST(Config, SeedOverrideReseedsDerivedStreams) {
  const std::string text =
      std::string(kMinimal) + "seed = 4\n[attack]\nkind = scale\nbyzantine_count = 6\n";
  std::istringstream a_in(text), b_in(text);
  const RunConfig a = parse_config(a_in, std::uint64_t{99});
  const RunConfig b = parse_config(b_in);
  EXPECT_EQ(a.training.seed, 99u);
  EXPECT_EQ(b.training.seed, 4u);
  EXPECT_NE(a.training.attack.rng_seed, b.training.attack.rng_seed);
}

TEST(Config, SeedOverrideFromEnvironmentValue) {
  EXPECT_EQ(parse_seed_override(nullptr), std::nullopt);
  EXPECT_EQ(parse_seed_override(""), std::nullopt);
  EXPECT_EQ(parse_seed_override("17"), std::optional<std::uint64_t>(17));
  EXPECT_THROW(parse_seed_override("seventeen"), InvalidConfiguration);
}

TEST(Config, EchoRoundTrips) {
  const RunConfig c = parse(std::string(kMinimal) +
                            "[attack]\nkind = combined\nmagnitude = 10\nshare_magnitude = 0.5\n"
                            "byzantine = 2, 3\n[codec]\nnoise_floor = 2e-9\n[output]\nplot = false\n");
  const std::string echo = echo_config(c);
  const RunConfig again = parse(echo);
  EXPECT_EQ(echo_config(again), echo);
  EXPECT_EQ(again.training.attack.byzantine_set, (PositionSet{1, 2}));
  EXPECT_DOUBLE_EQ(again.training.noise_floor, 2e-9);
  EXPECT_FALSE(again.output.plot);
}

TEST(Config, TheoryManualModeNeedsEveryStatistic) {
  const std::string msg =
      error_of(std::string(kMinimal) + "[theory]\nmode = manual\nsigma_g = 0.01\n");
  EXPECT_NE(msg.find("theory."), std::string::npos) << msg;
  const RunConfig c = parse(std::string(kMinimal) +
                            "[theory]\nmode = manual\nsigma_g = 0.01\nsigma_eps = 0\ng_norm = 50\n"
                            "mu_T = 1.2\nsigma_T = 0.1\nmu_Q = 0.3\nsigma_Q = 0.1\nC1 = 3\n");
  EXPECT_EQ(c.theory.mode, TheorySettings::Mode::kManual);
  EXPECT_DOUBLE_EQ(c.theory.stats.c1, 3.0);
  EXPECT_DOUBLE_EQ(c.theory.g_norm, 50.0);
}

TEST(Config, TheoryEstimationNeedsTenRounds) {
  const std::string msg = error_of(std::string(kMinimal) + "[theory]\nestimate_rounds = 3\n");
  EXPECT_NE(msg.find("theory.estimate_rounds"), std::string::npos) << msg;
}

}  // namespace
}  // namespace forta::config
