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

#include "forta/reports.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace forta::reports {
namespace {

fl::RunLog krum_log(robust::Rule rule) {
  fl::RunLog log;
  log.config.n_users = 3;
  log.config.rule = rule;
  log.initial_accuracy = 0.25;
  fl::RoundRecord r;
  r.round = 1;
  r.rule = rule;
  r.accuracy = 0.5;
  r.loss = 1.25;
  r.selected = {0, 2};
  r.krum_scores = {1.0, 2.5, 3.0};
  if (rule == robust::Rule::kModifiedKrum) {
    r.lambda = {0.25, 0.5, 0.25};
    r.modified_scores = {0.5, 2.0, 1.5};
  }
  r.profile_counts = {0, 7, 1};
  r.total_codewords = 12;
  log.rounds.push_back(r);
  r.round = 2;
  r.aborted = true;
  r.decode_failures = 3;
  r.accuracy = 0.5;
  log.rounds.push_back(r);
  return log;
}

fl::RunLog fedavg_log() {
  fl::RunLog log;
  log.config.n_users = 3;
  log.config.rule = robust::Rule::kFedAvg;
  log.initial_accuracy = 0.25;
  fl::RoundRecord r;
  r.round = 1;
  r.rule = robust::Rule::kFedAvg;
  r.accuracy = 0.75;
  r.loss = 0.5;
  r.selected = {0, 1, 2};
  log.rounds.push_back(r);
  return log;
}

TEST(RunlogCsv, OneRowPerRoundWithOneBasedSelection) {
  std::ostringstream out;
  write_runlog_csv(out, {fedavg_log(), krum_log(robust::Rule::kKrum)});
  EXPECT_EQ(out.str(),
            "round,rule,accuracy,loss,decode_failures,aborted,selected\n"
            "1,fedavg,0.75,0.5,0,0,1;2;3\n"
            "1,krum,0.5,1.25,0,0,1;3\n"
            "2,krum,0.5,1.25,3,1,1;3\n");
}

TEST(ScoresCsv, KrumFamilyRowsPerUser) {
  std::ostringstream out;
  write_scores_csv(out, {fedavg_log(), krum_log(robust::Rule::kKrum),
                         krum_log(robust::Rule::kModifiedKrum)});
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "rule,round,user,S,lambda,S_mod,selected");
  EXPECT_NE(s.find("krum,1,1,1,,,1\n"), std::string::npos) << s;
  EXPECT_NE(s.find("krum,1,2,2.5,,,0\n"), std::string::npos) << s;
  EXPECT_NE(s.find("modified_krum,1,2,2.5,0.5,2,0\n"), std::string::npos) << s;
  EXPECT_EQ(s.find("fedavg"), std::string::npos);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 2 * 2 * 3);
}

TEST(ProfileCsv, CountsPerUser) {
  std::ostringstream out;
  write_profile_csv(out, {krum_log(robust::Rule::kModifiedKrum)});
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "rule,round,user,count,total_codewords");
  EXPECT_NE(s.find("modified_krum,1,2,7,12\n"), std::string::npos) << s;
}

TEST(FuzzCsv, Format) {
  std::ostringstream out;
  write_fuzz_csv(out, {{10, 1.0, 0.995, 1.5e-12}});
  EXPECT_EQ(out.str(), "error_count,magnitude,success_rate,mean_residual\n10,1,0.995,1.5e-12\n");
}

TEST(AccuracySvg, DeterministicWithOneSeriesPerRule) {
  const std::vector<fl::RunLog> logs{fedavg_log(), krum_log(robust::Rule::kKrum)};
  std::ostringstream a, b;
  write_accuracy_svg(a, logs);
  write_accuracy_svg(b, logs);
  EXPECT_EQ(a.str(), b.str());
  const std::string s = a.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  std::size_t lines = 0;
  for (std::size_t p = s.find("<polyline"); p != std::string::npos; p = s.find("<polyline", p + 1))
    ++lines;
  EXPECT_EQ(lines, 2u);
  EXPECT_NE(s.find(">fedavg<"), std::string::npos);
  EXPECT_NE(s.find(">krum<"), std::string::npos);
  EXPECT_EQ(s.find('\r'), std::string::npos);
}

TEST(BoundsReport, TextAndCsvCarryEveryQuantity) {
  BoundsReport r;
  r.params = {30, 10, 68, 0.01, 0.0, 50.0};
  r.stats = {1.2, 0.1, 0.3, 0.1, 3.0};
  r.eta = 16.73;
  r.eta_prime = 26.0;
  r.sigma_prime = 0.01;
  r.sin_alpha = {0.055, true};
  r.sin_alpha_mod = {0.2, true};
  r.corollary = false;
  r.source = "manual";
  std::ostringstream text, csv;
  write_bounds_text(text, r);
  write_bounds_csv(csv, r);
  for (const char* key : {"eta", "eta_prime", "sigma_prime", "sin_alpha", "sin_alpha_mod",
                          "corollary", "mu_T", "C1", "g_norm", "N", "A", "d"}) {
    EXPECT_NE(text.str().find(std::string(key) + " = "), std::string::npos) << key;
    EXPECT_NE(csv.str().find(std::string("\n") + key + ","), std::string::npos) << key;
  }
  EXPECT_EQ(csv.str().substr(0, 15), "quantity,value\n");
}

}  // namespace
}  // namespace forta::reports
