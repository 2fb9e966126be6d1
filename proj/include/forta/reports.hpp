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

// CSV, SVG and text writers for run logs, fuzz results and bounds.
//
// CSVs: comma separated, header row, LF line endings, users 1-based.
// Reals use the shortest representation that round-trips, so equal
// inputs give byte-identical files.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "forta/fl_harness.hpp"
#include "forta/theory.hpp"

namespace forta::reports {

// round,rule,accuracy,loss,decode_failures,aborted,selected
void write_runlog_csv(std::ostream& out, const std::vector<fl::RunLog>& logs);

// rule,round,user,S,lambda,S_mod,selected -- Krum-family runs only;
// lambda and S_mod are empty for plain Krum.
void write_scores_csv(std::ostream& out, const std::vector<fl::RunLog>& logs);

// rule,round,user,count,total_codewords -- Krum-family runs only.
void write_profile_csv(std::ostream& out, const std::vector<fl::RunLog>& logs);

// Test accuracy against round (round 0 = initial model), one series per log.
void write_accuracy_svg(std::ostream& out, const std::vector<fl::RunLog>& logs);

struct FuzzRow {
  std::size_t error_count = 0;
  double magnitude = 0.0;
  double success_rate = 0.0;
  double mean_residual = 0.0;
};

void write_fuzz_csv(std::ostream& out, const std::vector<FuzzRow>& rows);

struct BoundsReport {
  theory::TheoryParams params;
  theory::FeedbackStats stats;
  double eta = 0.0;
  double eta_prime = 0.0;
  double sigma_prime = 0.0;
  theory::Bound sin_alpha;
  theory::Bound sin_alpha_mod;
  bool corollary = false;
  std::string source;  // "manual" or "estimated over R rounds"
};

// key = value lines.
void write_bounds_text(std::ostream& out, const BoundsReport& report);
// quantity,value
void write_bounds_csv(std::ostream& out, const BoundsReport& report);

}  // namespace forta::reports
