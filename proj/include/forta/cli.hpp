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

// Subcommands behind the `forta` executable. Each returns the process exit
// status and reports failures as one line on `err`.
//
//   run         one experiment per configured rule; runlog.csv, scores.csv,
//               profile.csv, config.ini and accuracy.svg in the output dir
//   codec-fuzz  Monte-Carlo decoder characterization -> codec_fuzz.csv
//   bounds      resilience bounds from configured or estimated statistics
//               -> bounds.txt, bounds.csv
//
// A run that fails after creating its output directory renames it to
// "<dir>.incomplete".

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "forta/config.hpp"
#include "forta/reports.hpp"

namespace forta::cli {

enum ExitStatus : int { kOk = 0, kFailure = 1, kBadConfig = 2 };

struct FuzzOptions {
  std::size_t n = 30;
  std::size_t k = 10;
  std::size_t trials = 1000;
  std::vector<std::size_t> error_counts{10};
  double mag_min = 0.1;
  double mag_max = 10.0;
  std::size_t mag_bins = 1;  // equal-width magnitude bins over [mag_min, mag_max]
  std::uint64_t seed = 1;
};

// One row per (error count, magnitude bin). Each trial encodes a random
// CN(0, 1) message, adds errors of uniform magnitude within the bin and
// uniform phase at distinct random positions, and counts a success when
// the decode is reliable, finds exactly the planted positions and recovers
// the message to 1e-5 relative error. `magnitude` is the bin midpoint.
std::vector<reports::FuzzRow> codec_fuzz(const FuzzOptions& options);

// Runs every configured rule and returns their logs in rule order.
std::vector<fl::RunLog> run_all_rules(const config::RunConfig& config, std::ostream& progress);

reports::BoundsReport compute_bounds(const config::RunConfig& config);

int cmd_run(const std::filesystem::path& config_path,
            const std::optional<std::filesystem::path>& out_dir, std::ostream& out,
            std::ostream& err);
int cmd_codec_fuzz(const FuzzOptions& options, const std::filesystem::path& out_dir,
                   std::ostream& out, std::ostream& err);
int cmd_bounds(const std::filesystem::path& config_path,
               const std::optional<std::filesystem::path>& out_dir, std::ostream& out,
               std::ostream& err);

}  // namespace forta::cli
