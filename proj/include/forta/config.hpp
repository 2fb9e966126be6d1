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

// INI run configuration. Sections and keys (defaults in brackets):
//
//   [protocol] N [30], T [9], A [10], m [8],
//              rules [fedavg, krum, modified_krum], step_form [mean],
//              temperature [0.1], hint_floor [0.05], seed [1]
//   [codec]    privacy_sigma [1], injected_precision_sigma [1e-7],
//              rank_tolerance [1e-4], noise_floor [1e-9],
//              root_match_tolerance [0 = pi / N]
//   [task]     source [blobs | csv], csv_path, test_fraction [0.2],
//              classes [4], features [16], samples_per_user [200],
//              test_samples [2000], spread [1], center_scale [1],
//              rounds [50], learning_rate [0.5], lr_decay [0],
//              batch_size [32], local_epochs [1]
//   [attack]   kind [none], magnitude [0], share_magnitude [0],
//              byzantine (1-based list) | byzantine_count [A when kind is
//              not none], collusion (1-based list), seed [derived]
//   [theory]   mode [estimate | manual], estimate_rounds [10],
//              surrogate_draws [200], and for manual mode: sigma_g,
//              sigma_eps, g_norm, mu_T, sigma_T, mu_Q, sigma_Q, C1
//   [output]   dir [forta_out], plot [true]
//
// Parsing is strict: unknown sections or keys, malformed values and
// violated constraints throw InvalidConfiguration naming section.key.

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "forta/fl_harness.hpp"
#include "forta/robust_select.hpp"
#include "forta/theory.hpp"

namespace forta::config {

struct TheorySettings {
  enum class Mode { kEstimate, kManual };
  Mode mode = Mode::kEstimate;
  std::size_t estimate_rounds = 10;
  std::size_t surrogate_draws = 200;
  // Manual mode only.
  double sigma_g = 0.0;
  double sigma_eps = 0.0;
  double g_norm = 0.0;
  theory::FeedbackStats stats;
};

struct OutputSettings {
  std::filesystem::path dir = "forta_out";
  bool plot = true;
};

struct RunConfig {
  fl::TrainingConfig training;
  std::vector<robust::Rule> rules{robust::Rule::kFedAvg, robust::Rule::kKrum,
                                  robust::Rule::kModifiedKrum};
  TheorySettings theory;
  OutputSettings output;
};

// `seed_override` replaces protocol.seed before any derived seed (attack
// stream, Byzantine draw) is computed.
RunConfig parse_config(std::istream& in, std::optional<std::uint64_t> seed_override = {});
RunConfig load_config(const std::filesystem::path& path,
                      std::optional<std::uint64_t> seed_override = {});

// Value of FORTA_SEED (nullptr or empty: no override).
std::optional<std::uint64_t> parse_seed_override(const char* value);
std::optional<std::uint64_t> seed_override_from_env();

// Fully resolved configuration as INI text; parsing it yields the same
// configuration.
std::string echo_config(const RunConfig& config);

}  // namespace forta::config
