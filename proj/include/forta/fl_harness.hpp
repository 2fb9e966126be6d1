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

// Federated training loop around the secure robust-aggregation protocol.
//
// One round:
//   1. broadcast w
//   2. local updates; Byzantine users poison theirs
//   3. every owner shares its update with every holder
//   4. holders report pairwise differences (Byzantine reporters corrupt them)
//   5. the server decodes every pair's codewords        (first pass)
//   6. joint localization -> frequency profile + erasure hints
//   7. decode again with the hints                       (modified Krum only)
//   8. distances -> Krum / modified Krum scores -> selection U
//   9. holders report sums over U; the server decodes the aggregate
//  10. w <- w - eta_t * aggregate / |U|    (or * aggregate for the sum form)
// FedAvg skips 3-8 and aggregates every user. A failure on the aggregate
// path aborts the round and leaves w unchanged.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forta/adversary.hpp"
#include "forta/analog_sharing.hpp"
#include "forta/dft_codec.hpp"
#include "forta/joint_localizer.hpp"
#include "forta/learning_task.hpp"
#include "forta/robust_select.hpp"

namespace forta::fl {

enum class StepForm { kMean, kSum };
std::string_view to_string(StepForm form);
StepForm parse_step_form(std::string_view name);

struct TaskConfig {
  enum class Source { kBlobs, kCsv };
  Source source = Source::kBlobs;
  task::BlobSpec blobs;
  std::filesystem::path csv_path;
  double test_fraction = 0.2;
};

struct TrainingConfig {
  // protocol
  std::size_t n_users = 30;
  std::size_t collusion_threshold = 9;  // T
  std::size_t byzantine_bound = 10;     // A
  std::size_t select_m = 8;
  robust::Rule rule = robust::Rule::kModifiedKrum;
  StepForm step_form = StepForm::kMean;
  // training
  std::size_t rounds = 50;
  double learning_rate = 0.5;
  double lr_decay = 0.0;  // eta_t = learning_rate / (1 + lr_decay * t)
  std::size_t batch_size = 32;
  std::size_t local_epochs = 1;
  TaskConfig task;
  // sharing and decoding
  double privacy_sigma = 1.0;
  double injected_precision_sigma = 1e-7;
  double rank_tolerance = 1e-4;
  double noise_floor = 1e-9;
  double root_match_tolerance = 0.0;  // 0: pi / N
  // localization and selection
  double temperature = 0.1;
  double hint_floor = 0.05;
  // attack
  adversary::AttackSpec attack;
  std::uint64_t seed = 1;

  // Checks 2A + 2 < N, N >= 2A + T + 1, m <= N - A and the per-module
  // invariants; throws InvalidConfiguration naming the offending key.
  void validate() const;
  codec::CodecParams codec_params() const;
  sharing::SharingParams sharing_params(std::size_t round) const;
  double learning_rate_at(std::size_t round) const;
  // min(A, N - K - 1) with K = T + 1.
  std::size_t hint_budget() const;
};

struct GlobalModel {
  RealVector w;
  std::size_t round = 0;
};

struct RoundRecord {
  std::size_t round = 0;  // 1-based
  robust::Rule rule = robust::Rule::kFedAvg;
  bool aborted = false;
  std::string abort_reason;
  double accuracy = 0.0;  // test accuracy after the step
  double loss = 0.0;      // mean training loss over all users after the step
  std::vector<UserIndex> selected;
  // Per user; empty for FedAvg.
  RealVector krum_scores;
  RealVector lambda;
  RealVector modified_scores;
  std::vector<std::size_t> profile_counts;
  std::size_t total_codewords = 0;
  PositionSet erasure_hints;
  // Plain Krum on the first-pass distances of this same round.
  std::vector<UserIndex> first_pass_krum_selection;
  std::size_t decode_failures = 0;  // pair decodes (all passes) + aggregate
  // Diagnostics against plaintext values (never used by the protocol).
  double sigma_g = 0.0;      // sqrt(mean_i ||w_i - g||^2 / d) over honest users
  double g_norm = 0.0;       // ||mean honest update||
  double sigma_eps = 0.0;    // sqrt(mean ||reconstructed - plaintext||^2 / d) over honest pairs
  double max_distance_rel_error = 0.0;  // honest pairs
  double aggregate_rel_error = 0.0;     // vs plaintext sum over U
};

struct RunLog {
  TrainingConfig config;
  double initial_accuracy = 0.0;
  std::vector<RoundRecord> rounds;
  double wall_clock_seconds = 0.0;  // informational, never written to CSV
};

// Holds the task, codec and per-round streams for one configuration.
class Simulator {
 public:
  Simulator(TrainingConfig config, task::FederatedTask task);

  const TrainingConfig& config() const { return config_; }
  const task::FederatedTask& task() const { return task_; }
  std::size_t dim() const { return task_.dim(); }

  // Runs one round in place; an aborted round leaves `model` unchanged.
  RoundRecord run_round(GlobalModel& model) const;

  // Step 2 for every user in `round` (after poisoning). Streams depend only
  // on (seed, round, user), never on the rule.
  std::vector<RealVector> local_updates(const GlobalModel& model) const;

 private:
  TrainingConfig config_;
  task::FederatedTask task_;
  codec::DftCodec codec_;
};

task::FederatedTask build_task(const TrainingConfig& config);

// Builds the task, runs config.rounds rounds from w = 0, evaluates after
// each. Bit-identical for identical configs.
RunLog run_experiment(const TrainingConfig& config);

}  // namespace forta::fl
