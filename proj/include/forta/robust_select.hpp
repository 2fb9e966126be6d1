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

// Krum and decoder-feedback modified Krum.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "forta/common.hpp"
#include "forta/joint_localizer.hpp"

namespace forta::robust {

enum class Rule { kFedAvg, kKrum, kModifiedKrum };

std::string_view to_string(Rule rule);
// Accepts "fedavg", "krum", "modified_krum"; throws InvalidArgument.
Rule parse_rule(std::string_view name);

// Symmetric, zero diagonal; entry (j, k) is ||w_j - w_k + eps_jk||^2.
using DistanceMatrix = Eigen::MatrixXd;

// One reconstructed difference per unordered pair, in pair_index order.
DistanceMatrix distances(std::span<const RealVector> pair_diffs, std::size_t n_users);
// Exact distances between plaintext updates (test oracle and diagnostics).
DistanceMatrix direct_distances(std::span<const RealVector> updates);

struct ScoreTable {
  RealVector scores;                       // S_i
  std::vector<PositionSet> neighbor_sets;  // M_i, ascending
};

// M_i: the N - A - 2 nearest other users (ties to the lower index).
// Throws InvalidConfiguration when N <= A + 2.
ScoreTable krum_scores(const DistanceMatrix& dist, std::size_t byzantine_bound);

struct ConfidenceVector {
  RealVector lambda;
  double temperature = 0.1;
};

// softmax(counts / max(max_count, 1) / tau).
ConfidenceVector soft_confidences(std::span<const std::size_t> counts, double temperature);
inline ConfidenceVector soft_confidences(const localizer::FrequencyProfile& profile,
                                         double temperature) {
  return soft_confidences(profile.counts, temperature);
}

// lambda_i S_i + (1 - lambda_i) S_min with S_min = min_i S_i / (N - A - 2).
RealVector modified_scores(const ScoreTable& table, const ConfidenceVector& conf,
                           std::size_t byzantine_bound);

struct SelectionSet {
  std::vector<UserIndex> users;  // ascending
  Rule rule = Rule::kFedAvg;
};

// The m smallest scores (ties to the lower index); all users for FedAvg.
SelectionSet select(std::span<const double> scores, std::size_t m, Rule rule);

}  // namespace forta::robust
