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

#include "forta/robust_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace forta::robust {

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::kFedAvg: return "fedavg";
    case Rule::kKrum: return "krum";
    case Rule::kModifiedKrum: return "modified_krum";
  }
  return "unknown";
}

Rule parse_rule(std::string_view name) {
  if (name == "fedavg") return Rule::kFedAvg;
  if (name == "krum") return Rule::kKrum;
  if (name == "modified_krum") return Rule::kModifiedKrum;
  throw InvalidArgument(fmt::format("unknown aggregation rule '{}'", name));
}

DistanceMatrix distances(std::span<const RealVector> pair_diffs, std::size_t n_users) {
  const std::size_t pairs = n_users * (n_users - 1) / 2;
  if (pair_diffs.size() != pairs)
    throw InvalidArgument(
        fmt::format("distances: expected {} pair vectors, got {}", pairs, pair_diffs.size()));
  const auto n = static_cast<Eigen::Index>(n_users);
  DistanceMatrix d = DistanceMatrix::Zero(n, n);
  std::size_t idx = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double v = squared_norm(pair_diffs[idx++]);
      d(j, k) = v;
      d(k, j) = v;
    }
  return d;
}

DistanceMatrix direct_distances(std::span<const RealVector> updates) {
  const auto n = static_cast<Eigen::Index>(updates.size());
  DistanceMatrix d = DistanceMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const RealVector& a = updates[static_cast<std::size_t>(j)];
      const RealVector& b = updates[static_cast<std::size_t>(k)];
      double v = 0.0;
      for (std::size_t l = 0; l < a.size(); ++l) v += (a[l] - b[l]) * (a[l] - b[l]);
      d(j, k) = v;
      d(k, j) = v;
    }
  return d;
}

ScoreTable krum_scores(const DistanceMatrix& dist, std::size_t byzantine_bound) {
  const std::size_t n = static_cast<std::size_t>(dist.rows());
  if (n <= byzantine_bound + 2)
    throw InvalidConfiguration(fmt::format(
        "Krum needs N > A + 2 (N = {}, A = {})", n, byzantine_bound));
  const std::size_t size = n - byzantine_bound - 2;

  ScoreTable table;
  table.scores.resize(n);
  table.neighbor_sets.resize(n);
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = dist.row(static_cast<Eigen::Index>(i));
    others.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
      return row(static_cast<Eigen::Index>(a)) < row(static_cast<Eigen::Index>(b));
    });
    PositionSet nearest(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(nearest.begin(), nearest.end());
    // Summing in index order makes the score independent of how ties among
    // equal distances were resolved.
    double s = 0.0;
    for (std::size_t j : nearest) s += row(static_cast<Eigen::Index>(j));
    table.scores[i] = s;
    table.neighbor_sets[i] = std::move(nearest);
  }
  return table;
}

ConfidenceVector soft_confidences(std::span<const std::size_t> counts, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("soft_confidences: temperature must be > 0");
  ConfidenceVector conf;
  conf.temperature = temperature;
  if (counts.empty()) return conf;
  const double top =
      static_cast<double>(std::max<std::size_t>(*std::max_element(counts.begin(), counts.end()), 1));
  RealVector logits(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    logits[i] = static_cast<double>(counts[i]) / top / temperature;
  const double shift = *std::max_element(logits.begin(), logits.end());
  conf.lambda.resize(counts.size());
  double z = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    conf.lambda[i] = std::exp(logits[i] - shift);
    z += conf.lambda[i];
  }
  for (double& l : conf.lambda) l /= z;
  return conf;
}

RealVector modified_scores(const ScoreTable& table, const ConfidenceVector& conf,
                           std::size_t byzantine_bound) {
  const std::size_t n = table.scores.size();
  if (conf.lambda.size() != n)
    throw InvalidArgument("modified_scores: scores and confidences differ in length");
  if (n <= byzantine_bound + 2)
    throw InvalidConfiguration("modified_scores: N - A - 2 must be positive");
  const double denom = static_cast<double>(n - byzantine_bound - 2);
  const double s_min = *std::min_element(table.scores.begin(), table.scores.end()) / denom;
  RealVector out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = conf.lambda[i] * table.scores[i] + (1.0 - conf.lambda[i]) * s_min;
  return out;
}

SelectionSet select(std::span<const double> scores, std::size_t m, Rule rule) {
  const std::size_t n = scores.size();
  if (m < 1 || m > n)
    throw InvalidArgument(fmt::format("select: m = {} outside [1, {}]", m, n));
  SelectionSet sel;
  sel.rule = rule;
  sel.users.resize(n);
  std::iota(sel.users.begin(), sel.users.end(), 0);
  if (rule == Rule::kFedAvg) return sel;
  std::stable_sort(sel.users.begin(), sel.users.end(),
                   [&](UserIndex a, UserIndex b) { return scores[a] < scores[b]; });
  sel.users.resize(m);
  std::sort(sel.users.begin(), sel.users.end());
  return sel;
}

}  // namespace forta::robust
