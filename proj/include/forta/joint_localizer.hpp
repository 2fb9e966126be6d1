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

// Joint error localization across all codewords of a round.
//
// Every first-pass decode leaves a vector of per-position error magnitudes.
// Pooled over the whole round, the log-magnitudes split into a precision
// noise cluster and a corruption cluster; a two-component 1-D Gaussian
// mixture separates them, the per-user flag counts form the frequency
// profile, and the most frequently flagged users become erasure hints for a
// second decoding pass.

#pragma once

#include <span>
#include <vector>

#include "forta/analog_sharing.hpp"
#include "forta/common.hpp"

namespace forta::localizer {

// Offset inside log(x + kLogOffset) so that exact zeros stay finite.
inline constexpr double kLogOffset = 1e-12;

// Flat store of (codeword id, position energies[N]) records.
class ErrorEvidence {
 public:
  explicit ErrorEvidence(std::size_t n_users);

  void add(std::size_t codeword_id, std::span<const double> position_energies);
  // Appends every coordinate of a reconstruction, numbering codewords from
  // `first_codeword_id`.
  void add_report(const sharing::ReconstructionReport& report, std::size_t first_codeword_id);

  std::size_t n_users() const { return n_users_; }
  std::size_t size() const { return ids_.size(); }
  std::size_t codeword_id(std::size_t entry) const { return ids_[entry]; }
  std::span<const double> energies(std::size_t entry) const;
  std::span<const double> pooled() const { return energies_; }

 private:
  std::size_t n_users_;
  std::vector<std::size_t> ids_;
  RealVector energies_;
};

struct GmmOptions {
  std::size_t max_iters = 500;
  // Stop once the mean per-sample log-likelihood improves by less than this.
  double tol = 1e-9;
  double variance_floor = 1e-12;
};

// Two components on the log-energy axis, ordered by ascending mean.
struct GmmModel {
  double weights[2] = {0.5, 0.5};
  double means[2] = {0.0, 0.0};
  double variances[2] = {1.0, 1.0};
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> log_likelihood_trace;  // total, one entry per EM step

  // Posterior of the high-mean component for raw energy x.
  double high_posterior(double energy) const;
  // Posterior above 0.5, or log-energy above the high mean.
  bool in_high_cluster(double energy) const;
};

// EM on log(energy + kLogOffset). Identical inputs yield the fallback model
// (equal weights, shared mean, converged = false). Throws InsufficientData
// for fewer than four samples.
GmmModel fit_gmm_1d(std::span<const double> energies, const GmmOptions& options = {});

// Weighted EM on already log-transformed values; the workhorse behind
// fit_gmm_1d, which collapses repeated values into weights first.
GmmModel fit_gmm_weighted(std::span<const double> values, std::span<const double> weights,
                          const GmmOptions& options = {});

// Per-entry positions in the high cluster (see GmmModel::in_high_cluster).
// Zero energies are never flagged.
std::vector<PositionSet> flag_positions(const ErrorEvidence& evidence, const GmmModel& gmm);

struct FrequencyProfile {
  std::vector<std::size_t> counts;
  std::size_t total_codewords = 0;
};

FrequencyProfile build_frequency_profile(std::span<const PositionSet> flags, std::size_t n_users);

// Up to `budget` positions with the largest counts above
// hint_floor * total_codewords; ties go to the lower index. Returned sorted.
PositionSet erasure_hints(const FrequencyProfile& profile, std::size_t budget,
                          double hint_floor = 0.05);

struct Localization {
  GmmModel gmm;
  std::vector<PositionSet> flags;
  FrequencyProfile profile;
};

// fit -> flag -> count over one round of evidence.
Localization localize(const ErrorEvidence& evidence, const GmmOptions& options = {});

}  // namespace forta::localizer
