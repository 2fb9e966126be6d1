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

// Resilience bounds for Krum and modified Krum on noisy surrogate updates.
//
//   eta(N, A)^2 = N - A + (A (N - A - 2) + A^2 (N - A - 1)) / (N - 2A - 2)
//   eta'(N, A)  = (N - A - 2) / (N - 2A - 2) + A (N - A - 1) / (N - 2A - 2)
//   sigma'      = sqrt(sigma_g^2 + sigma_eps^2 / 2)
//
//   sin(alpha)  = 2 eta sqrt(d) sigma' / |g|
//   sin(alpha') = sqrt((A (eta' Psi_T + eta' Psi_Q / (N - A - 2)) + N - A)
//                      * 4 d sigma'^2) / |g|
//   Psi_T = sqrt((sigma_T^2 + mu_T^2) C1),  Psi_Q likewise.
//
// Modified Krum dominates when  A (eta' Psi_T + eta' Psi_Q / (N - A - 2)) +
// N - A < eta^2. Both bounds are evaluated as sqrt(factor * 4 d sigma'^2) / |g|
// so that the dominance test and the bound comparison agree exactly.
//
// Every evaluator requires 2A + 2 < N and throws InvalidConfiguration
// otherwise.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "forta/common.hpp"

namespace forta::theory {

struct TheoryParams {
  std::size_t n_users = 0;          // N
  std::size_t byzantine_bound = 0;  // A
  std::size_t dim = 0;              // d
  double sigma_g = 0.0;             // honest update spread per coordinate
  double sigma_eps = 0.0;           // reconstruction noise per coordinate
  double g_norm = 0.0;              // |g|

  void validate() const;
};

struct FeedbackStats {
  double mu_t = 1.0;
  double sigma_t = 0.0;
  double mu_q = 0.0;
  double sigma_q = 0.0;
  double c1 = 1.0;

  void validate() const;
};

// A bound together with whether its theorem's hypothesis holds (value < 1).
struct Bound {
  double value = 0.0;
  bool valid = false;
};

double eta_squared(std::size_t n_users, std::size_t byzantine_bound);
double eta(std::size_t n_users, std::size_t byzantine_bound);
double eta_prime(std::size_t n_users, std::size_t byzantine_bound);
double effective_sigma(const TheoryParams& params);

Bound sin_alpha(const TheoryParams& params);
Bound sin_alpha_mod(const TheoryParams& params, const FeedbackStats& stats);
bool corollary_condition(const TheoryParams& params, const FeedbackStats& stats);

// Left-hand side of the dominance condition.
double modified_factor(const TheoryParams& params, const FeedbackStats& stats);

// E[|x|^4] / E[|x|^2]^2 over one group of samples (1 for an empty group or
// all-zero samples). Never below 1.
double moment_ratio(std::span<const RealVector> samples);

// Per round, t = max_{i != k} lambda_i / lambda_k and q = max_{i != k}
// (1 - lambda_i / lambda_k); mu and sigma are the sample mean and standard
// deviation over rounds. C1 is the largest moment_ratio over the surrogate
// groups (1 with no groups). Throws InsufficientData for fewer than two
// rounds, InvalidArgument for non-positive or ragged confidences.
FeedbackStats estimate_feedback_stats(std::span<const RealVector> lambda_history,
                                      std::span<const std::vector<RealVector>> surrogate_groups);

// Surrogate pair differences (w_j + e1) - (w_k - e2) with e1, e2 ~
// N(0, sigma_eps^2 / 2 I): one group of `draws` samples per pair j < k, in
// lexicographic pair order.
std::vector<std::vector<RealVector>> surrogate_differences(std::span<const RealVector> updates,
                                                           double sigma_eps, std::size_t draws,
                                                           Rng& rng);

}  // namespace forta::theory
