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

#include "forta/theory.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace forta::theory {

namespace {

void require_hypothesis(std::size_t n, std::size_t a) {
  if (2 * a + 2 >= n)
    throw InvalidConfiguration(
        fmt::format("theory: 2A + 2 < N violated (N = {}, A = {})", n, a));
}

double sample_std(std::span<const double> xs, double mean) {
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// 4 d sigma'^2 / |g|^2
double scale_squared(const TheoryParams& p) {
  const double s = effective_sigma(p);
  return 4.0 * static_cast<double>(p.dim) * s * s / (p.g_norm * p.g_norm);
}

}  // namespace

void TheoryParams::validate() const {
  require_hypothesis(n_users, byzantine_bound);
  if (dim == 0) throw InvalidConfiguration("theory: d must be positive");
  if (!(sigma_g >= 0.0) || !std::isfinite(sigma_g))
    throw InvalidConfiguration("theory.sigma_g must be finite and non-negative");
  if (!(sigma_eps >= 0.0) || !std::isfinite(sigma_eps))
    throw InvalidConfiguration("theory.sigma_eps must be finite and non-negative");
  if (!(g_norm > 0.0) || !std::isfinite(g_norm))
    throw InvalidConfiguration("theory.g_norm must be finite and positive");
}

void FeedbackStats::validate() const {
  for (double v : {mu_t, sigma_t, mu_q, sigma_q, c1})
    if (!std::isfinite(v)) throw InvalidConfiguration("theory: feedback stats must be finite");
  if (!(mu_t > 0.0)) throw InvalidConfiguration("theory.mu_T must be positive");
  if (sigma_t < 0.0 || sigma_q < 0.0)
    throw InvalidConfiguration("theory: sigma_T and sigma_Q must be non-negative");
  if (!(c1 >= 1.0)) throw InvalidConfiguration("theory.C1 must be at least 1");
}

double eta_squared(std::size_t n_users, std::size_t byzantine_bound) {
  require_hypothesis(n_users, byzantine_bound);
  const double n = static_cast<double>(n_users), a = static_cast<double>(byzantine_bound);
  return n - a + (a * (n - a - 2.0) + a * a * (n - a - 1.0)) / (n - 2.0 * a - 2.0);
}

double eta(std::size_t n_users, std::size_t byzantine_bound) {
  return std::sqrt(eta_squared(n_users, byzantine_bound));
}

double eta_prime(std::size_t n_users, std::size_t byzantine_bound) {
  require_hypothesis(n_users, byzantine_bound);
  const double n = static_cast<double>(n_users), a = static_cast<double>(byzantine_bound);
  const double denom = n - 2.0 * a - 2.0;
  return (n - a - 2.0) / denom + a * (n - a - 1.0) / denom;
}

double effective_sigma(const TheoryParams& p) {
  p.validate();
  return std::sqrt(p.sigma_g * p.sigma_g + 0.5 * p.sigma_eps * p.sigma_eps);
}

Bound sin_alpha(const TheoryParams& params) {
  params.validate();
  Bound b;
  b.value = std::sqrt(eta_squared(params.n_users, params.byzantine_bound) * scale_squared(params));
  b.valid = b.value < 1.0;
  return b;
}

double modified_factor(const TheoryParams& params, const FeedbackStats& stats) {
  params.validate();
  stats.validate();
  const double n = static_cast<double>(params.n_users);
  const double a = static_cast<double>(params.byzantine_bound);
  const double ep = eta_prime(params.n_users, params.byzantine_bound);
  const double psi_t = std::sqrt((stats.sigma_t * stats.sigma_t + stats.mu_t * stats.mu_t) * stats.c1);
  const double psi_q = std::sqrt((stats.sigma_q * stats.sigma_q + stats.mu_q * stats.mu_q) * stats.c1);
  return a * (ep * psi_t + ep / (n - a - 2.0) * psi_q) + (n - a);
}

Bound sin_alpha_mod(const TheoryParams& params, const FeedbackStats& stats) {
  Bound b;
  b.value = std::sqrt(modified_factor(params, stats) * scale_squared(params));
  b.valid = b.value < 1.0;
  return b;
}

bool corollary_condition(const TheoryParams& params, const FeedbackStats& stats) {
  return modified_factor(params, stats) < eta_squared(params.n_users, params.byzantine_bound);
}

double moment_ratio(std::span<const RealVector> samples) {
  if (samples.empty()) return 1.0;
  double m2 = 0.0, m4 = 0.0;
  for (const RealVector& x : samples) {
    const double s = squared_norm(x);
    m2 += s;
    m4 += s * s;
  }
  const double n = static_cast<double>(samples.size());
  m2 /= n;
  m4 /= n;
  if (m2 == 0.0) return 1.0;
  return std::max(1.0, m4 / (m2 * m2));
}

FeedbackStats estimate_feedback_stats(std::span<const RealVector> lambda_history,
                                      std::span<const std::vector<RealVector>> surrogate_groups) {
  if (lambda_history.size() < 2)
    throw InsufficientData(fmt::format(
        "feedback stats need at least 2 rounds of confidences, got {}", lambda_history.size()));
  const std::size_t n = lambda_history.front().size();
  if (n < 2) throw InvalidArgument("feedback stats need at least 2 users");
  RealVector t(lambda_history.size()), q(lambda_history.size());
  for (std::size_t r = 0; r < lambda_history.size(); ++r) {
    const RealVector& lam = lambda_history[r];
    if (lam.size() != n)
      throw InvalidArgument(fmt::format("confidence round {} has {} users, expected {}", r + 1,
                                        lam.size(), n));
    const auto [lo, hi] = std::minmax_element(lam.begin(), lam.end());
    if (!(*lo > 0.0))
      throw InvalidArgument(fmt::format("confidence round {} has a non-positive entry", r + 1));
    // Over ordered pairs i != k both maxima pair the largest with the smallest.
    t[r] = *hi / *lo;
    q[r] = 1.0 - *lo / *hi;
  }
  FeedbackStats s;
  s.mu_t = mean_of(t);
  s.sigma_t = sample_std(t, s.mu_t);
  s.mu_q = mean_of(q);
  s.sigma_q = sample_std(q, s.mu_q);
  s.c1 = 1.0;
  for (const auto& group : surrogate_groups) s.c1 = std::max(s.c1, moment_ratio(group));
  return s;
}

std::vector<std::vector<RealVector>> surrogate_differences(std::span<const RealVector> updates,
                                                           double sigma_eps, std::size_t draws,
                                                           Rng& rng) {
  if (!(sigma_eps >= 0.0)) throw InvalidArgument("surrogates: sigma_eps must be non-negative");
  const std::size_t n = updates.size();
  std::normal_distribution<double> half(0.0, sigma_eps / std::sqrt(2.0));
  std::vector<std::vector<RealVector>> groups;
  groups.reserve(n * (n - 1) / 2);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) {
      const std::size_t d = updates[j].size();
      if (updates[k].size() != d) throw InvalidArgument("surrogates: ragged updates");
      std::vector<RealVector> group(draws, RealVector(d));
      for (RealVector& x : group)
        for (std::size_t l = 0; l < d; ++l) {
          const double e1 = half(rng), e2 = half(rng);
          x[l] = (updates[j][l] + e1) - (updates[k][l] - e2);
        }
      groups.push_back(std::move(group));
    }
  return groups;
}

}  // namespace forta::theory
