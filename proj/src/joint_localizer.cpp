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

#include "forta/joint_localizer.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

namespace forta::localizer {

namespace {

double log_energy(double x) { return std::log(x + kLogOffset); }

double log_gaussian(double x, double mean, double variance) {
  const double z = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + z * z / variance);
}

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

GmmModel fallback(double mean, double variance) {
  GmmModel m;
  m.means[0] = m.means[1] = mean;
  m.variances[0] = m.variances[1] = variance;
  m.converged = false;
  return m;
}

}  // namespace

ErrorEvidence::ErrorEvidence(std::size_t n_users) : n_users_(n_users) {
  if (n_users == 0) throw InvalidArgument("ErrorEvidence: n_users must be positive");
}

void ErrorEvidence::add(std::size_t codeword_id, std::span<const double> position_energies) {
  if (position_energies.size() != n_users_)
    throw InvalidArgument(fmt::format("ErrorEvidence: expected {} energies, got {}", n_users_,
                                      position_energies.size()));
  for (double e : position_energies)
    if (!(e >= 0.0) || !std::isfinite(e))
      throw InvalidArgument("ErrorEvidence: energies must be finite and non-negative");
  ids_.push_back(codeword_id);
  energies_.insert(energies_.end(), position_energies.begin(), position_energies.end());
}

void ErrorEvidence::add_report(const sharing::ReconstructionReport& report,
                               std::size_t first_codeword_id) {
  for (std::size_t l = 0; l < report.position_energies.size(); ++l)
    add(first_codeword_id + l, report.position_energies[l]);
}

std::span<const double> ErrorEvidence::energies(std::size_t entry) const {
  return std::span<const double>(energies_).subspan(entry * n_users_, n_users_);
}

double GmmModel::high_posterior(double energy) const {
  const double x = log_energy(energy);
  const double lo = std::log(weights[0]) + log_gaussian(x, means[0], variances[0]);
  const double hi = std::log(weights[1]) + log_gaussian(x, means[1], variances[1]);
  return std::exp(hi - log_add(lo, hi));
}

namespace {

// Split point just above the weighted median; falls back to the median
// itself when every value above it is empty (heavy atom at the top).
double median_split(std::span<const double> values, std::span<const double> weights,
                    double total) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  double acc = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    acc += weights[order[r]];
    if (acc >= 0.5 * total) {
      // Next strictly larger value, so both sides are non-empty.
      for (std::size_t q = r + 1; q < order.size(); ++q)
        if (values[order[q]] > values[order[r]]) return values[order[q]];
      return values[order[r]];
    }
  }
  return values[order.back()];
}

// Upper end of the widest gap between consecutive distinct values. A lone
// outlier far above the bulk is a better mixture component than half of the
// bulk, which a median split alone cannot find.
double largest_gap_split(std::span<const double> values) {
  RealVector sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double gap = -1.0, split = sorted.back();
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] - sorted[i - 1] > gap) {
      gap = sorted[i] - sorted[i - 1];
      split = sorted[i];
    }
  return split;
}

GmmModel run_em(std::span<const double> values, std::span<const double> weights, double total,
                double split, const GmmOptions& options) {
  // Component 1 starts as every value at or above `split`.
  auto in_high = [&](double v) { return v >= split; };
  GmmModel m;
  {
    double w[2] = {0, 0}, s[2] = {0, 0}, ss[2] = {0, 0};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const int c = in_high(values[i]) ? 1 : 0;
      w[c] += weights[i];
      s[c] += weights[i] * values[i];
    }
    for (int c = 0; c < 2; ++c) m.means[c] = s[c] / w[c];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const int c = in_high(values[i]) ? 1 : 0;
      ss[c] += weights[i] * (values[i] - m.means[c]) * (values[i] - m.means[c]);
    }
    for (int c = 0; c < 2; ++c) {
      m.weights[c] = w[c] / total;
      m.variances[c] = std::max(ss[c] / w[c], options.variance_floor);
    }
  }

  std::vector<double> resp(values.size());  // responsibility of the high component
  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    // E-step; the log-likelihood is that of the current parameters.
    double ll = 0.0;
    const double log_w0 = std::log(m.weights[0]);
    const double log_w1 = std::log(m.weights[1]);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double lo = log_w0 + log_gaussian(values[i], m.means[0], m.variances[0]);
      const double hi = log_w1 + log_gaussian(values[i], m.means[1], m.variances[1]);
      const double joint = log_add(lo, hi);
      resp[i] = std::exp(hi - joint);
      ll += weights[i] * joint;
    }
    m.log_likelihood_trace.push_back(ll);
    m.iterations = iter + 1;
    assert(ll >= previous - 1e-9 * std::abs(previous));
    if (ll - previous < options.tol * total) {
      m.converged = true;
      break;
    }
    previous = ll;

    // M-step.
    double w[2] = {0, 0}, s[2] = {0, 0};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double r[2] = {1.0 - resp[i], resp[i]};
      for (int c = 0; c < 2; ++c) {
        w[c] += weights[i] * r[c];
        s[c] += weights[i] * r[c] * values[i];
      }
    }
    if (w[0] <= 0.0 || w[1] <= 0.0) break;  // a component emptied out
    for (int c = 0; c < 2; ++c) m.means[c] = s[c] / w[c];
    double ss[2] = {0, 0};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double r[2] = {1.0 - resp[i], resp[i]};
      for (int c = 0; c < 2; ++c) {
        const double z = values[i] - m.means[c];
        ss[c] += weights[i] * r[c] * z * z;
      }
    }
    for (int c = 0; c < 2; ++c) {
      m.weights[c] = w[c] / total;
      m.variances[c] = std::max(ss[c] / w[c], options.variance_floor);
    }
  }

  if (m.means[0] > m.means[1]) {
    std::swap(m.means[0], m.means[1]);
    std::swap(m.weights[0], m.weights[1]);
    std::swap(m.variances[0], m.variances[1]);
  }
  return m;
}

}  // namespace

bool GmmModel::in_high_cluster(double energy) const {
  // With unequal variances the posterior turns back toward the wider
  // component far out in either tail; everything above the high mean stays
  // in the high cluster so the decision region is an upper ray.
  return high_posterior(energy) > 0.5 || log_energy(energy) > means[1];
}

GmmModel fit_gmm_weighted(std::span<const double> values, std::span<const double> weights,
                          const GmmOptions& options) {
  if (values.size() != weights.size())
    throw InvalidArgument("fit_gmm_weighted: values and weights differ in length");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (values.empty() || !(total > 0.0)) throw InsufficientData("fit_gmm_weighted: no samples");

  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += weights[i] * values[i];
  mean /= total;
  double spread = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    spread += weights[i] * (values[i] - mean) * (values[i] - mean);
  spread = std::max(spread / total, options.variance_floor);

  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  if (*min_it == *max_it) return fallback(mean, spread);

  GmmModel best;
  bool have_best = false;
  for (const double split : {median_split(values, weights, total), largest_gap_split(values)}) {
    GmmModel m = run_em(values, weights, total, split, options);
    if (!have_best || m.log_likelihood_trace.back() > best.log_likelihood_trace.back()) {
      best = std::move(m);
      have_best = true;
    }
  }
  return best;
}

GmmModel fit_gmm_1d(std::span<const double> energies, const GmmOptions& options) {
  if (energies.size() < 4) throw InsufficientData("fit_gmm_1d: need at least 4 samples");
  // Round-level evidence is dominated by repeated values (mostly exact
  // zeros); fitting on distinct values with multiplicities is equivalent
  // and far cheaper.
  RealVector logs(energies.size());
  std::transform(energies.begin(), energies.end(), logs.begin(), log_energy);
  std::sort(logs.begin(), logs.end());
  RealVector values, weights;
  for (double v : logs) {
    if (!values.empty() && values.back() == v) {
      weights.back() += 1.0;
    } else {
      values.push_back(v);
      weights.push_back(1.0);
    }
  }
  return fit_gmm_weighted(values, weights, options);
}

std::vector<PositionSet> flag_positions(const ErrorEvidence& evidence, const GmmModel& gmm) {
  std::vector<PositionSet> flags(evidence.size());
  for (std::size_t e = 0; e < evidence.size(); ++e) {
    const auto energies = evidence.energies(e);
    for (std::size_t p = 0; p < energies.size(); ++p)
      if (energies[p] > 0.0 && gmm.in_high_cluster(energies[p])) flags[e].push_back(p);
  }
  return flags;
}

FrequencyProfile build_frequency_profile(std::span<const PositionSet> flags, std::size_t n_users) {
  FrequencyProfile profile;
  profile.counts.assign(n_users, 0);
  profile.total_codewords = flags.size();
  for (const PositionSet& set : flags) {
    for (std::size_t p : set) {
      if (p >= n_users)
        throw InvalidArgument(fmt::format("frequency profile: position {} out of range", p));
      ++profile.counts[p];
    }
  }
  return profile;
}

PositionSet erasure_hints(const FrequencyProfile& profile, std::size_t budget,
                          double hint_floor) {
  const double floor = hint_floor * static_cast<double>(profile.total_codewords);
  PositionSet candidates;
  for (std::size_t p = 0; p < profile.counts.size(); ++p)
    if (static_cast<double>(profile.counts[p]) > floor) candidates.push_back(p);
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return profile.counts[a] > profile.counts[b];
  });
  if (candidates.size() > budget) candidates.resize(budget);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

Localization localize(const ErrorEvidence& evidence, const GmmOptions& options) {
  Localization out;
  out.gmm = fit_gmm_1d(evidence.pooled(), options);
  out.flags = flag_positions(evidence, out.gmm);
  out.profile = build_frequency_profile(out.flags, evidence.n_users());
  return out;
}

}  // namespace forta::localizer
