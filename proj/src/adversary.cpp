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

#include "forta/adversary.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace forta::adversary {

namespace {

// Stream labels keep update poisoning and message corruption independent.
constexpr std::uint64_t kPoisonStream = 0x706f6973;
constexpr std::uint64_t kCorruptStream = 0x636f7272;
constexpr std::uint64_t kAggregateStream = 0x61676772;

double message_corruption(const AttackSpec& spec) {
  switch (spec.kind) {
    case AttackKind::kShareCorrupt: return spec.magnitude;
    case AttackKind::kCombined: return spec.share_magnitude;
    default: return 0.0;
  }
}

}  // namespace

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone: return "none";
    case AttackKind::kScale: return "scale";
    case AttackKind::kAdditiveNoise: return "additive_noise";
    case AttackKind::kShareCorrupt: return "share_corrupt";
    case AttackKind::kPrecisionMimic: return "precision_mimic";
    case AttackKind::kCombined: return "combined";
  }
  return "unknown";
}

AttackKind parse_attack_kind(std::string_view name) {
  for (AttackKind k : {AttackKind::kNone, AttackKind::kScale, AttackKind::kAdditiveNoise,
                       AttackKind::kShareCorrupt, AttackKind::kPrecisionMimic,
                       AttackKind::kCombined})
    if (name == to_string(k)) return k;
  throw InvalidArgument(fmt::format("unknown attack kind '{}'", name));
}

bool AttackSpec::is_byzantine(UserIndex user) const {
  return std::binary_search(byzantine_set.begin(), byzantine_set.end(), user);
}

bool AttackSpec::corrupts_updates() const {
  return kind == AttackKind::kScale || kind == AttackKind::kAdditiveNoise ||
         kind == AttackKind::kCombined;
}

bool AttackSpec::corrupts_messages() const {
  return kind == AttackKind::kShareCorrupt || kind == AttackKind::kPrecisionMimic ||
         kind == AttackKind::kCombined;
}

void validate_threat_model(const AttackSpec& spec, std::size_t n_users,
                           std::size_t byzantine_bound, std::size_t collusion_threshold) {
  auto check_set = [&](const PositionSet& set, std::string_view name, std::size_t bound,
                       std::string_view bound_name) {
    if (set.size() > bound)
      throw InvalidConfiguration(fmt::format("attack.{} has {} users, more than {} = {}", name,
                                             set.size(), bound_name, bound));
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set[i] >= n_users)
        throw InvalidConfiguration(
            fmt::format("attack.{}: user {} outside 1..{}", name, set[i] + 1, n_users));
      if (i > 0 && set[i] <= set[i - 1])
        throw InvalidConfiguration(
            fmt::format("attack.{} must list distinct users in ascending order", name));
    }
  };
  check_set(spec.byzantine_set, "byzantine", byzantine_bound, "A");
  check_set(spec.collusion_set, "collusion", collusion_threshold, "T");
  if (!(spec.magnitude >= 0.0) || !std::isfinite(spec.magnitude))
    throw InvalidConfiguration("attack.magnitude must be finite and non-negative");
  if (!(spec.share_magnitude >= 0.0) || !std::isfinite(spec.share_magnitude))
    throw InvalidConfiguration("attack.share_magnitude must be finite and non-negative");
}

RealVector poison_update(std::span<const double> update, const AttackSpec& spec, UserIndex user,
                         std::size_t round) {
  RealVector out(update.begin(), update.end());
  if (!spec.is_byzantine(user)) return out;
  switch (spec.kind) {
    case AttackKind::kScale:
    case AttackKind::kCombined:
      for (double& x : out) x *= spec.magnitude;
      break;
    case AttackKind::kAdditiveNoise: {
      if (spec.magnitude == 0.0) break;
      Rng rng(derive_seed(spec.rng_seed, {kPoisonStream, round, user}));
      std::normal_distribution<double> g(0.0, spec.magnitude);
      for (double& x : out) x += g(rng);
      break;
    }
    default:
      break;
  }
  return out;
}

std::vector<sharing::DifferenceMessage> corrupt_messages(
    std::vector<sharing::DifferenceMessage> messages, const AttackSpec& spec, std::size_t round) {
  const double magnitude = message_corruption(spec);
  if (messages.empty() || magnitude == 0.0) return messages;
  const UserIndex reporter = messages.front().reporter;
  if (!spec.is_byzantine(reporter)) return messages;
  Rng rng(derive_seed(spec.rng_seed, {kCorruptStream, round, reporter}));
  // Circularly symmetric: total variance magnitude^2 per complex entry.
  std::normal_distribution<double> g(0.0, magnitude / std::sqrt(2.0));
  for (auto& m : messages)
    for (Complex& x : m.payload) x += Complex(g(rng), g(rng));
  return messages;
}

double precision_mimic_threshold(const codec::DftCodec& codec, const PositionSet& byzantine_set) {
  if (byzantine_set.empty()) return 0.0;
  codec::Codeword pattern{ComplexVector(codec.params().n)};
  for (std::size_t p : byzantine_set) pattern.values.at(p) = Complex(1.0, 0.0);
  const RealVector sv = codec.hankel_singular_values(codec.syndromes(pattern));
  return codec.params().noise_floor / sv.front();
}

std::vector<sharing::DifferenceMessage> precision_mimic(
    std::vector<sharing::DifferenceMessage> messages, const AttackSpec& spec,
    const codec::DftCodec& codec) {
  if (spec.kind != AttackKind::kPrecisionMimic || spec.magnitude == 0.0 || messages.empty())
    return messages;
  if (!spec.is_byzantine(messages.front().reporter)) return messages;
  const Complex offset(spec.magnitude * precision_mimic_threshold(codec, spec.byzantine_set), 0.0);
  for (auto& m : messages)
    for (Complex& x : m.payload) x += offset;
  return messages;
}

ComplexVector corrupt_aggregation_message(ComplexVector payload, const AttackSpec& spec,
                                          UserIndex reporter, std::size_t round,
                                          const codec::DftCodec& codec) {
  if (!spec.is_byzantine(reporter)) return payload;
  if (spec.kind == AttackKind::kPrecisionMimic) {
    const Complex offset(spec.magnitude * precision_mimic_threshold(codec, spec.byzantine_set),
                         0.0);
    for (Complex& x : payload) x += offset;
    return payload;
  }
  const double magnitude = message_corruption(spec);
  if (magnitude == 0.0) return payload;
  Rng rng(derive_seed(spec.rng_seed, {kAggregateStream, round, reporter}));
  std::normal_distribution<double> g(0.0, magnitude / std::sqrt(2.0));
  for (Complex& x : payload) x += Complex(g(rng), g(rng));
  return payload;
}

}  // namespace forta::adversary
