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

// Byzantine behaviours: poisoned local updates, corrupted difference
// messages, and the precision-mimic attack that hides structured
// corruption under the decoder's noise floor.
//
// Every operation is the identity for users outside the Byzantine set.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "forta/analog_sharing.hpp"
#include "forta/common.hpp"
#include "forta/dft_codec.hpp"

namespace forta::adversary {

enum class AttackKind {
  kNone,
  kScale,           // w <- magnitude * w
  kAdditiveNoise,   // w <- w + N(0, magnitude^2)
  kShareCorrupt,    // payload += CN(0, magnitude^2)
  kPrecisionMimic,  // payload += common-phase sub-floor offset
  kCombined,        // kScale on updates plus kShareCorrupt at share_magnitude
};

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);

struct AttackSpec {
  AttackKind kind = AttackKind::kNone;
  double magnitude = 0.0;
  double share_magnitude = 0.0;  // message corruption strength for kCombined
  PositionSet byzantine_set;     // sorted user indices
  PositionSet collusion_set;
  std::uint64_t rng_seed = 0;

  bool is_byzantine(UserIndex user) const;
  bool corrupts_updates() const;
  bool corrupts_messages() const;
};

// Rejects |byzantine_set| > A, |collusion_set| > T, out-of-range or
// duplicate users, and negative magnitudes (InvalidConfiguration).
void validate_threat_model(const AttackSpec& spec, std::size_t n_users,
                           std::size_t byzantine_bound, std::size_t collusion_threshold);

// Poisoned local update of `user` in `round`.
RealVector poison_update(std::span<const double> update, const AttackSpec& spec, UserIndex user,
                         std::size_t round);

// Corrupts the difference messages of one reporter (share_corrupt and
// combined); other kinds and honest reporters pass through unchanged.
std::vector<sharing::DifferenceMessage> corrupt_messages(
    std::vector<sharing::DifferenceMessage> messages, const AttackSpec& spec, std::size_t round);

// Real offset per Byzantine reporter at which the syndrome Hankel matrix of
// the pattern "offset at every Byzantine position" has its top singular
// value exactly at the decoder's noise floor. Anything smaller is invisible
// to the per-codeword rank test. Zero for an empty Byzantine set.
double precision_mimic_threshold(const codec::DftCodec& codec, const PositionSet& byzantine_set);

// Adds magnitude * threshold (real, positive: a common phase that biases
// every decoded constant term the same way) to each payload coordinate of a
// Byzantine reporter. magnitude < 1 stays below detection.
std::vector<sharing::DifferenceMessage> precision_mimic(
    std::vector<sharing::DifferenceMessage> messages, const AttackSpec& spec,
    const codec::DftCodec& codec);

// The same corruption applied by a Byzantine holder to its aggregation
// message (sum of shares over the selected set): complex Gaussian noise for
// share_corrupt / combined, the calibrated offset for precision_mimic.
ComplexVector corrupt_aggregation_message(ComplexVector payload, const AttackSpec& spec,
                                          UserIndex reporter, std::size_t round,
                                          const codec::DftCodec& codec);

}  // namespace forta::adversary
