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

// Analog secret sharing of real model updates over the complex numbers.
//
// Owner i hides w_i in P_i(x) = (w_i + eps_i) + sum_{t=1..T} r_it x^t with
// r_it circularly symmetric Gaussian, and hands P_i(omega_j) to holder j.
// Holders report differences of the shares they hold, or sums over a
// selected set; the server sees only codewords of the (N, T+1) DFT code and
// recovers constant terms by decoding.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "forta/common.hpp"
#include "forta/dft_codec.hpp"

namespace forta::sharing {

struct SharingParams {
  std::size_t n_users = 0;
  std::size_t collusion_threshold = 0;  // T
  double privacy_sigma = 1.0;           // total masking std per coordinate
  double injected_precision_sigma = 1e-7;
  std::uint64_t rng_seed = 0;

  void validate() const;
  // Codec for the (N, T+1) code with default tolerances.
  codec::CodecParams codec_params() const;
};

struct Share {
  UserIndex owner = 0;
  UserIndex holder = 0;
  ComplexVector payload;
};

struct DifferenceMessage {
  UserIndex reporter = 0;
  UserIndex first = 0;   // j
  UserIndex second = 0;  // k, first < second
  ComplexVector payload; // s_{j,reporter} - s_{k,reporter}
};

struct ReconstructionReport {
  RealVector secret;
  std::vector<PositionSet> per_coordinate_error_positions;
  std::vector<RealVector> position_energies;  // per coordinate, length N
  std::size_t decode_failures = 0;
  std::size_t total_codewords = 0;
  // Largest |Im message[0]| seen; secrets are real, so anything above 1e-6
  // is reported rather than dropped.
  double max_imag_residue = 0.0;
  std::size_t imag_residue_warnings = 0;
};

// Index of the unordered pair (j, k), j < k, in lexicographic order.
std::size_t pair_index(UserIndex j, UserIndex k, std::size_t n_users);
std::vector<std::pair<UserIndex, UserIndex>> all_pairs(std::size_t n_users);

// Shares of `update` for holders 0..N-1. Deterministic given rng_seed and owner.
std::vector<Share> make_shares(std::span<const double> update, const SharingParams& params,
                               UserIndex owner);

// s_{j,holder} - s_{k,holder}; defined for any ordered pair.
ComplexVector pair_difference(std::span<const Share> held_shares, UserIndex j, UserIndex k);

// One message per pair j < k, in pair_index order. Throws ProtocolViolation
// naming the first owner without exactly one share.
std::vector<DifferenceMessage> difference_messages(std::span<const Share> held_shares,
                                                   std::size_t n_users);

// Codeword l holds coordinate l of every reporter's payload. Messages must
// cover one pair with exactly one message per reporter.
std::vector<codec::Codeword> assemble_codewords(std::span<const DifferenceMessage> messages,
                                                std::size_t n_users);

// Decodes every coordinate; never throws on decode failure.
ReconstructionReport reconstruct(std::span<const codec::Codeword> codewords,
                                 const codec::DftCodec& codec,
                                 const std::optional<PositionSet>& hints = {});

// sum_{j in selected} s_{j,holder}.
ComplexVector aggregation_message(std::span<const Share> held_shares,
                                  std::span<const UserIndex> selected, std::size_t n_users);

// Codewords of the aggregate: entry i of codeword l is holder i's message[l].
std::vector<codec::Codeword> assemble_aggregate(std::span<const ComplexVector> holder_messages);

// Numerical rank of the map from the T+1 coefficients of one sharing
// polynomial to the shares seen by `holders`.
std::size_t collusion_view_rank(std::span<const UserIndex> holders, const SharingParams& params);

// CSV rows: round,owner,holder,coordinate,re,im (users 1-based).
void write_share_dump(std::ostream& out, std::size_t round,
                      std::span<const std::vector<Share>> shares_by_owner, bool header);

}  // namespace forta::sharing
