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

// Analog (N, K) DFT code over the complex numbers.
//
// A message of K coefficients m_0..m_{K-1} is encoded as the evaluations of
// p(x) = sum_t m_t x^t at the N-th roots of unity. Decoding is Prony-style:
// the N - K high-frequency spectrum components (syndromes) vanish on clean
// codewords, their Hankel matrix has rank equal to the number of corrupted
// positions, and the linear-prediction polynomial of the syndromes has its
// roots at the conjugate evaluation points of those positions.

#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "forta/common.hpp"

namespace forta::codec {

struct CodecParams {
  std::size_t n = 0;  // codeword length, the number of users
  std::size_t k = 0;  // message length, collusion threshold + 1
  double rank_tolerance = 1e-4;
  double root_match_tolerance = 0.0;  // radians; 0 selects pi / n
  double noise_floor = 1e-9;

  static CodecParams with_defaults(std::size_t n, std::size_t k);

  std::size_t max_correctable() const { return (n - k) / 2; }
  std::size_t parity_count() const { return n - k; }
  double match_tolerance() const;

  // Throws InvalidArgument naming the violated constraint.
  void validate() const;
};

struct Codeword {
  ComplexVector values;
};

struct DecodeResult {
  ComplexVector message;        // constant term first
  PositionSet error_positions;  // sorted, 0-based
  ComplexVector error_values;   // aligned with error_positions
  RealVector position_energies; // length n
  double residual = 0.0;
  std::size_t erasures_used = 0;
};

class LocalizationFailure : public std::runtime_error {
 public:
  LocalizationFailure(const std::string& what, Complex root)
      : std::runtime_error(what), root_(root) {}
  Complex unmatched_root() const { return root_; }

 private:
  Complex root_;
};

class DecodeUnreliable : public std::runtime_error {
 public:
  DecodeUnreliable(const std::string& what, DecodeResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const DecodeResult& partial() const { return partial_; }

 private:
  DecodeResult partial_;
};

enum class DecodeStatus { kOk, kLocalizationFailure, kUnreliable };

struct DecodeOutcome {
  DecodeStatus status = DecodeStatus::kOk;
  DecodeResult result;
  Complex unmatched_root{};  // set for kLocalizationFailure
};

// Holds the root-of-unity tables for one (n, k) and exposes the codec
// operations. Immutable after construction; safe to share across threads.
class DftCodec {
 public:
  explicit DftCodec(const CodecParams& params);

  const CodecParams& params() const { return params_; }

  // values[p] = sum_t message[t] * omega_{p+1}^t.
  Codeword encode(std::span<const Complex> message) const;

  // Spectrum components k..n-1 of the received word, scaled so that the
  // spectrum of a clean codeword equals its message. Linear in the input.
  ComplexVector syndromes(const Codeword& received) const;

  // Rank of the syndrome Hankel matrix, see CodecParams::rank_tolerance.
  std::size_t estimate_error_count(std::span<const Complex> syndromes) const;

  // Error-locator recovery for `count` errors. Throws LocalizationFailure
  // when a locator root is farther than the match tolerance from every
  // evaluation point.
  PositionSet locate_errors(std::span<const Complex> syndromes,
                            std::size_t count) const;

  // Full decode. Throws LocalizationFailure or DecodeUnreliable.
  DecodeResult decode(const Codeword& received,
                      const std::optional<PositionSet>& erasure_hints = {}) const;

  // Non-throwing decode: failures come back as a status plus the best
  // partial result.
  DecodeOutcome try_decode(const Codeword& received,
                           const std::optional<PositionSet>& erasure_hints = {}) const;

  // Singular values of the syndrome Hankel matrix, descending.
  RealVector hankel_singular_values(std::span<const Complex> syndromes) const;

  // First k spectrum components; the message of a clean codeword.
  ComplexVector interpolate(const Codeword& word) const;

  // omega_{p+1}.
  Complex evaluation_point(std::size_t position) const;

 private:
  struct Attempt;

  std::size_t rank_estimate(std::span<const Complex> syn, std::size_t capacity,
                            double abs_floor, double rel_tol) const;
  PositionSet locate(std::span<const Complex> syn, std::size_t count) const;
  ComplexVector solve_error_values(std::span<const Complex> syn,
                                   const PositionSet& positions) const;
  ComplexVector forney_syndromes(std::span<const Complex> syn,
                                 const PositionSet& erasures) const;
  Attempt attempt(const Codeword& received, std::span<const Complex> syn,
                  const PositionSet& positions) const;
  void add_sub_floor_evidence(const Codeword& received,
                              std::span<const Complex> syn,
                              DecodeResult& result) const;
  double reliability_gate(const Codeword& received) const;

  // root_[j] = exp(2*pi*i*j/n)
  Complex root(std::size_t j) const { return roots_[j % params_.n]; }

  CodecParams params_;
  ComplexVector roots_;
  Eigen::MatrixXcd encode_matrix_;    // n x k
  Eigen::MatrixXcd spectrum_matrix_;  // n x n, row f = frequency f
};

}  // namespace forta::codec
